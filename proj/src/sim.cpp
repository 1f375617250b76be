// Copyright 2026 The probcbma Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "probcbma/sim.hpp"

#include <algorithm>
#include <boost/math/distributions/normal.hpp>
#include <cmath>
#include <Eigen/Dense>

#include "probcbma/cbma/encode.hpp"
#include "probcbma/error.hpp"
#include "probcbma/parallel.hpp"

namespace probcbma::sim {
namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : s) h = (h ^ c) * 0x100000001b3ull;
  return h;
}

std::string padded(char prefix, std::size_t i, std::size_t n, std::size_t min_width = 1) {
  std::size_t width = std::max(min_width, std::to_string(n > 0 ? n - 1 : 0).size());
  std::string digits = std::to_string(i);
  return std::string(1, prefix) + std::string(width > digits.size() ? width - digits.size() : 0, '0') + digits;
}

std::string query_tag(const GenConfig& cfg) {
  return std::to_string(cfg.query.first) + "," + std::to_string(cfg.query.second);
}

}  // namespace

void GenConfig::validate() const {
  if (n_studies < 1 || n_terms < 1 || n_voxels < 1) throw Error("studies, terms and voxels must all be at least 1");
  if (!(active_fraction > 0.0 && active_fraction < 1.0)) throw Error("active_fraction must lie in (0, 1)");
  if (!(base_rate > 0.0 && base_rate < 1.0)) throw Error("base_rate must lie in (0, 1)");
  if (!mu.empty() && mu.size() != n_terms) throw Error("mu needs one entry per term");
  if (!sigma.empty() && sigma.size() != n_terms * n_terms) throw Error("sigma needs n_terms x n_terms entries");
  for (std::size_t a = 0; a < n_terms && !sigma.empty(); ++a)
    for (std::size_t b = 0; b < a; ++b)
      if (std::abs(sigma[a * n_terms + b] - sigma[b * n_terms + a]) > 1e-12 * (1.0 + std::abs(sigma[a * n_terms + b])))
        throw Error("sigma must be symmetric");
  if (query.first >= n_terms || query.second >= n_terms || query.first == query.second)
    throw Error("query must name two distinct terms");
  if (!(tau >= 0.0) || !(alpha > 0.0)) throw Error("tau must be non-negative and alpha positive");
  if (!(coef_scale > 0.0)) throw Error("coef_scale must be positive");
  if (max_rejections < 1) throw Error("max_rejections must be at least 1");
  if (term_groups < 1) throw Error("term_groups must be at least 1");
}

std::vector<double> GenConfig::mean() const { return mu.empty() ? std::vector<double>(n_terms, 0.0) : mu; }

std::vector<double> GenConfig::covariance() const {
  return sigma.empty() ? block_covariance(n_terms, term_groups, term_sd, term_corr) : sigma;
}

std::vector<double> block_covariance(std::size_t m, std::size_t groups, double sd, double corr) {
  groups = std::max<std::size_t>(1, std::min(groups, m));
  std::vector<double> s(m * m, 0.0);
  auto group_of = [&](std::size_t j) { return j * groups / m; };
  for (std::size_t a = 0; a < m; ++a)
    for (std::size_t b = 0; b < m; ++b)
      if (a == b)
        s[a * m + b] = sd * sd;
      else if (group_of(a) == group_of(b))
        s[a * m + b] = corr * sd * sd;
  return s;
}

std::mt19937_64 stream_rng(std::uint64_t seed, std::string_view stream, std::uint64_t index) {
  std::uint64_t s = splitmix64(seed);
  s = splitmix64(s ^ fnv1a(stream));
  s = splitmix64(s ^ index);
  return std::mt19937_64(s);
}

double uniform01(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

double standard_normal(std::mt19937_64& rng) {
  double u1;
  do u1 = uniform01(rng);
  while (u1 <= 0.0);
  const double u2 = uniform01(rng);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

Matrix sample_term_frequencies(const GenConfig& cfg) {
  cfg.validate();
  const std::size_t m = cfg.n_terms;
  const auto mu_v = cfg.mean();
  const auto sigma_v = cfg.covariance();
  Eigen::MatrixXd sigma(m, m);
  for (std::size_t a = 0; a < m; ++a)
    for (std::size_t b = 0; b < m; ++b) sigma(a, b) = sigma_v[a * m + b];
  const double scale = std::max(1.0, sigma.cwiseAbs().maxCoeff());
  if (!sigma.isApprox(sigma.transpose(), 1e-12)) throw Error("covariance matrix is not symmetric");
  Eigen::LDLT<Eigen::MatrixXd> ldlt(sigma);
  if (ldlt.info() != Eigen::Success) throw Error("covariance factorization failed");
  Eigen::VectorXd d = ldlt.vectorD();
  if (d.minCoeff() < -1e-10 * scale) throw Error("covariance matrix is not positive semidefinite");
  Eigen::MatrixXd lower = ldlt.matrixL();
  Eigen::MatrixXd factor = ldlt.transpositionsP().transpose() * (lower * d.cwiseMax(0.0).cwiseSqrt().asDiagonal());

  Matrix tf(cfg.n_studies, std::vector<double>(m));
  parallel_for(cfg.n_studies, [&](std::size_t i) {
    auto rng = stream_rng(cfg.seed, "tf", i);
    Eigen::VectorXd z(m);
    for (std::size_t j = 0; j < m; ++j) z(j) = standard_normal(rng);
    Eigen::VectorXd g = factor * z;
    double top = -INFINITY;
    for (std::size_t j = 0; j < m; ++j) {
      g(j) += mu_v[j];
      top = std::max(top, g(j));
    }
    double total = 0.0;
    for (std::size_t j = 0; j < m; ++j) total += tf[i][j] = std::exp(g(j) - top);
    for (auto& x : tf[i]) x /= total;
  });
  return tf;
}

std::vector<double> compute_idf(const Matrix& tf, double cutoff) {
  if (tf.empty()) throw Error("term-frequency matrix is empty");
  const std::size_t m = tf.front().size();
  std::vector<double> df(m, 0.0);
  for (const auto& row : tf)
    for (std::size_t j = 0; j < m; ++j)
      if (row[j] > cutoff) df[j] += 1.0;
  std::vector<double> idf(m);
  const double n = static_cast<double>(tf.size());
  for (std::size_t j = 0; j < m; ++j) idf[j] = std::max(0.0, std::log(n / (1.0 + df[j])));
  return idf;
}

Matrix tfidf(const Matrix& tf, const std::vector<double>& idf) {
  Matrix x = tf;
  for (auto& row : x)
    for (std::size_t j = 0; j < row.size(); ++j) row[j] *= idf[j];
  return x;
}

Activations sample_activations(const GenConfig& cfg, const Matrix& x) {
  cfg.validate();
  const std::size_t k = cfg.n_voxels, m = cfg.n_terms;
  const auto [qa, qb] = cfg.query;
  const std::size_t want = static_cast<std::size_t>(std::llround(cfg.active_fraction * static_cast<double>(k)));
  const double cut =
      cfg.coef_scale * boost::math::quantile(boost::math::normal(), 1.0 - std::sqrt(cfg.active_fraction));
  const std::string tag = query_tag(cfg);

  std::vector<double> beta(k * m);
  Activations out;
  out.truth.assign(k, 0);
  bool accepted = false;
  for (std::size_t attempt = 0; attempt < cfg.max_rejections && !accepted; ++attempt) {
    auto rng = stream_rng(cfg.seed, "beta:" + tag, attempt);
    std::size_t linked = 0;
    for (std::size_t v = 0; v < k; ++v) {
      for (std::size_t j = 0; j < m; ++j) beta[v * m + j] = cfg.coef_scale * standard_normal(rng);
      out.truth[v] = beta[v * m + qa] > cut && beta[v * m + qb] > cut;
      linked += out.truth[v];
    }
    accepted = linked == want;
  }
  if (!accepted)
    throw RejectionBudgetExceeded("no coefficient draw linked exactly " + std::to_string(want) + " voxels in " +
                                  std::to_string(cfg.max_rejections) + " attempts");

  const double bias = std::log(cfg.base_rate / (1.0 - cfg.base_rate));
  std::vector<std::vector<std::uint32_t>> reported(x.size());
  parallel_for(x.size(), [&](std::size_t i) {
    auto rng = stream_rng(cfg.seed, "activations:" + tag, i);
    const auto& xi = x[i];
    const bool matches = cbma::omega(xi[qa], cfg.alpha, cfg.tau) > 0.5 && cbma::omega(xi[qb], cfg.alpha, cfg.tau) > 0.5;
    const double boost = matches ? cfg.link_strength : 0.0;
    for (std::size_t v = 0; v < k; ++v) {
      double z = bias;
      for (std::size_t j = 0; j < m; ++j) z += beta[v * m + j] * xi[j];
      if (out.truth[v]) z += boost;
      const double p = 1.0 / (1.0 + std::exp(-z));
      if (uniform01(rng) < p) reported[i].push_back(static_cast<std::uint32_t>(v));
    }
  });
  for (std::size_t i = 0; i < reported.size(); ++i)
    for (auto v : reported[i]) out.y.push_back({static_cast<std::uint32_t>(i), v});
  return out;
}

std::vector<std::string> term_names(std::size_t m) {
  std::vector<std::string> out;
  for (std::size_t j = 0; j < m; ++j) out.push_back(padded('t', j, m, 2));
  return out;
}

SimulatedDataset generate(const GenConfig& cfg) {
  cfg.validate();
  Matrix tf = sample_term_frequencies(cfg);
  Matrix x = tfidf(tf, compute_idf(tf, cfg.cutoff()));
  Activations act = sample_activations(cfg, x);

  std::vector<Symbol> studies, terms, voxels;
  for (std::size_t i = 0; i < cfg.n_studies; ++i) studies.push_back(Symbol::intern(padded('s', i, cfg.n_studies)));
  for (const auto& t : term_names(cfg.n_terms)) terms.push_back(Symbol::intern(t));
  for (std::size_t v = 0; v < cfg.n_voxels; ++v) voxels.push_back(Symbol::intern(padded('v', v, cfg.n_voxels)));
  std::vector<cbma::FeatureEntry> features;
  for (std::size_t i = 0; i < x.size(); ++i)
    for (std::size_t j = 0; j < x[i].size(); ++j)
      if (x[i][j] > 0.0) features.push_back({static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(j), x[i][j]});
  return SimulatedDataset{cbma::CbmaDataset(std::move(studies), std::move(terms), std::move(voxels),
                                            std::move(features), std::move(act.y)),
                          std::move(act.truth)};
}

}  // namespace probcbma::sim
