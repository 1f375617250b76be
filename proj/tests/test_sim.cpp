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

#include <gtest/gtest.h>

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <sstream>

#include "helpers.hpp"
#include "probcbma/cbma/estimators.hpp"
#include "probcbma/config.hpp"
#include "probcbma/error.hpp"
#include "probcbma/sim.hpp"

using namespace probcbma;
using namespace probcbma::sim;

namespace {

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

GenConfig small_config() {
  GenConfig cfg;
  cfg.n_studies = 400;
  cfg.n_voxels = 200;
  cfg.seed = 7;
  return cfg;
}

// E[f(d)] for d ~ N(0, var) by the trapezoid rule on [-12 sd, 12 sd].
template <class F>
double normal_expectation(F f, double var) {
  const double sd = std::sqrt(var);
  const int n = 20000;
  const double lo = -12 * sd, h = 24 * sd / n;
  double sum = 0;
  for (int i = 0; i <= n; ++i) {
    double d = lo + i * h;
    double w = (i == 0 || i == n) ? 0.5 : 1.0;
    sum += w * f(d) * std::exp(-d * d / (2 * var));
  }
  return sum * h / std::sqrt(2 * M_PI * var);
}

}  // namespace

TEST(Rng, StreamsAreDeterministicAndDistinct) {
  auto a = stream_rng(1, "tf", 3), b = stream_rng(1, "tf", 3), c = stream_rng(1, "tf", 4), d = stream_rng(1, "beta", 3);
  auto x = a();
  EXPECT_EQ(x, b());
  EXPECT_NE(x, c());
  EXPECT_NE(x, d());
  EXPECT_NE(x, stream_rng(2, "tf", 3)());
}

TEST(Rng, NormalMoments) {
  auto rng = stream_rng(3, "moments", 0);
  const int n = 200000;
  double s = 0, s2 = 0;
  for (int i = 0; i < n; ++i) {
    double z = standard_normal(rng);
    s += z;
    s2 += z * z;
  }
  EXPECT_NEAR(s / n, 0.0, 0.01);
  EXPECT_NEAR(s2 / n, 1.0, 0.015);
  for (int i = 0; i < 1000; ++i) {
    double u = uniform01(rng);
    EXPECT_GT(u, 0.0);
    EXPECT_LT(u, 1.0);
  }
}

TEST(BlockCovariance, Structure) {
  auto s = block_covariance(5, 2, 2.0, 0.5);
  ASSERT_EQ(s.size(), 25u);
  EXPECT_DOUBLE_EQ(s[0], 4.0);
  EXPECT_DOUBLE_EQ(s[1], 2.0);
  EXPECT_DOUBLE_EQ(s[0 * 5 + 4], 0.0);
  for (std::size_t i = 0; i < 5; ++i)
    for (std::size_t j = 0; j < 5; ++j) EXPECT_EQ(s[i * 5 + j], s[j * 5 + i]);
}

TEST(GenConfig, Validation) {
  GenConfig cfg;
  EXPECT_NO_THROW(cfg.validate());
  cfg.active_fraction = 0;
  EXPECT_THROW(cfg.validate(), Error);
  cfg = {};
  cfg.n_terms = 2;
  cfg.sigma = {1, 2, 2, 1};
  EXPECT_THROW(sample_term_frequencies(cfg), Error);
  cfg.sigma = {1, 0, 1, 1};
  EXPECT_THROW(cfg.validate(), Error);
  cfg = {};
  cfg.query = {0, 0};
  EXPECT_THROW(cfg.validate(), Error);
}

TEST(TermFrequencies, DegenerateCovarianceGivesUniform) {
  GenConfig cfg;
  cfg.n_studies = 20;
  cfg.n_terms = 4;
  cfg.mu.assign(4, 0.0);
  cfg.sigma.assign(16, 0.0);
  for (const auto& row : sample_term_frequencies(cfg))
    for (double v : row) EXPECT_EQ(v, 0.25);
}

TEST(TermFrequencies, RowsSumToOne) {
  GenConfig cfg = small_config();
  for (const auto& row : sample_term_frequencies(cfg)) {
    EXPECT_NEAR(std::accumulate(row.begin(), row.end(), 0.0), 1.0, 1e-12);
    for (double v : row) EXPECT_GE(v, 0.0);
  }
}

TEST(TermFrequencies, MonteCarloMatchesQuadrature) {
  GenConfig cfg;
  cfg.n_studies = 100000;
  cfg.n_terms = 2;
  cfg.mu = {0, 0};
  cfg.sigma = {1, 0, 0, 1};
  cfg.seed = 11;
  auto tf = sample_term_frequencies(cfg);
  double m1 = 0, m2 = 0;
  for (const auto& row : tf) {
    m1 += row[0];
    m2 += row[0] * row[0];
  }
  m1 /= tf.size();
  m2 /= tf.size();
  // softmax(g)_0 = sigma(g0 - g1) with g0 - g1 ~ N(0, 2).
  auto sig = [](double d) { return 1 / (1 + std::exp(-d)); };
  EXPECT_NEAR(m1, normal_expectation(sig, 2.0), 1e-2);
  EXPECT_NEAR(m2, normal_expectation([&](double d) { return sig(d) * sig(d); }, 2.0), 1e-2);
}

TEST(Idf, Examples) {
  Matrix tf(9, std::vector<double>{0.5, 0.5});
  for (std::size_t i = 1; i < 9; ++i) tf[i][1] = 0.0;
  auto idf = compute_idf(tf, 0.0);
  EXPECT_DOUBLE_EQ(idf[0], 0.0);
  EXPECT_DOUBLE_EQ(idf[1], std::log(9.0 / 2.0));
  EXPECT_DOUBLE_EQ(compute_idf(Matrix{{1.0}}, 0.0)[0], 0.0);
  auto x = tfidf(tf, idf);
  EXPECT_DOUBLE_EQ(x[0][1], 0.5 * std::log(4.5));
  EXPECT_DOUBLE_EQ(x[0][0], 0.0);
}

TEST(Activations, TruthCardinality) {
  GenConfig cfg = small_config();
  cfg.n_voxels = 1000;
  auto sim = generate(cfg);
  EXPECT_EQ(std::accumulate(sim.truth.begin(), sim.truth.end(), 0), 50);
  EXPECT_EQ(sim.data.n_voxels(), 1000u);
  for (double f : {0.01, 0.2}) {
    cfg.active_fraction = f;
    auto s = generate(cfg);
    EXPECT_EQ(std::accumulate(s.truth.begin(), s.truth.end(), 0), static_cast<int>(std::lround(f * 1000)));
  }
}

TEST(Activations, ConstantRate) {
  GenConfig cfg;
  cfg.n_studies = 2000;
  cfg.n_voxels = 200;
  cfg.coef_scale = 1e-9;
  cfg.link_strength = 0;
  cfg.base_rate = 0.05;
  cfg.seed = 5;
  auto sim = generate(cfg);
  const double n = static_cast<double>(cfg.n_studies * cfg.n_voxels);
  const double rate = sim.data.activation_count() / n;
  EXPECT_NEAR(rate, 0.05, 3 * std::sqrt(0.05 * 0.95 / n));
}

TEST(Activations, RejectionBudget) {
  GenConfig cfg = small_config();
  cfg.n_voxels = 20000;
  cfg.active_fraction = 0.5;
  cfg.max_rejections = 1;
  EXPECT_THROW(generate(cfg), RejectionBudgetExceeded);
}

TEST(Generate, Deterministic) {
  GenConfig cfg = small_config();
  auto a = generate(cfg), b = generate(cfg);
  auto da = std::filesystem::temp_directory_path() / "probcbma_det_a";
  auto db = std::filesystem::temp_directory_path() / "probcbma_det_b";
  std::filesystem::create_directories(da);
  std::filesystem::create_directories(db);
  cbma::save_dataset(a.data, da.string());
  cbma::save_dataset(b.data, db.string());
  for (const char* f : {"features.tsv", "activations.tsv", "voxels.tsv"}) EXPECT_EQ(slurp(da / f), slurp(db / f)) << f;
  EXPECT_EQ(a.truth, b.truth);
  cfg.seed = 8;
  EXPECT_NE(generate(cfg).data.activation_count(), a.data.activation_count());
}

TEST(Generate, SparsityAndSeparation) {
  GenConfig cfg;
  cfg.n_studies = 10000;
  cfg.seed = 3;
  auto start = std::chrono::steady_clock::now();
  auto sim = generate(cfg);
  double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  EXPECT_LT(seconds, 60.0);

  const double per_study = static_cast<double>(sim.data.activation_count()) / cfg.n_studies;
  const double target = cfg.base_rate * cfg.n_voxels;
  EXPECT_GT(per_study, target / 2);
  EXPECT_LT(per_study, target * 2);

  // P[A_k | both query terms above tau], truth voxels against the rest.
  cbma::ThresholdConfig hard{cbma::Mode::Hard, cfg.tau, cfg.alpha};
  auto p = cbma::estimate_conjunction(sim.data, hard, {"t00", "t01"});
  double truth_min = 1, other_max = 0;
  for (std::size_t k = 0; k < cfg.n_voxels; ++k) {
    double v = p.lookup({sim.data.voxels()[k].str()});
    if (sim.truth[k]) truth_min = std::min(truth_min, v);
    else other_max = std::max(other_max, v);
  }
  EXPECT_GT(truth_min, other_max);
}

TEST(Config, ParseKeyValues) {
  auto kv = parse_key_values("# comment\nn_studies = 100\n\nquery = 1, 3  # trailing\n");
  EXPECT_EQ(kv.at("n_studies").text, "100");
  EXPECT_EQ(kv.at("n_studies").line, 2);
  EXPECT_EQ(kv.at("query").text, "1, 3");
  EXPECT_THROW(parse_key_values("a = 1\na = 2\n"), ParseError);
  EXPECT_THROW(parse_key_values("no equals sign\n"), ParseError);
}

TEST(Config, ApplyGenConfig) {
  auto cfg = apply_gen_config({}, parse_key_values("n_studies = 100\nn_terms = 4\nquery = 1, 3\nseed = 9\n"));
  EXPECT_EQ(cfg.n_studies, 100u);
  EXPECT_EQ(cfg.query, (std::pair<std::size_t, std::size_t>{1, 3}));
  EXPECT_EQ(cfg.seed, 9u);
  EXPECT_THROW(apply_gen_config({}, parse_key_values("bogus = 1\n")), ParseError);
  EXPECT_THROW(apply_gen_config({}, parse_key_values("n_studies = many\n")), ParseError);
}

TEST(Config, MeanAndCovarianceFiles) {
  auto dir = std::filesystem::temp_directory_path() / "probcbma_cfg";
  std::filesystem::create_directories(dir);
  std::ofstream(dir / "mu.txt") << "0 1\n";
  std::ofstream(dir / "sigma.txt") << "1 0\n0 2\n";
  std::ofstream(dir / "gen.cfg") << "n_terms = 2\nmu_file = mu.txt\nsigma_file = sigma.txt\n";
  auto cfg = load_gen_config((dir / "gen.cfg").string());
  EXPECT_EQ(cfg.mu, (std::vector<double>{0, 1}));
  EXPECT_EQ(cfg.sigma, (std::vector<double>{1, 0, 0, 2}));
}
