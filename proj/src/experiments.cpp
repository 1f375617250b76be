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

#include "probcbma/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "json.hpp"
#include "probcbma/cbma/estimators.hpp"
#include "probcbma/error.hpp"
#include "probcbma/parallel.hpp"
#include "probcbma/stats.hpp"

namespace probcbma::experiments {
namespace {

constexpr cbma::Mode kModes[] = {cbma::Mode::Hard, cbma::Mode::Soft};

std::vector<double> pair_weights(const cbma::CbmaDataset& ds, const cbma::ThresholdConfig& cfg, const std::string& a,
                                 const std::string& b) {
  auto w = cbma::term_weights(ds, cfg, a);
  auto x = cbma::term_weights(ds, cfg, b);
  for (std::size_t i = 0; i < w.size(); ++i) w[i] *= x[i];
  return w;
}

bool any_match(const std::vector<double>& w) {
  return std::any_of(w.begin(), w.end(), [](double x) { return x >= cbma::kNoMatchingWeight; });
}

nlohmann::json to_json(const Summary& s) {
  return {{"count", s.count}, {"mean", s.mean}, {"median", s.median}, {"q1", s.q1}, {"q3", s.q3}};
}

std::string format(double x) {
  std::ostringstream out;
  out.precision(17);
  out << x;
  return out.str();
}

}  // namespace

const char* mode_name(cbma::Mode mode) { return mode == cbma::Mode::Hard ? "hard" : "soft"; }

Summary summarize(std::vector<double> values) {
  Summary s;
  s.count = values.size();
  if (values.empty()) return s;
  std::sort(values.begin(), values.end());
  auto at = [&](double q) {
    double pos = q * static_cast<double>(values.size() - 1);
    auto lo = static_cast<std::size_t>(std::floor(pos));
    auto hi = std::min(lo + 1, values.size() - 1);
    return values[lo] + (pos - static_cast<double>(lo)) * (values[hi] - values[lo]);
  };
  s.mean = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
  s.median = at(0.5);
  s.q1 = at(0.25);
  s.q3 = at(0.75);
  return s;
}

std::vector<std::uint32_t> top_terms(const cbma::CbmaDataset& ds, std::size_t count) {
  std::vector<std::uint32_t> order(ds.n_terms());
  std::iota(order.begin(), order.end(), 0u);
  std::stable_sort(order.begin(), order.end(), [&](std::uint32_t a, std::uint32_t b) {
    return ds.document_frequency(a) > ds.document_frequency(b);
  });
  order.resize(std::min(count, order.size()));
  return order;
}

std::vector<TermPair> all_pairs(std::size_t n) {
  std::vector<TermPair> out;
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = a + 1; b < n; ++b) out.emplace_back(a, b);
  return out;
}

std::vector<std::uint32_t> subsample(std::size_t population, std::size_t size, std::uint64_t seed,
                                     const std::string& stream, std::uint64_t index) {
  if (size > population)
    throw Error("sample size " + std::to_string(size) + " exceeds the " + std::to_string(population) + " studies");
  std::vector<std::uint32_t> idx(population);
  std::iota(idx.begin(), idx.end(), 0u);
  auto rng = sim::stream_rng(seed, stream, index);
  for (std::size_t i = 0; i < size; ++i) {
    std::size_t j = i + static_cast<std::size_t>(sim::uniform01(rng) * static_cast<double>(population - i));
    std::swap(idx[i], idx[std::min(j, population - 1)]);
  }
  idx.resize(size);
  std::sort(idx.begin(), idx.end());
  return idx;
}

F1Result run_f1_benchmark(const F1Config& cfg) {
  if (cfg.sample_sizes.empty() || cfg.repeats == 0) throw Error("the benchmark needs sample sizes and repeats");
  for (auto n : cfg.sample_sizes)
    if (n == 0 || n > cfg.population.n_studies)
      throw Error("sample size " + std::to_string(n) + " is outside [1, " + std::to_string(cfg.population.n_studies) +
                  "]");
  auto queries = cfg.queries.empty() ? all_pairs(cfg.population.n_terms) : cfg.queries;
  F1Result result;
  result.terms = sim::term_names(cfg.population.n_terms);

  for (const auto& q : queries) {
    sim::GenConfig gen = cfg.population;
    gen.query = q;
    const sim::SimulatedDataset population = sim::generate(gen);
    const std::string& a = result.terms.at(q.first);
    const std::string& b = result.terms.at(q.second);
    const std::string tag = "f1:" + std::to_string(q.first) + "," + std::to_string(q.second);

    const std::size_t jobs = cfg.sample_sizes.size() * cfg.repeats;
    std::vector<F1Cell> cells(jobs * 2);
    parallel_for(jobs, [&](std::size_t job) {
      const std::size_t size = cfg.sample_sizes[job / cfg.repeats];
      const std::size_t repeat = job % cfg.repeats;
      auto idx = subsample(gen.n_studies, size, gen.seed, tag + ":" + std::to_string(size), repeat);
      const cbma::CbmaDataset sample = population.data.subset(idx);
      for (std::size_t m = 0; m < 2; ++m) {
        F1Cell& cell = cells[job * 2 + m];
        cell = F1Cell{q, size, repeat, kModes[m], 0.0, {}};
        cbma::ThresholdConfig th{kModes[m], gen.tau, gen.alpha};
        auto w = pair_weights(sample, th, a, b);
        if (!any_match(w)) {
          cell.note = "no matching studies";
          continue;
        }
        auto predicted = cbma::active_voxels(cbma::weighted_counts(sample, w), cfg.significance);
        cell.f1 = stats::f1_score(predicted, population.truth);
      }
    });
    result.cells.insert(result.cells.end(), cells.begin(), cells.end());
  }
  return result;
}

Summary F1Result::summary(std::size_t size, cbma::Mode mode) const {
  std::vector<double> v;
  for (const auto& c : cells)
    if (c.size == size && c.mode == mode) v.push_back(c.f1);
  return summarize(std::move(v));
}

std::string F1Result::to_tsv() const {
  std::ostringstream out;
  out << "term_a\tterm_b\tsize\trepeat\tmode\tf1\tnote\n";
  for (const auto& c : cells)
    out << terms.at(c.query.first) << '\t' << terms.at(c.query.second) << '\t' << c.size << '\t' << c.repeat << '\t'
        << mode_name(c.mode) << '\t' << format(c.f1) << '\t' << c.note << '\n';
  return out.str();
}

std::string F1Result::summary_json() const {
  std::vector<std::size_t> sizes;
  for (const auto& c : cells)
    if (std::find(sizes.begin(), sizes.end(), c.size) == sizes.end()) sizes.push_back(c.size);
  nlohmann::json cells_json = nlohmann::json::array();
  for (auto size : sizes)
    for (auto mode : kModes)
      cells_json.push_back({{"size", size}, {"mode", mode_name(mode)}, {"f1", to_json(summary(size, mode))}});
  std::size_t skipped = std::count_if(cells.begin(), cells.end(), [](const F1Cell& c) { return !c.note.empty(); });
  return nlohmann::json{{"benchmark", "f1"}, {"cells", cells_json}, {"skipped", skipped}}.dump(2) + "\n";
}

ConsistencyResult run_consistency_benchmark(const cbma::CbmaDataset& ds, const ConsistencyConfig& cfg) {
  if (cfg.sample_sizes.empty() || cfg.subsamples == 0) throw Error("the benchmark needs sample sizes and sub-samples");
  std::vector<std::pair<std::string, std::string>> queries = cfg.queries;
  if (queries.empty()) {
    auto top = top_terms(ds, 11);
    for (const auto& [a, b] : all_pairs(top.size()))
      queries.emplace_back(ds.terms()[top[a]].str(), ds.terms()[top[b]].str());
  }
  for (const auto& [a, b] : queries)
    if (!ds.term_index(a) || !ds.term_index(b)) throw Error("unknown term in query " + a + " & " + b);

  ConsistencyResult result;
  for (const auto& [a, b] : queries)
    for (auto size : cfg.sample_sizes) {
      const std::string tag = "consistency:" + a + "&" + b + ":" + std::to_string(size);
      std::vector<std::vector<std::uint8_t>> maps[2];
      maps[0].resize(cfg.subsamples);
      maps[1].resize(cfg.subsamples);
      std::vector<std::uint8_t> skipped[2] = {std::vector<std::uint8_t>(cfg.subsamples, 0),
                                              std::vector<std::uint8_t>(cfg.subsamples, 0)};
      parallel_for(cfg.subsamples, [&](std::size_t m) {
        const cbma::CbmaDataset sample = ds.subset(subsample(ds.n_studies(), size, cfg.seed, tag, m));
        for (std::size_t mode = 0; mode < 2; ++mode) {
          cbma::ThresholdConfig th{kModes[mode], cfg.tau, cfg.alpha};
          auto w = pair_weights(sample, th, a, b);
          if (!any_match(w)) {
            skipped[mode][m] = 1;
            maps[mode][m].assign(ds.n_voxels(), 0);
            continue;
          }
          maps[mode][m] = cbma::active_voxels(cbma::weighted_counts(sample, w), cfg.significance);
        }
      });
      for (std::size_t mode = 0; mode < 2; ++mode) {
        ConsistencyRow row{a, b, size, kModes[mode], stats::consistency(maps[mode]), 0};
        row.skipped = std::count(skipped[mode].begin(), skipped[mode].end(), 1);
        result.rows.push_back(std::move(row));
      }
    }
  return result;
}

Summary ConsistencyResult::summary(std::size_t size, cbma::Mode mode) const {
  std::vector<double> v;
  for (const auto& r : rows)
    if (r.size == size && r.mode == mode) v.push_back(r.consistency);
  return summarize(std::move(v));
}

std::string ConsistencyResult::to_tsv() const {
  std::ostringstream out;
  out << "term_a\tterm_b\tsize\tmode\tconsistency\tskipped\n";
  for (const auto& r : rows)
    out << r.term_a << '\t' << r.term_b << '\t' << r.size << '\t' << mode_name(r.mode) << '\t' << format(r.consistency)
        << '\t' << r.skipped << '\n';
  return out.str();
}

std::string ConsistencyResult::summary_json() const {
  std::vector<std::size_t> sizes;
  for (const auto& r : rows)
    if (std::find(sizes.begin(), sizes.end(), r.size) == sizes.end()) sizes.push_back(r.size);
  nlohmann::json cells = nlohmann::json::array();
  for (auto size : sizes)
    for (auto mode : kModes)
      cells.push_back(
          {{"size", size}, {"mode", mode_name(mode)}, {"consistency", to_json(summary(size, mode))}});
  return nlohmann::json{{"benchmark", "consistency"}, {"cells", cells}}.dump(2) + "\n";
}

}  // namespace probcbma::experiments
