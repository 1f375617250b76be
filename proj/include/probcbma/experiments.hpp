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

#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "probcbma/cbma/dataset.hpp"
#include "probcbma/cbma/encode.hpp"
#include "probcbma/sim.hpp"

namespace probcbma::experiments {

using TermPair = std::pair<std::size_t, std::size_t>;

struct Summary {
  std::size_t count = 0;
  double mean = 0, median = 0, q1 = 0, q3 = 0;
};

// Linear-interpolation quartiles.
Summary summarize(std::vector<double> values);

// The `count` terms with the most studies, ties broken by dataset order.
std::vector<std::uint32_t> top_terms(const cbma::CbmaDataset& ds, std::size_t count);

// Every unordered pair of the given items.
std::vector<TermPair> all_pairs(std::size_t n);

// `size` distinct study indices in ascending order.
std::vector<std::uint32_t> subsample(std::size_t population, std::size_t size, std::uint64_t seed,
                                     const std::string& stream, std::uint64_t index);

struct F1Config {
  // Population generator; its query is replaced for each benchmarked pair.
  sim::GenConfig population;
  std::vector<std::size_t> sample_sizes{150, 500, 1500, 5000};
  std::size_t repeats = 10;
  // Pairs of term indices; empty means all pairs.
  std::vector<TermPair> queries;
  double significance = 0.01;

  F1Config() { population.n_studies = 10000; }
};

struct F1Cell {
  TermPair query;
  std::size_t size = 0;
  std::size_t repeat = 0;
  cbma::Mode mode = cbma::Mode::Hard;
  double f1 = 0.0;
  // Empty, or why the cell was scored 0.
  std::string note;
};

struct F1Result {
  std::vector<std::string> terms;
  std::vector<F1Cell> cells;

  Summary summary(std::size_t size, cbma::Mode mode) const;
  std::string to_tsv() const;
  std::string summary_json() const;
};

F1Result run_f1_benchmark(const F1Config& cfg);

struct ConsistencyConfig {
  std::vector<std::size_t> sample_sizes{150, 500, 1500, 5000};
  std::size_t subsamples = 100;
  // Pairs of term names; empty means all pairs of the 11 most frequent terms.
  std::vector<std::pair<std::string, std::string>> queries;
  double tau = 0.1;
  double alpha = 300.0;
  double significance = 0.01;
  std::uint64_t seed = 0;
};

struct ConsistencyRow {
  std::string term_a, term_b;
  std::size_t size = 0;
  cbma::Mode mode = cbma::Mode::Hard;
  double consistency = 0.0;
  // Sub-samples without matching studies; their maps are all inactive.
  std::size_t skipped = 0;
};

struct ConsistencyResult {
  std::vector<ConsistencyRow> rows;

  Summary summary(std::size_t size, cbma::Mode mode) const;
  std::string to_tsv() const;
  std::string summary_json() const;
};

ConsistencyResult run_consistency_benchmark(const cbma::CbmaDataset& ds, const ConsistencyConfig& cfg);

const char* mode_name(cbma::Mode mode);

}  // namespace probcbma::experiments
