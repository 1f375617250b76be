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
#include <span>
#include <string>
#include <vector>

#include "probcbma/cbma/dataset.hpp"
#include "probcbma/cbma/encode.hpp"
#include "probcbma/dsl/ast.hpp"
#include "probcbma/ra/table.hpp"
#include "probcbma/stats.hpp"

namespace probcbma::cbma {

inline constexpr double kNoMatchingWeight = 1e-15;

// Per-study weight of a term; unknown terms weigh 0 everywhere.
std::vector<double> term_weights(const CbmaDataset& ds, const ThresholdConfig& cfg, std::string_view term);

// Per-study probability of a formula over TermAssociation atoms (bare term
// names parse to those). And is a product and Or a noisy-or when every term
// occurs once; formulas repeating a term are summed over assignments of
// their terms. Throws UnsupportedQuery for other atoms.
std::vector<double> formula_weights(const CbmaDataset& ds, const ThresholdConfig& cfg, const dsl::Formula& phi);

// Sums of study weights per voxel.
struct WeightedCounts {
  std::vector<double> active_weight;        // sum of w over studies reporting the voxel
  std::vector<std::uint32_t> active_count;  // studies reporting the voxel
  double total_weight = 0.0;
  std::size_t studies = 0;

  double probability(std::size_t voxel) const;
  stats::Contingency2x2 table(std::size_t voxel) const;
};

WeightedCounts weighted_counts(const CbmaDataset& ds, std::span<const double> weights);

// sum_i Y_ik w_i / sum_i w_i for every voxel, in dataset order. Throws
// NoMatchingStudies when every weight is below kNoMatchingWeight.
ra::ProbTable estimate_from_weights(const CbmaDataset& ds, std::span<const double> weights,
                                   const std::string& column = "v");

ra::ProbTable estimate_conjunction(const CbmaDataset& ds, const ThresholdConfig& cfg,
                                   const std::vector<std::string>& terms, const std::string& column = "v");
ra::ProbTable estimate_disjunction(const CbmaDataset& ds, const ThresholdConfig& cfg,
                                   const std::vector<std::string>& terms, const std::string& column = "v");
ra::ProbTable estimate_formula(const CbmaDataset& ds, const ThresholdConfig& cfg, const dsl::Formula& phi,
                               const std::string& column = "v");

struct VoxelTest {
  stats::GTestResult g;
  bool significant = false;
  // Significant and more frequent when the formula holds than when it does not.
  bool active = false;
};

// G-test per voxel with a Bonferroni threshold of base / K.
std::vector<VoxelTest> test_voxels(const WeightedCounts& counts, double base = 0.01);
std::vector<std::uint8_t> active_voxels(const WeightedCounts& counts, double base = 0.01);

}  // namespace probcbma::cbma
