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
#include <vector>

namespace probcbma::stats {

// Studies cross-classified by voxel activation (first index) and match of
// the condition (second index). Counts may be fractional.
struct Contingency2x2 {
  double n11 = 0, n10 = 0, n01 = 0, n00 = 0;

  double total() const { return n11 + n10 + n01 + n00; }
};

struct GTestResult {
  double g = 0.0;
  double p = 1.0;
  // A zero margin; p is 1 by convention.
  bool degenerate = false;
};

GTestResult g_test(const Contingency2x2& t);

// Regularized upper incomplete gamma Q(a, x).
double gamma_q(double a, double x);
// Survival function of the chi-square distribution.
double chi_square_sf(double x, double df);

// flag_k = p_k < base / K.
std::vector<std::uint8_t> bonferroni(std::span<const double> p_values, double base = 0.01);

double f1_score(std::span<const std::uint8_t> predicted, std::span<const std::uint8_t> truth);

// Rows are sub-samples, columns voxels. C = mean over voxels of 2|m - 1/2|,
// where m is the fraction of sub-samples marking the voxel active: 1 when
// every voxel is stable, 0 when every voxel is a coin flip.
double consistency(const std::vector<std::vector<std::uint8_t>>& maps);

}  // namespace probcbma::stats
