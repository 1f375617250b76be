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
#include <random>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "probcbma/cbma/dataset.hpp"

namespace probcbma::sim {

struct GenConfig {
  std::size_t n_studies = 5000;
  std::size_t n_terms = 11;
  std::size_t n_voxels = 1000;
  double active_fraction = 0.05;
  // Mean and row-major covariance of the Gaussian behind the logistic-normal
  // term frequencies. Empty means zeros and the block default.
  std::vector<double> mu;
  std::vector<double> sigma;
  double tau = 0.1;
  double alpha = 300.0;
  std::pair<std::size_t, std::size_t> query{0, 1};
  std::uint64_t seed = 0;
  // Reported fraction of voxels per study away from the query's effect.
  double base_rate = 0.0138;
  double link_strength = 5.0;
  double coef_scale = 1.0;
  std::size_t max_rejections = 10000;
  double term_sd = 3.0;
  double term_corr = 0.5;
  std::size_t term_groups = 3;
  // Document-frequency presence cutoff; negative means 1 / (10 M).
  double presence_cutoff = -1.0;

  void validate() const;
  std::vector<double> mean() const;
  std::vector<double> covariance() const;
  double cutoff() const { return presence_cutoff >= 0 ? presence_cutoff : 1.0 / (10.0 * static_cast<double>(n_terms)); }
};

// Terms split into `groups` contiguous blocks; variance sd^2, covariance
// corr * sd^2 inside a block, 0 across blocks.
std::vector<double> block_covariance(std::size_t m, std::size_t groups, double sd, double corr);

// Independent generator for (seed, stream, index).
std::mt19937_64 stream_rng(std::uint64_t seed, std::string_view stream, std::uint64_t index);
double uniform01(std::mt19937_64& rng);
double standard_normal(std::mt19937_64& rng);

using Matrix = std::vector<std::vector<double>>;

// One logistic-normal row per study. Throws Error when the covariance is
// not positive semidefinite.
Matrix sample_term_frequencies(const GenConfig& cfg);

// idf_j = max(0, ln(N / (1 + df_j))), df_j = #{i : tf_ij > cutoff}.
std::vector<double> compute_idf(const Matrix& tf, double cutoff);
Matrix tfidf(const Matrix& tf, const std::vector<double>& idf);

struct Activations {
  std::vector<cbma::ActivationEntry> y;
  std::vector<std::uint8_t> truth;
};

// Voxel coefficients beta_k ~ N(0, coef_scale^2 I). Voxel k is linked to the
// query when both query coefficients exceed coef_scale * PhiInv(1 - sqrt(f)).
// A draw is kept only when exactly round(f K) voxels are linked. Then
// logit p_k(i) = logit(base_rate) + beta_k . x_i
//                + link_strength * linked_k * [omega(x_ia) > 1/2 and omega(x_ib) > 1/2].
Activations sample_activations(const GenConfig& cfg, const Matrix& x);

struct SimulatedDataset {
  cbma::CbmaDataset data;
  std::vector<std::uint8_t> truth;
};

// "t00", "t01", ...; at least two digits.
std::vector<std::string> term_names(std::size_t m);
SimulatedDataset generate(const GenConfig& cfg);

}  // namespace probcbma::sim
