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

#include <string_view>

#include "probcbma/cbma/dataset.hpp"
#include "probcbma/dsl/validate.hpp"
#include "probcbma/probdb.hpp"

namespace probcbma::cbma {

enum class Mode { Hard, Soft };

struct ThresholdConfig {
  Mode mode = Mode::Hard;
  double tau = 0.1;
  double alpha = 300.0;

  // Throws Error unless tau >= 0 and alpha > 0.
  void validate() const;
  // Probability that a term with this TF-IDF value holds for its study.
  // Zero TF-IDF has weight 0 in both modes.
  double weight(double tfidf) const;
};

// sigma(alpha (x - tau)).
double omega(double x, double alpha, double tau);

Mode parse_mode(std::string_view text);

// The deterministic rules linking studies, terms and voxels.
extern const char* const kCbmaRules;

struct EncodedProgram {
  dsl::ValidatedProgram program;
  ProbDatabase db;
};

// SelectedStudy is an equiprobable choice over studies, VoxelReported holds
// Y, and TermInStudy(t, s) has probability cfg.weight(X[s][t]); tuples of
// probability 0 are left out.
EncodedProgram encode_program(const CbmaDataset& ds, const ThresholdConfig& cfg);

}  // namespace probcbma::cbma
