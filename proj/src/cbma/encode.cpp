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

#include "probcbma/cbma/encode.hpp"

#include <cmath>

#include "probcbma/dsl/parser.hpp"
#include "probcbma/error.hpp"

namespace probcbma::cbma {

const char* const kCbmaRules =
    "Activation(v) :- SelectedStudy(s), VoxelReported(v, s).\n"
    "TermAssociation(t) :- SelectedStudy(s), TermInStudy(t, s).\n";

double omega(double x, double alpha, double tau) {
  const double z = alpha * (x - tau);
  if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

void ThresholdConfig::validate() const {
  if (!(tau >= 0.0)) throw Error("tau must be non-negative");
  if (!(alpha > 0.0)) throw Error("alpha must be positive");
}

double ThresholdConfig::weight(double tfidf) const {
  if (!(tfidf > 0.0)) return 0.0;
  return mode == Mode::Hard ? (tfidf > tau ? 1.0 : 0.0) : omega(tfidf, alpha, tau);
}

Mode parse_mode(std::string_view text) {
  if (text == "hard") return Mode::Hard;
  if (text == "soft") return Mode::Soft;
  throw Error("mode must be hard or soft, got '" + std::string(text) + "'");
}

EncodedProgram encode_program(const CbmaDataset& ds, const ThresholdConfig& cfg) {
  cfg.validate();
  ProbDatabase db;
  db.add(make_equiprobable_choice("SelectedStudy", ds.studies()));

  std::vector<Symbol> args;
  args.reserve(2 * ds.activation_count());
  for (std::uint32_t i = 0; i < ds.n_studies(); ++i)
    for (auto v : ds.reported(i)) {
      args.push_back(ds.voxels()[v]);
      args.push_back(ds.studies()[i]);
    }
  db.add(ProbRelation::from_rows("VoxelReported", 2, std::move(args), {}));

  std::vector<Symbol> tis;
  std::vector<double> probs;
  for (std::uint32_t j = 0; j < ds.n_terms(); ++j)
    for (const auto& f : ds.term_column(j)) {
      double p = cfg.weight(f.tfidf);
      if (p <= 0.0) continue;
      tis.push_back(ds.terms()[j]);
      tis.push_back(ds.studies()[f.study]);
      probs.push_back(p);
    }
  db.add(ProbRelation::from_rows("TermInStudy", 2, std::move(tis), std::move(probs)));

  return EncodedProgram{dsl::validate_program(dsl::parse_program(kCbmaRules, "<cbma>")), std::move(db)};
}

}  // namespace probcbma::cbma
