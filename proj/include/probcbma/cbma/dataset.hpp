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
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <tuple>
#include <unordered_map>
#include <vector>

#include "probcbma/symbol.hpp"

namespace probcbma::cbma {

struct Feature {
  std::uint32_t study;
  double tfidf;
};

struct FeatureEntry {
  std::uint32_t study;
  std::uint32_t term;
  double tfidf;
};

struct ActivationEntry {
  std::uint32_t study;
  std::uint32_t voxel;
};

// Studies, terms and voxels with a sparse TF-IDF matrix X and a sparse
// binary activation matrix Y.
class CbmaDataset {
 public:
  CbmaDataset() = default;
  // Throws DataError on out-of-range indices, negative or non-finite values
  // and empty id lists. Duplicate entries are rejected too.
  CbmaDataset(std::vector<Symbol> studies, std::vector<Symbol> terms, std::vector<Symbol> voxels,
              std::vector<FeatureEntry> features, std::vector<ActivationEntry> activations);

  std::size_t n_studies() const { return studies_.size(); }
  std::size_t n_terms() const { return terms_.size(); }
  std::size_t n_voxels() const { return voxels_.size(); }
  const std::vector<Symbol>& studies() const { return studies_; }
  const std::vector<Symbol>& terms() const { return terms_; }
  const std::vector<Symbol>& voxels() const { return voxels_; }

  std::optional<std::uint32_t> term_index(std::string_view name) const;
  std::optional<std::uint32_t> study_index(std::string_view name) const;

  // Nonzero TF-IDF entries of a term, ordered by study.
  std::span<const Feature> term_column(std::uint32_t term) const;
  double tfidf(std::uint32_t study, std::uint32_t term) const;
  // Voxels reported by a study, ascending.
  std::span<const std::uint32_t> reported(std::uint32_t study) const;
  std::size_t activation_count() const { return y_voxels_.size(); }
  std::size_t feature_count() const { return x_values_.size(); }
  // Number of studies with a nonzero entry for the term.
  std::size_t document_frequency(std::uint32_t term) const { return term_column(term).size(); }

  // Dataset restricted to the given studies, in the given order.
  CbmaDataset subset(std::span<const std::uint32_t> studies) const;

 private:
  std::vector<Symbol> studies_, terms_, voxels_;
  std::vector<std::uint32_t> x_offsets_;  // per term
  std::vector<Feature> x_values_;
  std::vector<std::uint32_t> y_offsets_;  // per study
  std::vector<std::uint32_t> y_voxels_;
  std::unordered_map<Symbol, std::uint32_t> term_lookup_, study_lookup_;
};

// Reads features.tsv (study_id, term, tfidf) and activations.tsv
// (study_id, voxel_id) from `dir`, each with a header row. An optional
// voxels.tsv (voxel_id) lists voxels that no study reports.
CbmaDataset load_dataset(const std::string& dir);
void save_dataset(const CbmaDataset& ds, const std::string& dir);

}  // namespace probcbma::cbma
