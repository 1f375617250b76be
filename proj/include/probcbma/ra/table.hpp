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
#include <initializer_list>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "probcbma/symbol.hpp"

namespace probcbma::ra {

// Probabilities keyed by bindings of `columns`. Keys without a row take
// `default_p`; for a freshly looked-up relation that is 0 (closed world). A
// table with no columns is a single number, stored as its default.
class ProbTable {
 public:
  ProbTable() = default;
  explicit ProbTable(std::vector<std::string> columns, double default_p = 0.0);
  static ProbTable scalar(double p);

  const std::vector<std::string>& columns() const { return columns_; }
  std::size_t width() const { return columns_.size(); }
  std::size_t size() const { return p_.size(); }
  bool is_scalar() const { return columns_.empty(); }
  double value() const { return default_p_; }
  double default_p() const { return default_p_; }
  void set_default(double p) { default_p_ = p; }
  std::optional<std::size_t> column_index(const std::string& name) const;

  std::span<const Symbol> key(std::size_t row) const { return {keys_.data() + row * width(), width()}; }
  double p(std::size_t row) const { return p_[row]; }
  double& p(std::size_t row) { return p_[row]; }

  // Appends a row; the caller guarantees the key is new.
  void add(std::span<const Symbol> key, double p);
  void add(std::initializer_list<std::string_view> key, double p);
  // Row of `key`, inserting it with probability `init` if absent.
  std::size_t upsert(std::span<const Symbol> key, double init);
  std::optional<std::size_t> find(std::span<const Symbol> key) const;
  double lookup(std::span<const Symbol> key) const;
  double lookup(std::initializer_list<std::string_view> key) const;

  void reserve(std::size_t rows);
  // Orders rows by the text of their keys.
  void sort_rows();
  // Keeps rows for which `keep(p)` holds.
  template <class F>
  void filter_rows(F keep);

  // Header of column names plus `p`, then one row per key in text order.
  std::string to_tsv() const;

 private:
  void build_index() const;
  static std::size_t hash(std::span<const Symbol> key);

  std::vector<std::string> columns_;
  std::vector<Symbol> keys_;
  std::vector<double> p_;
  double default_p_ = 0.0;
  mutable bool indexed_ = false;
  mutable std::unordered_multimap<std::size_t, std::uint32_t> index_;
};

template <class F>
void ProbTable::filter_rows(F keep) {
  std::size_t out = 0;
  for (std::size_t r = 0; r < size(); ++r) {
    if (!keep(p_[r])) continue;
    if (out != r) {
      std::copy(keys_.begin() + r * width(), keys_.begin() + (r + 1) * width(), keys_.begin() + out * width());
      p_[out] = p_[r];
    }
    ++out;
  }
  keys_.resize(out * width());
  p_.resize(out);
  indexed_ = false;
  index_.clear();
}

// Per-key ratio P[numerator] / denominator, clamped to [0, 1].
ProbTable conditional(const ProbTable& numerator, double denominator);

inline constexpr double kZeroCondition = 1e-15;

// Largest |a - b| over every key either table mentions, defaults included.
// A scalar compares as a constant against every row of the other table.
double max_abs_difference(const ProbTable& a, const ProbTable& b);

}  // namespace probcbma::ra
