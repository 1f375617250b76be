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

#include "probcbma/ra/table.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "probcbma/dsl/printer.hpp"
#include "probcbma/error.hpp"

namespace probcbma::ra {

ProbTable::ProbTable(std::vector<std::string> columns, double default_p)
    : columns_(std::move(columns)), default_p_(default_p) {}

ProbTable ProbTable::scalar(double p) { return ProbTable({}, p); }

std::optional<std::size_t> ProbTable::column_index(const std::string& name) const {
  auto it = std::find(columns_.begin(), columns_.end(), name);
  if (it == columns_.end()) return std::nullopt;
  return static_cast<std::size_t>(it - columns_.begin());
}

std::size_t ProbTable::hash(std::span<const Symbol> key) {
  std::size_t h = 0xcbf29ce484222325ull;
  for (Symbol s : key) h = (h ^ s.id()) * 0x100000001b3ull;
  return h;
}

void ProbTable::build_index() const {
  index_.clear();
  index_.reserve(size());
  for (std::size_t r = 0; r < size(); ++r) index_.emplace(hash(key(r)), static_cast<std::uint32_t>(r));
  indexed_ = true;
}

void ProbTable::add(std::span<const Symbol> key, double p) {
  if (key.size() != width()) throw SchemaError("key width does not match table columns");
  if (width() == 0) {
    default_p_ = p;
    return;
  }
  keys_.insert(keys_.end(), key.begin(), key.end());
  p_.push_back(p);
  if (indexed_) index_.emplace(hash(key), static_cast<std::uint32_t>(size() - 1));
}

void ProbTable::add(std::initializer_list<std::string_view> key, double p) {
  std::vector<Symbol> k;
  for (auto s : key) k.push_back(Symbol::intern(s));
  add(k, p);
}

std::optional<std::size_t> ProbTable::find(std::span<const Symbol> key) const {
  if (width() == 0 || key.size() != width()) return std::nullopt;
  if (!indexed_) build_index();
  auto [lo, hi] = index_.equal_range(hash(key));
  for (auto it = lo; it != hi; ++it) {
    auto k = this->key(it->second);
    if (std::equal(k.begin(), k.end(), key.begin())) return it->second;
  }
  return std::nullopt;
}

std::size_t ProbTable::upsert(std::span<const Symbol> key, double init) {
  if (auto r = find(key)) return *r;
  add(key, init);
  return size() - 1;
}

double ProbTable::lookup(std::span<const Symbol> key) const {
  auto r = find(key);
  return r ? p_[*r] : default_p_;
}

double ProbTable::lookup(std::initializer_list<std::string_view> key) const {
  std::vector<Symbol> k;
  for (auto s : key) {
    Symbol sym = Symbol::lookup(s);
    if (!sym.valid()) return default_p_;
    k.push_back(sym);
  }
  return lookup(k);
}

void ProbTable::reserve(std::size_t rows) {
  keys_.reserve(rows * width());
  p_.reserve(rows);
}

void ProbTable::sort_rows() {
  std::vector<std::uint32_t> order(size());
  std::iota(order.begin(), order.end(), 0u);
  std::sort(order.begin(), order.end(), [&](std::uint32_t a, std::uint32_t b) {
    auto ka = key(a), kb = key(b);
    return std::lexicographical_compare(ka.begin(), ka.end(), kb.begin(), kb.end(), SymbolTextLess{});
  });
  std::vector<Symbol> keys;
  std::vector<double> p;
  keys.reserve(keys_.size());
  p.reserve(p_.size());
  for (auto r : order) {
    auto k = key(r);
    keys.insert(keys.end(), k.begin(), k.end());
    p.push_back(p_[r]);
  }
  keys_ = std::move(keys);
  p_ = std::move(p);
  indexed_ = false;
  index_.clear();
}

std::string ProbTable::to_tsv() const {
  ProbTable sorted = *this;
  sorted.sort_rows();
  std::string out;
  for (const auto& c : columns_) out += c + "\t";
  out += "p\n";
  if (is_scalar()) return out + dsl::format_probability(default_p_) + "\n";
  for (std::size_t r = 0; r < sorted.size(); ++r) {
    for (Symbol s : sorted.key(r)) out += s.str() + "\t";
    out += dsl::format_probability(sorted.p(r)) + "\n";
  }
  return out;
}

namespace {

double clamp01(double x) { return std::clamp(x, 0.0, 1.0); }

}  // namespace

ProbTable conditional(const ProbTable& numerator, double denominator) {
  if (!(denominator > kZeroCondition))
    throw ZeroConditionError("the condition has probability " + std::to_string(denominator) +
                             "; no studies match it");
  ProbTable out(numerator.columns(), clamp01(numerator.default_p() / denominator));
  out.reserve(numerator.size());
  for (std::size_t r = 0; r < numerator.size(); ++r) out.add(numerator.key(r), clamp01(numerator.p(r) / denominator));
  return out;
}

double max_abs_difference(const ProbTable& a, const ProbTable& b) {
  if (a.is_scalar() != b.is_scalar()) {
    const ProbTable& t = a.is_scalar() ? b : a;
    const double c = a.is_scalar() ? a.value() : b.value();
    double worst = std::abs(t.default_p() - c);
    for (std::size_t r = 0; r < t.size(); ++r) worst = std::max(worst, std::abs(t.p(r) - c));
    return worst;
  }
  if (a.columns() != b.columns()) throw SchemaError("cannot compare tables over different columns");
  double worst = std::abs(a.default_p() - b.default_p());
  for (std::size_t r = 0; r < a.size(); ++r) worst = std::max(worst, std::abs(a.p(r) - b.lookup(a.key(r))));
  for (std::size_t r = 0; r < b.size(); ++r) worst = std::max(worst, std::abs(b.p(r) - a.lookup(b.key(r))));
  return worst;
}

}  // namespace probcbma::ra
