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

#include "probcbma/probdb.hpp"

#include <algorithm>
#include <fstream>
#include <mutex>
#include <numeric>
#include <sstream>
#include <unordered_map>

#include "probcbma/error.hpp"

namespace probcbma {

struct ProbRelation::Cache {
  struct ColumnIndex {
    std::unordered_map<std::uint32_t, std::pair<std::uint32_t, std::uint32_t>> ranges;
    std::vector<std::uint32_t> rows;
  };
  std::vector<std::once_flag> once;
  std::vector<ColumnIndex> columns;
  explicit Cache(std::size_t arity) : once(arity), columns(arity) {}
};

ProbRelation::ProbRelation(std::string name, std::size_t arity, Semantics semantics)
    : name_(std::move(name)), arity_(arity), semantics_(semantics), cache_(std::make_unique<Cache>(arity)) {}

ProbRelation::ProbRelation(const ProbRelation& other)
    : name_(other.name_),
      arity_(other.arity_),
      semantics_(other.semantics_),
      args_(other.args_),
      probs_(other.probs_),
      nullary_(other.nullary_),
      cache_(std::make_unique<Cache>(other.arity_)),
      key_hash_(other.key_hash_) {}

ProbRelation::ProbRelation(ProbRelation&&) noexcept = default;

ProbRelation& ProbRelation::operator=(ProbRelation other) {
  std::swap(name_, other.name_);
  std::swap(arity_, other.arity_);
  std::swap(semantics_, other.semantics_);
  std::swap(args_, other.args_);
  std::swap(probs_, other.probs_);
  std::swap(nullary_, other.nullary_);
  std::swap(cache_, other.cache_);
  std::swap(key_hash_, other.key_hash_);
  return *this;
}

ProbRelation::~ProbRelation() = default;

ProbRelation ProbRelation::from_rows(std::string name, std::size_t arity, std::vector<Symbol> args,
                                     std::vector<double> probs, Semantics semantics) {
  if (arity == 0) throw SchemaError("bulk construction needs arity >= 1");
  if (args.size() % arity != 0) throw SchemaError("argument count is not a multiple of the arity of " + name);
  ProbRelation r(std::move(name), arity, semantics);
  r.args_ = std::move(args);
  if (!probs.empty()) {
    if (probs.size() != r.size()) throw SchemaError("probability count does not match rows of " + r.name_);
    for (double p : probs)
      if (!(p >= 0.0 && p <= 1.0)) throw Error("probability outside [0, 1] in " + r.name_);
    r.probs_ = std::move(probs);
  }
  r.check_unique();
  if (r.is_choice() && r.total_probability() > 1.0 + kProbabilityEpsilon)
    throw ChoiceSumError(r.name_, r.total_probability());
  return r;
}

void ProbRelation::check_unique() const {
  std::vector<std::uint32_t> order(size());
  std::iota(order.begin(), order.end(), 0u);
  auto less = [&](std::uint32_t a, std::uint32_t b) {
    auto ra = row(a), rb = row(b);
    return std::lexicographical_compare(ra.begin(), ra.end(), rb.begin(), rb.end(),
                                        [](Symbol x, Symbol y) { return x.id() < y.id(); });
  };
  std::sort(order.begin(), order.end(), less);
  for (std::size_t i = 1; i < order.size(); ++i)
    if (!less(order[i - 1], order[i])) {
      std::string key;
      for (Symbol s : row(order[i])) key += (key.empty() ? "" : ", ") + s.str();
      throw Error("duplicate tuple (" + key + ") in " + name_);
    }
}

double ProbRelation::total_probability() const {
  double sum = 0, c = 0;
  for (std::size_t i = 0; i < size(); ++i) {
    double p = prob(i), t = sum + p;
    c += std::abs(sum) >= std::abs(p) ? (sum - t) + p : (p - t) + sum;
    sum = t;
  }
  return sum + c;
}

void ProbRelation::add(std::span<const Symbol> args, double p) {
  if (args.size() != arity_)
    throw SchemaError(name_ + " expects " + std::to_string(arity_) + " arguments, got " + std::to_string(args.size()));
  if (!(p >= 0.0 && p <= 1.0)) throw Error("probability " + std::to_string(p) + " outside [0, 1] in " + name_);
  auto hash_of = [](std::span<const Symbol> key) {
    std::size_t h = 0x9e3779b97f4a7c15ull;
    for (Symbol s : key) h = (h ^ s.id()) * 0x100000001b3ull;
    return h;
  };
  if (key_hash_.size() != size()) {
    key_hash_.clear();
    for (std::size_t i = 0; i < size(); ++i) key_hash_.emplace(hash_of(row(i)), static_cast<std::uint32_t>(i));
  }
  const std::size_t h = hash_of(args);
  auto [lo, hi] = key_hash_.equal_range(h);
  bool duplicate = false;
  for (auto it = lo; it != hi && !duplicate; ++it) {
    auto r = row(it->second);
    duplicate = arity_ == 0 || std::equal(r.begin(), r.end(), args.begin());
  }
  if (duplicate) {
    std::string key;
    for (Symbol s : args) key += (key.empty() ? "" : ", ") + s.str();
    throw Error("duplicate tuple (" + key + ") in " + name_);
  }
  if (is_choice() && total_probability() + p > 1.0 + kProbabilityEpsilon)
    throw ChoiceSumError(name_, total_probability() + p);
  if (p != 1.0 || !probs_.empty()) {
    probs_.resize(size(), 1.0);
    probs_.push_back(p);
  }
  if (arity_ == 0) nullary_ = true;
  args_.insert(args_.end(), args.begin(), args.end());
  key_hash_.emplace(h, static_cast<std::uint32_t>(size() - 1));
  cache_ = std::make_unique<Cache>(arity_);
}

void ProbRelation::add(std::initializer_list<std::string_view> args, double p) {
  std::vector<Symbol> syms;
  for (auto a : args) syms.push_back(Symbol::intern(a));
  add(syms, p);
}

std::span<const std::uint32_t> ProbRelation::rows_with(std::size_t column, Symbol value) const {
  auto& idx = cache_->columns[column];
  std::call_once(cache_->once[column], [&] {
    const std::size_t n = size();
    std::vector<std::uint32_t> counts;
    std::unordered_map<std::uint32_t, std::uint32_t> slot;
    std::vector<std::uint32_t> key_of_row(n);
    for (std::size_t i = 0; i < n; ++i) {
      auto id = args_[i * arity_ + column].id();
      auto [it, inserted] = slot.emplace(id, static_cast<std::uint32_t>(counts.size()));
      if (inserted) counts.push_back(0);
      ++counts[it->second];
      key_of_row[i] = it->second;
    }
    std::vector<std::uint32_t> start(counts.size() + 1, 0);
    for (std::size_t k = 0; k < counts.size(); ++k) start[k + 1] = start[k] + counts[k];
    idx.rows.resize(n);
    std::vector<std::uint32_t> fill(start.begin(), start.end() - 1);
    for (std::size_t i = 0; i < n; ++i) idx.rows[fill[key_of_row[i]]++] = static_cast<std::uint32_t>(i);
    idx.ranges.reserve(slot.size());
    for (auto [id, k] : slot) idx.ranges.emplace(id, std::make_pair(start[k], start[k + 1]));
  });
  auto it = idx.ranges.find(value.id());
  if (it == idx.ranges.end()) return {};
  return {idx.rows.data() + it->second.first, it->second.second - it->second.first};
}

std::optional<std::size_t> ProbRelation::find(std::span<const Symbol> args) const {
  if (args.size() != arity_) return std::nullopt;
  if (arity_ == 0) return size() ? std::optional<std::size_t>(0) : std::nullopt;
  for (auto r : rows_with(0, args[0])) {
    auto row_args = row(r);
    if (std::equal(row_args.begin(), row_args.end(), args.begin())) return r;
  }
  return std::nullopt;
}

bool operator==(const ProbRelation& a, const ProbRelation& b) {
  if (a.name_ != b.name_ || a.arity_ != b.arity_ || a.semantics_ != b.semantics_ || a.size() != b.size())
    return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    auto j = b.find(a.row(i));
    if (!j || b.prob(*j) != a.prob(i)) return false;
  }
  return true;
}

void ProbDatabase::add(ProbRelation relation) { add(std::make_shared<const ProbRelation>(std::move(relation))); }

void ProbDatabase::add(std::shared_ptr<const ProbRelation> relation) {
  const std::string name = relation->name();
  if (!relations_.emplace(name, std::move(relation)).second) throw SchemaError("relation " + name + " already exists");
}

void ProbDatabase::put(ProbRelation relation) {
  const std::string name = relation.name();
  relations_[name] = std::make_shared<const ProbRelation>(std::move(relation));
}

const ProbRelation* ProbDatabase::find(const std::string& name) const {
  auto it = relations_.find(name);
  return it == relations_.end() ? nullptr : it->second.get();
}

const ProbRelation& ProbDatabase::at(const std::string& name) const {
  if (const auto* r = find(name)) return *r;
  throw SchemaError("unknown relation " + name);
}

std::size_t ProbDatabase::tuple_count() const {
  std::size_t n = 0;
  for (const auto& [name, r] : relations_) n += r->size();
  return n;
}

Schema ProbDatabase::schema() const {
  Schema s;
  for (const auto& [name, r] : relations_) s[name] = {r->arity(), r->semantics()};
  return s;
}

namespace {

std::vector<std::string> split_tabs(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (;;) {
    auto tab = line.find('\t', start);
    out.push_back(line.substr(start, tab == std::string::npos ? std::string::npos : tab - start));
    if (tab == std::string::npos) return out;
    start = tab + 1;
  }
}

}  // namespace

ProbRelation load_tsv(const std::string& relation, const std::string& path, const std::vector<std::string>& columns,
                      const std::optional<std::string>& prob_column) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path);
  std::string line;
  if (!std::getline(in, line)) throw DataError("missing header row", 1, 0, path);
  if (!line.empty() && line.back() == '\r') line.pop_back();
  auto header = split_tabs(line);
  auto position = [&](const std::string& name) -> std::optional<std::size_t> {
    auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) return std::nullopt;
    return static_cast<std::size_t>(it - header.begin());
  };
  std::vector<std::size_t> pos;
  for (const auto& c : columns) {
    auto p = position(c);
    if (!p) throw DataError("header lacks column '" + c + "'", 1, 0, path);
    pos.push_back(*p);
  }
  std::optional<std::size_t> ppos = prob_column ? position(*prob_column) : std::nullopt;

  std::vector<Symbol> args;
  std::vector<double> probs;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto fields = split_tabs(line);
    if (fields.size() != header.size())
      throw DataError("expected " + std::to_string(header.size()) + " fields, found " + std::to_string(fields.size()),
                      lineno, 0, path);
    for (auto p : pos) args.push_back(Symbol::intern(fields[p]));
    if (ppos) {
      const std::string& text = fields[*ppos];
      double p = 0;
      std::size_t used = 0;
      try {
        p = std::stod(text, &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used != text.size() || text.empty()) throw DataError("malformed probability '" + text + "'", lineno, 0, path);
      if (!(p >= 0.0 && p <= 1.0))
        throw DataError("probability " + text + " outside [0, 1]", lineno, 0, path);
      probs.push_back(p);
    }
  }
  if (columns.empty()) throw SchemaError("relation " + relation + " needs at least one column");
  try {
    return ProbRelation::from_rows(relation, columns.size(), std::move(args), std::move(probs));
  } catch (const Error& e) {
    throw DataError(e.what(), lineno, 0, path);
  }
}

ProbRelation make_equiprobable_choice(const std::string& relation, const std::vector<Symbol>& elements) {
  if (elements.empty()) throw Error("equiprobable choice " + relation + " needs at least one element");
  std::vector<double> probs(elements.size(), 1.0 / static_cast<double>(elements.size()));
  return ProbRelation::from_rows(relation, 1, elements, std::move(probs), Semantics::Choice);
}

ProbDatabase database_from_program(const dsl::ValidatedProgram& program) {
  ProbDatabase db;
  for (const auto& block : program.program().facts) {
    ProbRelation r(block.relation, block.arity);
    for (const auto& t : block.tuples) r.add(t.args, t.p);
    db.add(std::move(r));
  }
  for (const auto& block : program.program().choices) {
    ProbRelation r(block.relation, block.arity, Semantics::Choice);
    for (const auto& t : block.tuples) r.add(t.args, t.p);
    db.add(std::move(r));
  }
  return db;
}

}  // namespace probcbma
