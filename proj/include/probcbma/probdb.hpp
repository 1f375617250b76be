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

#include <cstddef>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "probcbma/dsl/validate.hpp"
#include "probcbma/symbol.hpp"

namespace probcbma {

enum class Semantics { Independent, Choice };

inline constexpr double kProbabilityEpsilon = 1e-9;

// A relation of constant tuples. Independent tuples are separate Bernoulli
// events; the tuples of a Choice relation are mutually exclusive and form a
// single group.
class ProbRelation {
 public:
  ProbRelation(std::string name, std::size_t arity, Semantics semantics = Semantics::Independent);
  ProbRelation(const ProbRelation& other);
  ProbRelation(ProbRelation&&) noexcept;
  ProbRelation& operator=(ProbRelation other);
  ~ProbRelation();

  // Takes row-major `args` (size() == rows * arity). Empty `probs` means every tuple has p = 1.
  static ProbRelation from_rows(std::string name, std::size_t arity, std::vector<Symbol> args,
                                std::vector<double> probs, Semantics semantics = Semantics::Independent);

  const std::string& name() const { return name_; }
  std::size_t arity() const { return arity_; }
  Semantics semantics() const { return semantics_; }
  bool is_choice() const { return semantics_ == Semantics::Choice; }
  std::size_t size() const { return arity_ == 0 ? (nullary_ ? 1 : 0) : args_.size() / arity_; }
  bool deterministic() const { return probs_.empty(); }

  std::span<const Symbol> row(std::size_t i) const { return {args_.data() + i * arity_, arity_}; }
  double prob(std::size_t i) const { return probs_.empty() ? 1.0 : probs_[i]; }
  double total_probability() const;

  // Appends a tuple; throws on a duplicate key or a probability outside [0, 1].
  void add(std::span<const Symbol> args, double p = 1.0);
  void add(std::initializer_list<std::string_view> args, double p = 1.0);

  // Rows whose `column` equals `value`, as row numbers. Indexes are built on first use.
  std::span<const std::uint32_t> rows_with(std::size_t column, Symbol value) const;
  std::optional<std::size_t> find(std::span<const Symbol> args) const;

  // Equal names, semantics, and the same set of (tuple, p) pairs.
  friend bool operator==(const ProbRelation& a, const ProbRelation& b);

 private:
  struct Cache;
  void check_unique() const;

  std::string name_;
  std::size_t arity_;
  Semantics semantics_;
  std::vector<Symbol> args_;
  std::vector<double> probs_;
  bool nullary_ = false;
  std::unique_ptr<Cache> cache_;
  // Tuple hashes, maintained by add() for incremental duplicate detection.
  std::unordered_multimap<std::size_t, std::uint32_t> key_hash_;
};

struct RelationInfo {
  std::size_t arity = 0;
  Semantics semantics = Semantics::Independent;
};

using Schema = std::map<std::string, RelationInfo>;

class ProbDatabase {
 public:
  void add(ProbRelation relation);
  void add(std::shared_ptr<const ProbRelation> relation);
  // Replaces an existing relation of the same name.
  void put(ProbRelation relation);

  const ProbRelation* find(const std::string& name) const;
  const ProbRelation& at(const std::string& name) const;
  bool contains(const std::string& name) const { return relations_.count(name) > 0; }
  std::size_t tuple_count() const;
  Schema schema() const;
  const std::map<std::string, std::shared_ptr<const ProbRelation>>& relations() const { return relations_; }

 private:
  std::map<std::string, std::shared_ptr<const ProbRelation>> relations_;
};

// Reads a tab-separated file with a header row. `columns` names the header
// fields forming the tuple, in order; `prob_column` (usually "p") supplies
// the probability when present in the header.
ProbRelation load_tsv(const std::string& relation, const std::string& path, const std::vector<std::string>& columns,
                      const std::optional<std::string>& prob_column = std::string("p"));

ProbRelation make_equiprobable_choice(const std::string& relation, const std::vector<Symbol>& elements);

// Relations declared by the facts and choices of a program.
ProbDatabase database_from_program(const dsl::ValidatedProgram& program);

}  // namespace probcbma
