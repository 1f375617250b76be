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

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "probcbma/dsl/ast.hpp"

namespace probcbma::lifted {

using dsl::Atom;
using dsl::Term;

struct Literal {
  Atom atom;
  bool negated = false;

  friend bool operator==(const Literal& a, const Literal& b) { return a.negated == b.negated && a.atom == b.atom; }
  friend bool operator<(const Literal& a, const Literal& b) {
    if (a.negated != b.negated) return b.negated;
    return a.atom < b.atom;
  }
};

// Conjunction of literals. Variables not listed as free by the enclosing UCQ
// (or bound by an enclosing plan operator) are existentially quantified.
struct CQ {
  std::vector<Literal> literals;

  bool empty() const { return literals.empty(); }
};

// Disjunction of CQs over shared free variables. No disjuncts means false;
// a disjunct with no literals means true.
struct UCQ {
  std::vector<std::string> free_vars;
  std::vector<CQ> disjuncts;

  static UCQ truth() { return UCQ{{}, {CQ{}}}; }
  static UCQ falsity() { return UCQ{}; }
  static UCQ single(Atom atom, std::vector<std::string> free_vars = {});
};

using Substitution = std::map<std::string, Term>;

Term substitute(const Substitution& s, const Term& t);
Atom substitute(const Substitution& s, const Atom& a);
CQ substitute(const Substitution& s, const CQ& q);

std::set<std::string> variables(const CQ& q);
std::set<std::string> variables(const UCQ& q);

// Generates `<prefix>1`, `<prefix>2`, ... skipping reserved names.
class FreshNames {
 public:
  explicit FreshNames(std::string prefix = "_v") : prefix_(std::move(prefix)) {}
  std::string next();
  void reserve(const std::set<std::string>& used) { used_.insert(used.begin(), used.end()); }

 private:
  std::string prefix_;
  std::set<std::string> used_;
  int counter_ = 0;
};

// Maps every variable of `from` outside `fixed` to terms of `to` so that each
// literal of `from` becomes a literal of `to`. Its existence means to ⊨ from.
bool homomorphism(const CQ& from, const CQ& to, const std::set<std::string>& fixed);

// Sorts and deduplicates literals; returns false when the CQ contains a literal
// together with its negation.
bool normalize(CQ& q);

std::string to_string(const Literal& l);
std::string to_string(const CQ& q, const std::set<std::string>& free = {});
std::string to_string(const UCQ& q);

}  // namespace probcbma::lifted
