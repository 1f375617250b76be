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
#include <optional>
#include <set>
#include <string>
#include <variant>
#include <vector>

#include "probcbma/symbol.hpp"

namespace probcbma::dsl {

struct SourceLoc {
  int line = 0;
  int column = 0;
};

struct Variable {
  std::string name;
  friend bool operator==(const Variable&, const Variable&) = default;
};

struct Constant {
  Symbol value;
  friend bool operator==(const Constant&, const Constant&) = default;
};

class Term {
 public:
  Term() = default;
  static Term var(std::string name) { return Term(Variable{std::move(name)}); }
  static Term constant(Symbol value) { return Term(Constant{value}); }
  static Term constant(std::string_view text) { return Term(Constant{Symbol::intern(text)}); }

  bool is_var() const { return std::holds_alternative<Variable>(value_); }
  bool is_constant() const { return !is_var(); }
  const std::string& name() const { return std::get<Variable>(value_).name; }
  Symbol value() const { return std::get<Constant>(value_).value; }

  friend bool operator==(const Term&, const Term&) = default;
  // Variables sort before constants; constants by text.
  friend bool operator<(const Term& a, const Term& b);

 private:
  explicit Term(std::variant<Variable, Constant> v) : value_(std::move(v)) {}
  std::variant<Variable, Constant> value_;
};

struct Atom {
  std::string predicate;
  std::vector<Term> args;
  SourceLoc loc;

  std::size_t arity() const { return args.size(); }
  bool is_ground() const;
  // Structural equality; source locations are ignored.
  friend bool operator==(const Atom& a, const Atom& b) { return a.predicate == b.predicate && a.args == b.args; }
  friend bool operator<(const Atom& a, const Atom& b);
};

struct BodyLiteral {
  Atom atom;
  bool negated = false;
};

struct DeterministicRule {
  Atom head;
  std::vector<BodyLiteral> body;
  SourceLoc loc;
};

struct ProbTuple {
  std::vector<Symbol> args;
  double p = 1.0;
  SourceLoc loc;
};

// Independent probabilistic facts of one relation; deterministic facts land here with p = 1.
struct ProbabilisticFactBlock {
  std::string relation;
  std::size_t arity = 0;
  std::vector<ProbTuple> tuples;
};

// One CP-Logic choice `p1::H1; ...; pn::Hn.`: at most one head holds per world.
struct ProbabilisticChoiceBlock {
  std::string relation;
  std::size_t arity = 0;
  std::vector<ProbTuple> tuples;
  SourceLoc loc;
};

struct Program {
  std::vector<DeterministicRule> rules;
  std::vector<ProbabilisticFactBlock> facts;
  std::vector<ProbabilisticChoiceBlock> choices;

  const ProbabilisticFactBlock* fact_block(const std::string& relation) const;
  const ProbabilisticChoiceBlock* choice_block(const std::string& relation) const;
};

// Boolean condition over atoms. Leaves are atoms; `True` is the empty condition.
struct Formula {
  enum class Kind { True, Atom, Not, And, Or };

  Kind kind = Kind::True;
  dsl::Atom atom;
  std::vector<Formula> children;

  static Formula truth() { return {}; }
  static Formula leaf(dsl::Atom a) { return Formula{Kind::Atom, std::move(a), {}}; }
  static Formula negation(Formula f);
  static Formula conjunction(std::vector<Formula> parts);
  static Formula disjunction(std::vector<Formula> parts);
};

enum class QueryKind { Succ, Conditional };

struct Query {
  QueryKind kind = QueryKind::Succ;
  Atom target;
  std::optional<Formula> condition;
};

std::string to_string(const Term& t);
std::string to_string(const Atom& a);
std::string to_string(const Formula& f);

// Variables of an atom in order of first occurrence.
std::vector<std::string> variables(const Atom& a);
void collect_variables(const Atom& a, std::set<std::string>& out);

// Quotes a constant when it would not re-read as a bare identifier or number.
std::string constant_text(Symbol s);
bool is_bare_identifier(std::string_view text);
bool is_number_literal(std::string_view text);

}  // namespace probcbma::dsl
