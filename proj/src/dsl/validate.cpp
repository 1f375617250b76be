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

#include "probcbma/dsl/validate.hpp"

#include <algorithm>
#include <functional>

#include "probcbma/error.hpp"

namespace probcbma::dsl {

const std::vector<const DeterministicRule*>& ValidatedProgram::rules_for(const std::string& predicate) const {
  static const std::vector<const DeterministicRule*> none;
  auto it = rules_by_head_.find(predicate);
  return it == rules_by_head_.end() ? none : it->second;
}

std::optional<std::size_t> ValidatedProgram::arity(const std::string& predicate) const {
  auto it = arity_.find(predicate);
  if (it == arity_.end()) return std::nullopt;
  return it->second;
}

ValidatedProgram validate_program(Program program) {
  ValidatedProgram v;
  v.program_ = std::make_shared<const Program>(std::move(program));
  const Program& p = *v.program_;

  auto note_arity = [&](const Atom& a) {
    auto [it, inserted] = v.arity_.emplace(a.predicate, a.arity());
    if (!inserted && it->second != a.arity())
      throw ArityError(a.predicate + " used with arity " + std::to_string(a.arity()) + " but elsewhere with arity " +
                           std::to_string(it->second),
                       a.loc.line, a.loc.column);
  };

  std::set<std::string> extensional;
  for (const auto& b : p.facts) {
    extensional.insert(b.relation);
    v.arity_.emplace(b.relation, b.arity);
  }
  for (const auto& b : p.choices) {
    if (extensional.count(b.relation))
      throw ValidationError(b.relation + " is declared both as a choice and as independent facts");
    extensional.insert(b.relation);
    v.arity_.emplace(b.relation, b.arity);
    double sum = 0;
    for (const auto& t : b.tuples) {
      if (!(t.p >= 0.0 && t.p <= 1.0))
        throw ProbabilityRangeError("probability outside [0, 1] in choice " + b.relation, t.loc.line, t.loc.column);
      sum += t.p;
    }
    if (sum > 1.0 + kChoiceSumEpsilon) throw ChoiceSumError(b.relation, sum);
  }
  for (const auto& b : p.facts)
    for (const auto& t : b.tuples)
      if (!(t.p >= 0.0 && t.p <= 1.0))
        throw ProbabilityRangeError("probability outside [0, 1] in " + b.relation, t.loc.line, t.loc.column);

  for (const auto& rule : p.rules) {
    note_arity(rule.head);
    if (extensional.count(rule.head.predicate))
      throw ValidationError("line " + std::to_string(rule.loc.line) + ": " + rule.head.predicate +
                            " has both facts and rules");
    std::set<std::string> bound;
    for (const auto& lit : rule.body) {
      note_arity(lit.atom);
      if (lit.negated)
        throw ValidationError("line " + std::to_string(lit.atom.loc.line) +
                              ": negation is not allowed in rule bodies (" + to_string(lit.atom) + ")");
      collect_variables(lit.atom, bound);
    }
    if (rule.body.empty())
      throw ValidationError("line " + std::to_string(rule.loc.line) + ": rule for " + rule.head.predicate +
                            " has an empty body");
    for (const auto& var : variables(rule.head))
      if (!bound.count(var)) throw UnsafeVariableError(var, rule.head.predicate, rule.loc.line);
    v.rules_by_head_[rule.head.predicate].push_back(&rule);
  }

  // Depth-first search over intensional dependencies; a back edge is a cycle.
  enum class Mark { None, Active, Done };
  std::map<std::string, Mark> mark;
  std::vector<std::string> stack;
  std::function<void(const std::string&)> visit = [&](const std::string& pred) {
    Mark& m = mark[pred];
    if (m == Mark::Done) return;
    if (m == Mark::Active) {
      auto it = std::find(stack.begin(), stack.end(), pred);
      throw RecursionError(std::vector<std::string>(it, stack.end()));
    }
    m = Mark::Active;
    stack.push_back(pred);
    std::set<std::string> deps;
    for (const auto* rule : v.rules_by_head_[pred])
      for (const auto& lit : rule->body)
        if (v.rules_by_head_.count(lit.atom.predicate)) deps.insert(lit.atom.predicate);
    for (const auto& d : deps) visit(d);
    stack.pop_back();
    mark[pred] = Mark::Done;
    v.order_.push_back(pred);
  };
  for (const auto& [pred, rules] : v.rules_by_head_) visit(pred);
  return v;
}

}  // namespace probcbma::dsl
