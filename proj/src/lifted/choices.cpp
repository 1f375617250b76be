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

#include "probcbma/lifted/choices.hpp"

#include "probcbma/error.hpp"

namespace probcbma::lifted {

bool is_choice(const Schema& schema, const std::string& relation) {
  auto it = schema.find(relation);
  return it != schema.end() && it->second.semantics == Semantics::Choice;
}

namespace {

// Returns false when the CQ is unsatisfiable.
bool unify_choice_atoms(CQ& q, const Schema& schema, const std::set<std::string>& bound) {
  for (;;) {
    if (!normalize(q)) return false;
    const Literal* first = nullptr;
    const Literal* second = nullptr;
    for (const auto& l : q.literals) {
      if (!is_choice(schema, l.atom.predicate)) continue;
      if (l.negated)
        throw UnsupportedQuery("negated choice atom " + dsl::to_string(l.atom) + " is not supported");
      for (const auto& m : q.literals)
        if (&m != &l && !m.negated && m.atom.predicate == l.atom.predicate) {
          first = &l;
          second = &m;
          break;
        }
      if (first) break;
    }
    if (!first) return true;

    Substitution s;
    auto walk = [&](Term t) {
      while (t.is_var()) {
        auto it = s.find(t.name());
        if (it == s.end()) break;
        t = it->second;
      }
      return t;
    };
    for (std::size_t k = 0; k < first->atom.arity(); ++k) {
      Term a = walk(first->atom.args[k]);
      Term b = walk(second->atom.args[k]);
      if (a == b) continue;
      bool a_free = a.is_var() && !bound.count(a.name());
      bool b_free = b.is_var() && !bound.count(b.name());
      if (a_free) {
        s[a.name()] = b;
      } else if (b_free) {
        s[b.name()] = a;
      } else if (a.is_constant() && b.is_constant()) {
        return false;
      } else {
        throw UnsupportedQuery("choice atoms " + dsl::to_string(first->atom) + " and " +
                               dsl::to_string(second->atom) + " coincide only if " + dsl::to_string(a) + " = " +
                               dsl::to_string(b));
      }
    }
    Substitution resolved;
    for (const auto& [name, t] : s) resolved.emplace(name, walk(t));
    q = substitute(resolved, q);
  }
}

}  // namespace

UCQ rewrite_choices(const UCQ& q, const Schema& schema, const std::set<std::string>& bound) {
  UCQ out;
  out.free_vars = q.free_vars;
  std::set<std::string> fixed = bound;
  fixed.insert(q.free_vars.begin(), q.free_vars.end());
  for (const auto& cq : q.disjuncts) {
    CQ c = cq;
    if (unify_choice_atoms(c, schema, fixed)) out.disjuncts.push_back(std::move(c));
  }
  return out;
}

UCQ rewrite_choices(const UCQ& q, const Schema& schema) { return rewrite_choices(q, schema, {}); }

}  // namespace probcbma::lifted
