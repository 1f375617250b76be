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

#include "probcbma/lifted/ucq.hpp"

#include <algorithm>
#include <functional>

namespace probcbma::lifted {

UCQ UCQ::single(Atom atom, std::vector<std::string> free_vars) {
  return UCQ{std::move(free_vars), {CQ{{Literal{std::move(atom), false}}}}};
}

Term substitute(const Substitution& s, const Term& t) {
  if (!t.is_var()) return t;
  auto it = s.find(t.name());
  return it == s.end() ? t : it->second;
}

Atom substitute(const Substitution& s, const Atom& a) {
  Atom out = a;
  for (auto& t : out.args) t = substitute(s, t);
  return out;
}

CQ substitute(const Substitution& s, const CQ& q) {
  CQ out = q;
  for (auto& l : out.literals) l.atom = substitute(s, l.atom);
  return out;
}

std::set<std::string> variables(const CQ& q) {
  std::set<std::string> out;
  for (const auto& l : q.literals) dsl::collect_variables(l.atom, out);
  return out;
}

std::set<std::string> variables(const UCQ& q) {
  std::set<std::string> out(q.free_vars.begin(), q.free_vars.end());
  for (const auto& d : q.disjuncts) {
    auto v = variables(d);
    out.insert(v.begin(), v.end());
  }
  return out;
}

std::string FreshNames::next() {
  for (;;) {
    std::string name = prefix_ + std::to_string(++counter_);
    if (used_.insert(name).second) return name;
  }
}

bool homomorphism(const CQ& from, const CQ& to, const std::set<std::string>& fixed) {
  Substitution h;
  const auto& lits = from.literals;
  std::function<bool(std::size_t)> search = [&](std::size_t i) -> bool {
    if (i == lits.size()) return true;
    const Literal& l = lits[i];
    for (const auto& target : to.literals) {
      if (target.negated != l.negated || target.atom.predicate != l.atom.predicate ||
          target.atom.arity() != l.atom.arity())
        continue;
      std::vector<std::string> added;
      bool ok = true;
      for (std::size_t k = 0; k < l.atom.arity() && ok; ++k) {
        const Term& src = l.atom.args[k];
        const Term& dst = target.atom.args[k];
        if (!src.is_var() || fixed.count(src.name())) {
          ok = src == dst;
          continue;
        }
        auto it = h.find(src.name());
        if (it != h.end()) {
          ok = it->second == dst;
        } else {
          h.emplace(src.name(), dst);
          added.push_back(src.name());
        }
      }
      if (ok && search(i + 1)) return true;
      for (const auto& name : added) h.erase(name);
    }
    return false;
  };
  return search(0);
}

bool normalize(CQ& q) {
  std::sort(q.literals.begin(), q.literals.end());
  q.literals.erase(std::unique(q.literals.begin(), q.literals.end()), q.literals.end());
  for (const auto& l : q.literals) {
    if (!l.negated) continue;
    Literal pos{l.atom, false};
    if (std::binary_search(q.literals.begin(), q.literals.end(), pos)) return false;
  }
  return true;
}

std::string to_string(const Literal& l) { return (l.negated ? "not " : "") + dsl::to_string(l.atom); }

std::string to_string(const CQ& q, const std::set<std::string>& free) {
  if (q.literals.empty()) return "true";
  std::set<std::string> ex;
  for (const auto& v : variables(q))
    if (!free.count(v)) ex.insert(v);
  std::string out;
  if (!ex.empty()) {
    out += "exists ";
    bool first = true;
    for (const auto& v : ex) {
      out += (first ? "" : ",") + v;
      first = false;
    }
    out += ". ";
  }
  for (std::size_t i = 0; i < q.literals.size(); ++i) {
    if (i) out += " & ";
    out += to_string(q.literals[i]);
  }
  return out;
}

std::string to_string(const UCQ& q) {
  std::set<std::string> free(q.free_vars.begin(), q.free_vars.end());
  if (q.disjuncts.empty()) return "false";
  std::string out;
  for (std::size_t i = 0; i < q.disjuncts.size(); ++i) {
    if (i) out += " | ";
    out += "(" + to_string(q.disjuncts[i], free) + ")";
  }
  return out;
}

}  // namespace probcbma::lifted
