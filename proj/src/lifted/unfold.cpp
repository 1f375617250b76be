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

#include "probcbma/lifted/unfold.hpp"

#include <algorithm>

#include "probcbma/error.hpp"

namespace probcbma::lifted {
namespace {

constexpr std::size_t kMaxDisjuncts = 4096;

using dsl::Formula;

Formula nnf(const Formula& f, bool negate) {
  switch (f.kind) {
    case Formula::Kind::True:
      return negate ? Formula::disjunction({}) : f;
    case Formula::Kind::Atom: {
      Formula leaf = f;
      return negate ? Formula::negation(leaf) : leaf;
    }
    case Formula::Kind::Not:
      return nnf(f.children.front(), !negate);
    case Formula::Kind::And:
    case Formula::Kind::Or: {
      std::vector<Formula> parts;
      for (const auto& c : f.children) parts.push_back(nnf(c, negate));
      bool conj = (f.kind == Formula::Kind::And) != negate;
      Formula out;
      out.kind = conj ? Formula::Kind::And : Formula::Kind::Or;
      out.children = std::move(parts);
      return out;
    }
  }
  return f;
}

std::vector<std::vector<Literal>> dnf_of_nnf(const Formula& f) {
  switch (f.kind) {
    case Formula::Kind::True:
      return {{}};
    case Formula::Kind::Atom:
      return {{Literal{f.atom, false}}};
    case Formula::Kind::Not:
      return {{Literal{f.children.front().atom, true}}};
    case Formula::Kind::Or: {
      std::vector<std::vector<Literal>> out;
      for (const auto& c : f.children) {
        auto part = dnf_of_nnf(c);
        out.insert(out.end(), part.begin(), part.end());
        if (out.size() > kMaxDisjuncts) throw UnsupportedQuery("condition expands to too many disjuncts");
      }
      return out;
    }
    case Formula::Kind::And: {
      std::vector<std::vector<Literal>> out{{}};
      for (const auto& c : f.children) {
        auto part = dnf_of_nnf(c);
        std::vector<std::vector<Literal>> next;
        for (const auto& a : out)
          for (const auto& b : part) {
            auto merged = a;
            merged.insert(merged.end(), b.begin(), b.end());
            next.push_back(std::move(merged));
            if (next.size() > kMaxDisjuncts) throw UnsupportedQuery("condition expands to too many disjuncts");
          }
        out = std::move(next);
      }
      return out;
    }
  }
  return {};
}

class Unfolder {
 public:
  Unfolder(const dsl::ValidatedProgram& program, const Schema& schema, std::set<std::string> free)
      : program_(program), schema_(schema), free_(std::move(free)) {
    names_.reserve(free_);
  }

  void reserve(const std::set<std::string>& used) { names_.reserve(used); }
  std::string fresh() { return names_.next(); }

  // Expands every positive intensional literal; negated literals are carried along untouched.
  std::vector<CQ> expand_positive(const CQ& q) {
    auto it = std::find_if(q.literals.begin(), q.literals.end(), [&](const Literal& l) {
      return !l.negated && program_.is_intensional(l.atom.predicate);
    });
    if (it == q.literals.end()) return {q};
    const Atom goal = it->atom;
    CQ rest = q;
    rest.literals.erase(rest.literals.begin() + (it - q.literals.begin()));
    std::vector<CQ> out;
    for (const auto* rule : program_.rules_for(goal.predicate)) {
      Substitution rename;
      for (const auto& v : dsl::variables(rule->head)) rename.emplace(v, Term::var(fresh()));
      for (const auto& lit : rule->body)
        for (const auto& v : dsl::variables(lit.atom))
          if (!rename.count(v)) rename.emplace(v, Term::var(fresh()));
      Atom head = substitute(rename, rule->head);
      Substitution mgu;
      if (!unify(head, goal, mgu)) continue;
      CQ expanded = rest;
      for (const auto& lit : rule->body) expanded.literals.push_back(Literal{substitute(rename, lit.atom), false});
      expanded = resolve(mgu, expanded);
      for (auto& q2 : expand_positive(expanded)) {
        out.push_back(std::move(q2));
        if (out.size() > kMaxDisjuncts) throw UnsupportedQuery("query expands to too many disjuncts");
      }
    }
    return out;
  }

  // Resolves negated intensional literals of a fully positive-expanded CQ.
  std::vector<CQ> expand_negative(const CQ& q) {
    auto it = std::find_if(q.literals.begin(), q.literals.end(), [&](const Literal& l) {
      return l.negated && program_.is_intensional(l.atom.predicate);
    });
    if (it == q.literals.end()) return {q};
    const Atom goal = it->atom;
    CQ host = q;
    host.literals.erase(host.literals.begin() + (it - q.literals.begin()));
    std::set<std::string> host_vars = variables(host);
    dsl::collect_variables(goal, host_vars);

    // not (psi_1 | ... | psi_k) == (not psi_1) & ... & (not psi_k); each not psi_j is a disjunction of literals.
    std::vector<std::vector<Literal>> factors;
    for (const auto& psi : expand_positive(CQ{{Literal{goal, false}}})) {
      auto lits = negate_under_choice(host, host_vars, psi, goal);
      if (!lits) continue;
      if (lits->empty()) return {};
      factors.push_back(std::move(*lits));
    }
    std::vector<CQ> out{host};
    for (const auto& factor : factors) {
      std::vector<CQ> next;
      for (const auto& base : out)
        for (const auto& l : factor) {
          CQ c = base;
          c.literals.push_back(l);
          next.push_back(std::move(c));
          if (next.size() > kMaxDisjuncts) throw UnsupportedQuery("query expands to too many disjuncts");
        }
      out = std::move(next);
    }
    std::vector<CQ> result;
    for (const auto& c : out)
      for (auto& r : expand_negative(c)) result.push_back(std::move(r));
    return result;
  }

 private:
  static Term walk(const Substitution& s, Term t) {
    while (t.is_var()) {
      auto it = s.find(t.name());
      if (it == s.end()) break;
      t = it->second;
    }
    return t;
  }

  CQ resolve(const Substitution& s, const CQ& q) const {
    CQ out = q;
    for (auto& l : out.literals)
      for (auto& t : l.atom.args) t = walk(s, t);
    return out;
  }

  // Unifies a renamed rule head with a goal atom. Returns false when the rule
  // cannot apply; throws when the only unifier would bind a free variable.
  bool unify(const Atom& head, const Atom& goal, Substitution& s) {
    if (head.arity() != goal.arity()) return false;
    for (std::size_t i = 0; i < head.arity(); ++i) {
      Term a = walk(s, head.args[i]);
      Term b = walk(s, goal.args[i]);
      if (a == b) continue;
      if (a.is_var() && !free_.count(a.name()) && is_local(a.name())) {
        s[a.name()] = b;
      } else if (b.is_var() && !free_.count(b.name())) {
        s[b.name()] = a;
      } else if (a.is_var() && !free_.count(a.name())) {
        s[a.name()] = b;
      } else if (a.is_constant() && b.is_constant()) {
        return false;
      } else {
        throw UnsupportedQuery("unfolding " + dsl::to_string(goal) + " would bind a free variable to " +
                               dsl::to_string(a.is_var() ? b : a));
      }
    }
    return true;
  }

  bool is_local(const std::string& name) const { return name.rfind("_u", 0) == 0; }

  // Under the host's choice atom C(t), `not psi` reduces to a disjunction of
  // negated extensional literals. Returns nullopt when psi is false under the
  // host (so `not psi` holds), an empty list when psi is true.
  std::optional<std::vector<Literal>> negate_under_choice(const CQ& host, const std::set<std::string>& host_vars,
                                                          const CQ& psi, const Atom& goal) {
    auto unsupported = [&](const std::string& why) {
      return UnsupportedQuery("cannot negate " + dsl::to_string(goal) + ": " + why);
    };
    const Literal* own = nullptr;
    const Literal* anchor = nullptr;
    for (const auto& l : psi.literals) {
      auto info = schema_.find(l.atom.predicate);
      if (info == schema_.end() || info->second.semantics != Semantics::Choice) continue;
      for (const auto& h : host.literals)
        if (!h.negated && h.atom.predicate == l.atom.predicate) {
          own = &l;
          anchor = &h;
          break;
        }
      if (own) break;
    }
    if (!own) throw unsupported("its definition shares no choice relation with the rest of the query");

    Substitution s;
    for (std::size_t i = 0; i < own->atom.arity(); ++i) {
      Term a = walk(s, own->atom.args[i]);
      Term b = anchor->atom.args[i];
      if (a == b) continue;
      if (a.is_var() && !host_vars.count(a.name())) {
        s[a.name()] = b;
      } else if (a.is_constant() && b.is_constant()) {
        return std::nullopt;
      } else {
        throw unsupported("choice arguments " + dsl::to_string(a) + " and " + dsl::to_string(b) +
                          " are not decidable at compile time");
      }
    }
    std::vector<Literal> out;
    for (const auto& l : psi.literals) {
      if (&l == own) continue;
      Literal r{resolve(s, CQ{{l}}).literals.front().atom, true};
      for (const auto& t : r.atom.args)
        if (t.is_var() && !host_vars.count(t.name()))
          throw unsupported("variable " + t.name() + " is not determined by the choice atom");
      auto info = schema_.find(r.atom.predicate);
      if (info != schema_.end() && info->second.semantics == Semantics::Choice) {
        if (r.atom.predicate != own->atom.predicate) throw unsupported("more than one choice relation");
        Atom chosen = resolve(s, CQ{{*own}}).literals.front().atom;
        if (r.atom == chosen) continue;
        // A different tuple of the same choice cannot hold alongside the chosen one.
        bool distinct = false;
        for (std::size_t k = 0; k < r.atom.arity(); ++k)
          distinct |= r.atom.args[k].is_constant() && chosen.args[k].is_constant() &&
                      r.atom.args[k] != chosen.args[k];
        if (distinct) return std::nullopt;
        throw unsupported("choice atoms that may or may not coincide");
      }
      if (std::find(out.begin(), out.end(), r) == out.end()) out.push_back(std::move(r));
    }
    return out;
  }

  const dsl::ValidatedProgram& program_;
  const Schema& schema_;
  std::set<std::string> free_;
  FreshNames names_{"_u"};
};

std::vector<std::string> target_vars(const std::optional<Atom>& target) {
  return target ? dsl::variables(*target) : std::vector<std::string>{};
}

}  // namespace

std::vector<std::vector<Literal>> to_dnf(const dsl::Formula& formula) { return dnf_of_nnf(nnf(formula, false)); }

UCQ unfold_formula(const std::optional<Atom>& target, const dsl::Formula& condition,
                   const dsl::ValidatedProgram& program, const Schema& schema) {
  UCQ out;
  out.free_vars = target_vars(target);
  std::set<std::string> free(out.free_vars.begin(), out.free_vars.end());
  Unfolder unfolder(program, schema, free);

  for (const auto& conj : to_dnf(condition)) {
    // Condition variables are existential and local to their own atom.
    CQ base;
    if (target) base.literals.push_back(Literal{*target, false});
    for (const auto& lit : conj) {
      Substitution rename;
      for (const auto& v : dsl::variables(lit.atom))
        if (!rename.count(v)) rename.emplace(v, Term::var(unfolder.fresh()));
      base.literals.push_back(Literal{substitute(rename, lit.atom), lit.negated});
    }
    for (const auto& pos : unfolder.expand_positive(base))
      for (auto& full : unfolder.expand_negative(pos)) {
        if (!normalize(full)) continue;
        out.disjuncts.push_back(std::move(full));
        if (out.disjuncts.size() > kMaxDisjuncts) throw UnsupportedQuery("query expands to too many disjuncts");
      }
  }

  for (const auto& cq : out.disjuncts) {
    std::set<std::string> positive;
    for (const auto& l : cq.literals)
      if (!l.negated) dsl::collect_variables(l.atom, positive);
    for (const auto& v : out.free_vars)
      if (!positive.count(v)) throw UnsupportedQuery("free variable " + v + " does not occur in a positive atom");
    for (const auto& l : cq.literals)
      if (l.negated)
        for (const auto& v : dsl::variables(l.atom))
          if (!positive.count(v))
            throw UnsupportedQuery("variable " + v + " of negated atom " + dsl::to_string(l.atom) +
                                   " does not occur in a positive atom");
  }
  return out;
}

UnfoldedQuery unfold(const dsl::Query& query, const dsl::ValidatedProgram& program, const Schema& schema) {
  UnfoldedQuery out;
  dsl::Formula cond = query.condition ? *query.condition : dsl::Formula::truth();
  out.numerator = unfold_formula(query.target, cond, program, schema);
  if (query.kind == dsl::QueryKind::Conditional) out.denominator = unfold_formula(std::nullopt, cond, program, schema);
  return out;
}

}  // namespace probcbma::lifted
