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

#include "probcbma/lifted/compiler.hpp"

#include <algorithm>
#include <functional>
#include <numeric>

#include "probcbma/error.hpp"
#include "probcbma/lifted/choices.hpp"

namespace probcbma::lifted {
namespace {

using Bound = std::set<std::string>;
// A disjunction of single-component CQs.
using Clause = std::vector<CQ>;

class Unsafe : public std::exception {
 public:
  explicit Unsafe(std::string witness) : witness_(std::move(witness)) {}
  const char* what() const noexcept override { return witness_.c_str(); }

 private:
  std::string witness_;
};

std::string show(const std::vector<CQ>& cqs, const Bound& bound) {
  if (cqs.empty()) return "false";
  std::string out;
  for (std::size_t i = 0; i < cqs.size(); ++i) out += (i ? " | " : "") + ("(" + to_string(cqs[i], bound) + ")");
  return out;
}

bool existential(const Term& t, const Bound& bound) { return t.is_var() && !bound.count(t.name()); }

class Compiler {
 public:
  explicit Compiler(const Schema& schema) : schema_(schema) {}

  PlanPtr run(const UCQ& q) {
    names_.reserve(variables(q));
    Bound bound(q.free_vars.begin(), q.free_vars.end());
    for (const auto& cq : q.disjuncts)
      for (const auto& l : cq.literals) {
        auto it = schema_.find(l.atom.predicate);
        if (it == schema_.end()) throw SchemaError("unknown relation " + l.atom.predicate);
        if (it->second.arity != l.atom.arity())
          throw SchemaError(l.atom.predicate + " has arity " + std::to_string(it->second.arity) + ", not " +
                                 std::to_string(l.atom.arity()));
      }
    return compile(q.disjuncts, bound);
  }

 private:
  PlanPtr compile(std::vector<CQ> cqs, const Bound& bound) {
    cqs = simplify(std::move(cqs), bound);
    if (cqs.empty()) return make_constant(0.0);
    for (const auto& cq : cqs)
      if (cq.empty()) return make_constant(1.0);

    // Ground elimination.
    if (cqs.size() == 1 && cqs.front().literals.size() == 1) {
      const Literal& l = cqs.front().literals.front();
      bool ground = std::none_of(l.atom.args.begin(), l.atom.args.end(),
                                 [&](const Term& t) { return existential(t, bound); });
      if (ground) {
        PlanPtr lookup = make_lookup(l.atom);
        return l.negated ? make_complement(lookup) : lookup;
      }
    }

    std::vector<Clause> cnf = to_cnf(cqs, bound);

    // Independent join.
    if (cnf.size() >= 2) {
      auto groups = group_clauses(cnf);
      if (groups.size() >= 2) {
        std::vector<PlanPtr> parts;
        for (const auto& g : groups) {
          std::vector<Clause> sub;
          for (auto i : g) sub.push_back(cnf[i]);
          parts.push_back(compile(distribute(sub), bound));
        }
        return make_join(std::move(parts));
      }
    }

    // Independent union.
    if (cqs.size() >= 2) {
      auto groups = group_cqs(cqs);
      if (groups.size() >= 2) {
        std::vector<PlanPtr> parts;
        for (const auto& g : groups) {
          std::vector<CQ> sub;
          for (auto i : g) sub.push_back(cqs[i]);
          parts.push_back(compile(std::move(sub), bound));
        }
        return make_union(std::move(parts));
      }
    }

    if (auto choice = first_choice_relation(cqs)) return factor_choice(cqs, *choice, bound);

    if (cnf.size() >= 2) return inclusion_exclusion(cnf, bound);

    // With a single clause the query is the disjunction of its components.
    return separate(cnf.front(), bound);
  }

  // Choice unification, per-CQ normalization, and removal of implied disjuncts.
  std::vector<CQ> simplify(std::vector<CQ> cqs, const Bound& bound) {
    UCQ u;
    u.disjuncts = std::move(cqs);
    try {
      u = rewrite_choices(u, schema_, bound);
    } catch (const UnsupportedQuery& e) {
      throw Unsafe(e.what());
    }
    std::vector<CQ> kept;
    for (std::size_t i = 0; i < u.disjuncts.size(); ++i) {
      bool redundant = false;
      for (std::size_t j = 0; j < u.disjuncts.size() && !redundant; ++j) {
        if (i == j || !homomorphism(u.disjuncts[j], u.disjuncts[i], bound)) continue;
        // CQ i implies CQ j; drop i unless they are equivalent and i comes first.
        redundant = !(homomorphism(u.disjuncts[i], u.disjuncts[j], bound) && i < j);
      }
      if (!redundant) kept.push_back(u.disjuncts[i]);
    }
    return kept;
  }

  std::vector<CQ> components(const CQ& q, const Bound& bound) {
    const auto& lits = q.literals;
    std::vector<std::size_t> parent(lits.size());
    std::iota(parent.begin(), parent.end(), 0);
    std::function<std::size_t(std::size_t)> find = [&](std::size_t x) {
      return parent[x] == x ? x : parent[x] = find(parent[x]);
    };
    std::map<std::string, std::size_t> owner;
    for (std::size_t i = 0; i < lits.size(); ++i)
      for (const auto& t : lits[i].atom.args) {
        if (!existential(t, bound)) continue;
        auto [it, inserted] = owner.emplace(t.name(), i);
        if (!inserted) parent[find(i)] = find(it->second);
      }
    std::map<std::size_t, CQ> by_root;
    for (std::size_t i = 0; i < lits.size(); ++i) by_root[find(i)].literals.push_back(lits[i]);
    std::vector<CQ> out;
    for (auto& [root, c] : by_root) {
      // Rename apart so components of different disjuncts never share variables.
      Substitution s;
      for (const auto& v : variables(c))
        if (!bound.count(v)) s.emplace(v, Term::var(names_.next()));
      CQ renamed = substitute(s, c);
      normalize(renamed);
      out.push_back(std::move(renamed));
    }
    return out;
  }

  bool implies(const CQ& a, const CQ& b, const Bound& bound) { return homomorphism(b, a, bound); }

  // Clause a implies clause b when every component of a implies some component of b.
  bool clause_implies(const Clause& a, const Clause& b, const Bound& bound) {
    return std::all_of(a.begin(), a.end(), [&](const CQ& ca) {
      return std::any_of(b.begin(), b.end(), [&](const CQ& cb) { return implies(ca, cb, bound); });
    });
  }

  Clause minimize_clause(Clause c, const Bound& bound) {
    Clause out;
    for (std::size_t i = 0; i < c.size(); ++i) {
      bool redundant = false;
      for (std::size_t j = 0; j < c.size() && !redundant; ++j) {
        if (i == j || !implies(c[i], c[j], bound)) continue;
        redundant = !(implies(c[j], c[i], bound) && i < j);
      }
      if (!redundant) out.push_back(c[i]);
    }
    return out;
  }

  std::vector<Clause> to_cnf(const std::vector<CQ>& cqs, const Bound& bound) {
    std::vector<std::vector<CQ>> comps;
    std::size_t total = 1;
    for (const auto& q : cqs) {
      comps.push_back(components(q, bound));
      total *= comps.back().size();
      if (total > 4096) throw Unsafe("clause form too large: " + show(cqs, bound));
    }
    std::vector<Clause> clauses{{}};
    for (const auto& cs : comps) {
      std::vector<Clause> next;
      for (const auto& partial : clauses)
        for (const auto& c : cs) {
          Clause e = partial;
          e.push_back(c);
          next.push_back(std::move(e));
        }
      clauses = std::move(next);
    }
    for (auto& c : clauses) c = minimize_clause(std::move(c), bound);
    std::vector<Clause> out;
    for (std::size_t i = 0; i < clauses.size(); ++i) {
      bool redundant = false;
      for (std::size_t j = 0; j < clauses.size() && !redundant; ++j) {
        if (i == j || !clause_implies(clauses[j], clauses[i], bound)) continue;
        redundant = !(clause_implies(clauses[i], clauses[j], bound) && i < j);
      }
      if (!redundant) out.push_back(clauses[i]);
    }
    return out;
  }

  bool dependent(const Literal& a, const Literal& b) {
    if (a.atom.predicate != b.atom.predicate) return false;
    if (is_choice(schema_, a.atom.predicate)) return true;
    for (std::size_t k = 0; k < a.atom.arity(); ++k) {
      const Term& x = a.atom.args[k];
      const Term& y = b.atom.args[k];
      if (x.is_constant() && y.is_constant() && x != y) return false;
    }
    return true;
  }

  bool dependent(const std::vector<const Literal*>& a, const std::vector<const Literal*>& b) {
    for (const auto* x : a)
      for (const auto* y : b)
        if (dependent(*x, *y)) return true;
    return false;
  }

  std::vector<std::vector<std::size_t>> group(const std::vector<std::vector<const Literal*>>& items) {
    std::vector<std::size_t> parent(items.size());
    std::iota(parent.begin(), parent.end(), 0);
    std::function<std::size_t(std::size_t)> find = [&](std::size_t x) {
      return parent[x] == x ? x : parent[x] = find(parent[x]);
    };
    for (std::size_t i = 0; i < items.size(); ++i)
      for (std::size_t j = i + 1; j < items.size(); ++j)
        if (find(i) != find(j) && dependent(items[i], items[j])) parent[find(j)] = find(i);
    std::map<std::size_t, std::vector<std::size_t>> by_root;
    for (std::size_t i = 0; i < items.size(); ++i) by_root[find(i)].push_back(i);
    std::vector<std::vector<std::size_t>> out;
    for (auto& [r, g] : by_root) out.push_back(std::move(g));
    return out;
  }

  std::vector<std::vector<std::size_t>> group_clauses(const std::vector<Clause>& cnf) {
    std::vector<std::vector<const Literal*>> items;
    for (const auto& c : cnf) {
      items.emplace_back();
      for (const auto& q : c)
        for (const auto& l : q.literals) items.back().push_back(&l);
    }
    return group(items);
  }

  std::vector<std::vector<std::size_t>> group_cqs(const std::vector<CQ>& cqs) {
    std::vector<std::vector<const Literal*>> items;
    for (const auto& q : cqs) {
      items.emplace_back();
      for (const auto& l : q.literals) items.back().push_back(&l);
    }
    return group(items);
  }

  // Conjunction of clauses back in disjunctive form.
  std::vector<CQ> distribute(const std::vector<Clause>& clauses) {
    std::vector<CQ> out{CQ{}};
    for (const auto& clause : clauses) {
      std::vector<CQ> next;
      for (const auto& partial : out)
        for (const auto& c : clause) {
          CQ merged = partial;
          merged.literals.insert(merged.literals.end(), c.literals.begin(), c.literals.end());
          next.push_back(std::move(merged));
        }
      out = std::move(next);
      if (out.size() > 4096) throw Unsafe("disjunctive form too large");
    }
    return out;
  }

  std::optional<std::string> first_choice_relation(const std::vector<CQ>& cqs) {
    std::optional<std::string> best;
    for (const auto& q : cqs)
      for (const auto& l : q.literals)
        if (is_choice(schema_, l.atom.predicate) && (!best || l.atom.predicate < *best)) best = l.atom.predicate;
    return best;
  }

  PlanPtr factor_choice(const std::vector<CQ>& cqs, const std::string& relation, const Bound& bound) {
    std::vector<const Literal*> anchors;
    for (const auto& q : cqs) {
      const Literal* found = nullptr;
      for (const auto& l : q.literals)
        if (l.atom.predicate == relation) found = &l;
      if (!found)
        throw Unsafe("choice relation " + relation + " does not occur in every disjunct of " + show(cqs, bound));
      anchors.push_back(found);
    }
    const std::size_t arity = anchors.front()->atom.arity();

    // Each argument position is either existential in every disjunct (summed
    // over) or the same fixed term everywhere.
    bool uniform = true;
    std::vector<bool> summed(arity, false);
    for (std::size_t k = 0; k < arity && uniform; ++k) {
      bool all_ex = true, all_same = true;
      for (const auto* a : anchors) {
        all_ex &= existential(a->atom.args[k], bound);
        all_same &= a->atom.args[k] == anchors.front()->atom.args[k] && !existential(a->atom.args[k], bound);
      }
      summed[k] = all_ex;
      uniform = all_ex || all_same;
    }
    if (uniform) {
      std::vector<std::string> zs;
      for (std::size_t k = 0; k < arity; ++k)
        if (summed[k]) zs.push_back(names_.next());
      Atom head;
      head.predicate = relation;
      std::vector<CQ> inner;
      for (std::size_t i = 0; i < cqs.size(); ++i) {
        Substitution s;
        std::size_t zi = 0;
        for (std::size_t k = 0; k < arity; ++k) {
          if (!summed[k]) continue;
          const std::string& v = anchors[i]->atom.args[k].name();
          auto [it, inserted] = s.emplace(v, Term::var(zs[zi]));
          if (!inserted && it->second != Term::var(zs[zi]))
            throw Unsafe("choice atom " + dsl::to_string(anchors[i]->atom) + " repeats an existential variable");
          ++zi;
        }
        CQ rest;
        for (const auto& l : cqs[i].literals)
          if (&l != anchors[i]) rest.literals.push_back(l);
        inner.push_back(substitute(s, rest));
        if (i == 0) head = substitute(s, anchors[i]->atom);
      }
      Bound inner_bound = bound;
      inner_bound.insert(zs.begin(), zs.end());
      PlanPtr body = make_join({make_lookup(head), compile(std::move(inner), inner_bound)});
      return zs.empty() ? body : make_exclusive_sum(zs, body);
    }

    // Every choice atom ground: the disjuncts split by the selected tuple.
    bool ground = std::all_of(anchors.begin(), anchors.end(), [](const Literal* a) { return a->atom.is_ground(); });
    if (!ground)
      throw Unsafe("choice relation " + relation + " cannot be factored out of " + show(cqs, bound));
    std::map<Atom, std::vector<CQ>> by_tuple;
    for (std::size_t i = 0; i < cqs.size(); ++i) {
      CQ rest;
      for (const auto& l : cqs[i].literals)
        if (&l != anchors[i]) rest.literals.push_back(l);
      by_tuple[anchors[i]->atom].push_back(std::move(rest));
    }
    std::vector<PlanPtr> parts;
    for (auto& [tuple, rest] : by_tuple) parts.push_back(make_join({make_lookup(tuple), compile(std::move(rest), bound)}));
    if (parts.size() == 1) return parts.front();
    std::vector<int> signs(parts.size(), 1);
    return make_inclusion_exclusion(std::move(parts), std::move(signs));
  }

  PlanPtr inclusion_exclusion(const std::vector<Clause>& cnf, const Bound& bound) {
    if (cnf.size() > kMaxInclusionExclusionClauses)
      throw Unsafe("inclusion-exclusion over " + std::to_string(cnf.size()) + " clauses exceeds the limit");
    std::vector<PlanPtr> parts;
    std::vector<int> signs;
    const std::size_t k = cnf.size();
    for (std::size_t mask = 1; mask < (std::size_t{1} << k); ++mask) {
      std::vector<CQ> term;
      for (std::size_t i = 0; i < k; ++i)
        if (mask & (std::size_t{1} << i)) term.insert(term.end(), cnf[i].begin(), cnf[i].end());
      parts.push_back(compile(std::move(term), bound));
      signs.push_back(std::popcount(mask) % 2 == 1 ? 1 : -1);
    }
    return make_inclusion_exclusion(std::move(parts), std::move(signs));
  }

  PlanPtr separate(const Clause& cqs, const Bound& bound) {
    std::vector<std::vector<std::string>> candidates;
    for (const auto& q : cqs) {
      std::set<std::string> common;
      bool first = true;
      for (const auto& l : q.literals) {
        std::set<std::string> vars;
        for (const auto& t : l.atom.args)
          if (existential(t, bound)) vars.insert(t.name());
        if (first) {
          common = vars;
          first = false;
        } else {
          std::set<std::string> keep;
          std::set_intersection(common.begin(), common.end(), vars.begin(), vars.end(),
                                std::inserter(keep, keep.begin()));
          common = std::move(keep);
        }
      }
      if (common.empty()) throw Unsafe("no separator variable in " + show(cqs, bound));
      candidates.emplace_back(common.begin(), common.end());
    }

    std::vector<std::size_t> pick(cqs.size(), 0);
    std::size_t tried = 0;
    for (;;) {
      if (++tried > 100000) break;
      if (consistent_separator(cqs, candidates, pick)) {
        std::string z = names_.next();
        std::vector<CQ> inner;
        for (std::size_t i = 0; i < cqs.size(); ++i)
          inner.push_back(substitute(Substitution{{candidates[i][pick[i]], Term::var(z)}}, cqs[i]));
        Bound inner_bound = bound;
        inner_bound.insert(z);
        return make_project({z}, compile(std::move(inner), inner_bound));
      }
      std::size_t i = 0;
      while (i < pick.size() && ++pick[i] == candidates[i].size()) pick[i++] = 0;
      if (i == pick.size()) break;
    }
    throw Unsafe("no separator variable in " + show(cqs, bound));
  }

  bool consistent_separator(const Clause& cqs, const std::vector<std::vector<std::string>>& candidates,
                            const std::vector<std::size_t>& pick) {
    std::map<std::string, std::set<std::size_t>> allowed;
    for (std::size_t i = 0; i < cqs.size(); ++i) {
      const std::string& sep = candidates[i][pick[i]];
      for (const auto& l : cqs[i].literals) {
        std::set<std::size_t> at;
        for (std::size_t k = 0; k < l.atom.arity(); ++k)
          if (l.atom.args[k].is_var() && l.atom.args[k].name() == sep) at.insert(k);
        auto it = allowed.find(l.atom.predicate);
        if (it == allowed.end()) {
          allowed.emplace(l.atom.predicate, std::move(at));
        } else {
          std::set<std::size_t> keep;
          std::set_intersection(it->second.begin(), it->second.end(), at.begin(), at.end(),
                                std::inserter(keep, keep.begin()));
          it->second = std::move(keep);
        }
      }
    }
    return std::all_of(allowed.begin(), allowed.end(), [](const auto& kv) { return !kv.second.empty(); });
  }

  const Schema& schema_;
  FreshNames names_{"_z"};
};

}  // namespace

SafetyVerdict check_safety(const UCQ& q, const Schema& schema) {
  SafetyVerdict v;
  try {
    v.plan = Compiler(schema).run(q);
    v.safe = true;
  } catch (const Unsafe& e) {
    v.witness = e.what();
  } catch (const UnsupportedQuery& e) {
    v.witness = e.what();
  }
  return v;
}

PlanPtr compile(const UCQ& q, const Schema& schema) {
  auto v = check_safety(q, schema);
  if (!v.safe)
    throw UnsupportedQuery("query is not liftable: " + v.witness +
                           "; the possible-worlds oracle (--engine oracle) can answer it on small inputs");
  return v.plan;
}

}  // namespace probcbma::lifted
