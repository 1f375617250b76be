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

#include "probcbma/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "probcbma/error.hpp"

namespace probcbma {
namespace {

struct Decision {
  const ProbRelation* relation;
  std::vector<std::size_t> rows;  // one row for an independent tuple, the group for a choice
  double none = 0.0;              // probability that no tuple of a choice holds
};

struct Plan {
  std::vector<Decision> decisions;
  World fixed;  // tuples present in every world
};

Plan plan_worlds(const ProbDatabase& db) {
  Plan plan;
  for (const auto& [name, rel] : db.relations()) {
    auto& fixed = plan.fixed[name];
    if (rel->is_choice()) {
      Decision d{rel.get(), {}, 0.0};
      double mass = 0.0;
      for (std::size_t r = 0; r < rel->size(); ++r)
        if (rel->prob(r) > 0.0) {
          d.rows.push_back(r);
          mass += rel->prob(r);
        }
      d.none = std::max(0.0, 1.0 - mass);
      if (d.none <= 1e-12) d.none = 0.0;
      if (d.rows.size() == 1 && d.none == 0.0) {
        auto row = rel->row(d.rows.front());
        fixed.emplace_back(row.begin(), row.end());
      } else if (!d.rows.empty()) {
        plan.decisions.push_back(std::move(d));
      }
      continue;
    }
    for (std::size_t r = 0; r < rel->size(); ++r) {
      double p = rel->prob(r);
      if (p >= 1.0) {
        auto row = rel->row(r);
        fixed.emplace_back(row.begin(), row.end());
      } else if (p > 0.0) {
        plan.decisions.push_back(Decision{rel.get(), {r}, 0.0});
      }
    }
  }
  return plan;
}

double count(const Plan& plan) {
  double n = 1.0;
  for (const auto& d : plan.decisions)
    n *= d.relation->is_choice() ? static_cast<double>(d.rows.size()) + (d.none > 0.0 ? 1.0 : 0.0) : 2.0;
  return n;
}

bool matches(const dsl::Atom& pattern, std::span<const Symbol> row) {
  std::map<std::string, Symbol> seen;
  for (std::size_t k = 0; k < row.size(); ++k) {
    const auto& t = pattern.args[k];
    if (t.is_constant()) {
      if (t.value() != row[k]) return false;
    } else {
      auto [it, inserted] = seen.emplace(t.name(), row[k]);
      if (!inserted && it->second != row[k]) return false;
    }
  }
  return true;
}

using Binding = std::map<std::string, Symbol>;

// Extends `b` so that `atom` equals `tuple`; false on conflict.
bool bind(const dsl::Atom& atom, const std::vector<Symbol>& tuple, Binding& b, std::vector<std::string>& added) {
  for (std::size_t k = 0; k < tuple.size(); ++k) {
    const auto& t = atom.args[k];
    if (t.is_constant()) {
      if (t.value() != tuple[k]) return false;
      continue;
    }
    auto it = b.find(t.name());
    if (it != b.end()) {
      if (it->second != tuple[k]) return false;
    } else {
      b.emplace(t.name(), tuple[k]);
      added.push_back(t.name());
    }
  }
  return true;
}

const std::vector<std::vector<Symbol>>& tuples_of(const World& w, const std::string& relation) {
  static const std::vector<std::vector<Symbol>> none;
  auto it = w.find(relation);
  return it == w.end() ? none : it->second;
}

bool holds_ground(const World& w, const dsl::Atom& atom, const Binding& b) {
  for (const auto& tuple : tuples_of(w, atom.predicate)) {
    if (tuple.size() != atom.arity()) continue;
    bool ok = true;
    for (std::size_t k = 0; k < tuple.size() && ok; ++k) {
      const auto& t = atom.args[k];
      if (t.is_constant()) {
        ok = t.value() == tuple[k];
      } else {
        auto it = b.find(t.name());
        // Unbound variables in a negated literal are existential.
        ok = it == b.end() || it->second == tuple[k];
      }
    }
    if (ok) return true;
  }
  return false;
}

// Calls `found` for each assignment satisfying the positive literals, with negated ones checked last.
template <class F>
void solve(const World& w, const std::vector<lifted::Literal>& lits, std::size_t i, Binding& b, F&& found) {
  if (i == lits.size()) {
    for (const auto& l : lits)
      if (l.negated && holds_ground(w, l.atom, b)) return;
    found(b);
    return;
  }
  const auto& l = lits[i];
  if (l.negated) {
    solve(w, lits, i + 1, b, found);
    return;
  }
  for (const auto& tuple : tuples_of(w, l.atom.predicate)) {
    if (tuple.size() != l.atom.arity()) continue;
    std::vector<std::string> added;
    if (bind(l.atom, tuple, b, added)) solve(w, lits, i + 1, b, found);
    for (const auto& name : added) b.erase(name);
  }
}

std::vector<Symbol> key_of(const Binding& b, const std::vector<std::string>& columns) {
  std::vector<Symbol> key;
  for (const auto& c : columns) key.push_back(b.at(c));
  return key;
}

std::vector<Symbol> key_of_head(const dsl::Atom& head, const Binding& b) {
  std::vector<Symbol> key;
  for (const auto& t : head.args) key.push_back(t.is_constant() ? t.value() : b.at(t.name()));
  return key;
}

// Demand patterns: the extensional atoms a query can possibly read, with constants propagated through rules.
void demand(const dsl::Atom& call, const dsl::ValidatedProgram& program, std::set<std::string>& visited,
            std::vector<dsl::Atom>& out) {
  if (!program.is_intensional(call.predicate)) {
    out.push_back(call);
    return;
  }
  std::string signature = call.predicate + "(";
  for (const auto& t : call.args) signature += (t.is_constant() ? "'" + t.value().str() + "'" : std::string("_")) + ",";
  if (!visited.insert(signature).second) return;
  for (const auto* rule : program.rules_for(call.predicate)) {
    lifted::Substitution s;
    bool applies = true;
    for (std::size_t k = 0; k < call.arity() && applies; ++k) {
      const auto& h = rule->head.args[k];
      const auto& c = call.args[k];
      if (!c.is_constant()) continue;
      if (h.is_constant()) {
        applies = h == c;
      } else {
        auto it = s.find(h.name());
        if (it != s.end())
          applies = it->second == c;
        else
          s.emplace(h.name(), c);
      }
    }
    if (!applies) continue;
    for (const auto& lit : rule->body) demand(lifted::substitute(s, lit.atom), program, visited, out);
  }
}

void formula_atoms(const dsl::Formula& f, std::vector<dsl::Atom>& out) {
  if (f.kind == dsl::Formula::Kind::Atom) out.push_back(f.atom);
  for (const auto& c : f.children) formula_atoms(c, out);
}

bool eval_formula(const dsl::Formula& f, const World& w) {
  switch (f.kind) {
    case dsl::Formula::Kind::True:
      return true;
    case dsl::Formula::Kind::Atom:
      return holds_ground(w, f.atom, {});
    case dsl::Formula::Kind::Not:
      return !eval_formula(f.children.front(), w);
    case dsl::Formula::Kind::And:
      return std::all_of(f.children.begin(), f.children.end(), [&](const auto& c) { return eval_formula(c, w); });
    case dsl::Formula::Kind::Or:
      return std::any_of(f.children.begin(), f.children.end(), [&](const auto& c) { return eval_formula(c, w); });
  }
  return false;
}

// An uncertain independent tuple, by relation and value.
using Fact = std::pair<std::string, std::vector<Symbol>>;

// Facts of `upper` the query may read; `upper` holds the fixed tuples, one
// choice outcome and every uncertain independent tuple.
using Relevance = std::function<std::set<Fact>(const World& upper)>;

// Sums over choice outcomes first. Within an outcome only the independent
// tuples `relevant` reports are enumerated; the others sum out.
void for_each_relevant_world(const ProbDatabase& db, const Relevance& relevant,
                             const std::function<void(const World&, double)>& visit, double cap) {
  Plan plan = plan_worlds(db);
  std::vector<const Decision*> choices, independent;
  for (const auto& d : plan.decisions) (d.relation->is_choice() ? choices : independent).push_back(&d);

  World upper = plan.fixed;
  for (const auto* d : independent) {
    auto row = d->relation->row(d->rows.front());
    upper[d->relation->name()].emplace_back(row.begin(), row.end());
  }

  struct Branch {
    World world;
    double weight;
    std::vector<const Decision*> open;
  };
  std::vector<Branch> branches;
  double total = 0.0;
  std::function<void(std::size_t, double)> choose = [&](std::size_t i, double weight) {
    if (weight == 0.0) return;
    if (i == choices.size()) {
      std::set<Fact> facts = relevant(upper);
      Branch b{plan.fixed, weight, {}};
      for (const auto* c : choices)
        for (const auto& t : upper[c->relation->name()]) b.world[c->relation->name()].push_back(t);
      for (const auto* d : independent) {
        auto row = d->relation->row(d->rows.front());
        if (facts.count(Fact{d->relation->name(), {row.begin(), row.end()}})) b.open.push_back(d);
      }
      total += std::ldexp(1.0, static_cast<int>(b.open.size()));
      if (total > cap)
        throw TooLargeError("possible-worlds enumeration needs more than " + std::to_string(cap) + " worlds");
      branches.push_back(std::move(b));
      return;
    }
    const Decision& d = *choices[i];
    auto& tuples = upper[d.relation->name()];
    for (auto r : d.rows) {
      auto row = d.relation->row(r);
      tuples.emplace_back(row.begin(), row.end());
      choose(i + 1, weight * d.relation->prob(r));
      tuples.pop_back();
    }
    if (d.none > 0.0) choose(i + 1, weight * d.none);
  };
  choose(0, 1.0);

  for (auto& b : branches) {
    World& world = b.world;
    std::function<void(std::size_t, double)> step = [&](std::size_t i, double weight) {
      if (weight == 0.0) return;
      if (i == b.open.size()) {
        visit(world, weight);
        return;
      }
      const Decision& d = *b.open[i];
      const std::size_t r = d.rows.front();
      const double p = d.relation->prob(r);
      auto& tuples = world[d.relation->name()];
      auto row = d.relation->row(r);
      tuples.emplace_back(row.begin(), row.end());
      step(i + 1, weight * p);
      tuples.pop_back();
      step(i + 1, weight * (1.0 - p));
    };
    step(0, b.weight);
  }
}

dsl::Atom ground_where_bound(const dsl::Atom& atom, const Binding& b) {
  dsl::Atom out = atom;
  for (auto& t : out.args)
    if (t.is_var())
      if (auto it = b.find(t.name()); it != b.end()) t = dsl::Term::constant(it->second);
  return out;
}

void read_facts(const World& upper, const dsl::Atom& pattern, std::set<Fact>& out) {
  for (const auto& tuple : tuples_of(upper, pattern.predicate))
    if (tuple.size() == pattern.arity() && matches(pattern, tuple)) out.emplace(pattern.predicate, tuple);
}

// Literals with negated ones dropped: their matches over-approximate those of `lits`.
std::vector<lifted::Literal> positive_part(const std::vector<lifted::Literal>& lits) {
  std::vector<lifted::Literal> out;
  for (const auto& l : lits)
    if (!l.negated) out.push_back(l);
  return out;
}

std::set<Fact> ucq_relevance(const lifted::UCQ& q, const World& upper) {
  std::set<Fact> out;
  for (const auto& cq : q.disjuncts) {
    Binding b;
    solve(upper, positive_part(cq.literals), 0, b, [&](const Binding& found) {
      for (const auto& l : cq.literals) read_facts(upper, ground_where_bound(l.atom, found), out);
    });
  }
  return out;
}

// Every atom some world of `upper` could derive, ignoring negation.
World possible_atoms(const World& upper, const dsl::ValidatedProgram& program) {
  World w = upper;
  for (const auto& pred : program.evaluation_order()) {
    std::set<std::vector<Symbol>> derived;
    for (const auto* rule : program.rules_for(pred)) {
      std::vector<lifted::Literal> body;
      for (const auto& l : rule->body)
        if (!l.negated) body.push_back(lifted::Literal{l.atom, false});
      Binding b;
      solve(w, body, 0, b, [&](const Binding& found) { derived.insert(key_of_head(rule->head, found)); });
    }
    auto& tuples = w[pred];
    tuples.insert(tuples.end(), derived.begin(), derived.end());
  }
  return w;
}

// Extensional facts reachable from `goals` through rule instances that can fire in some world.
std::set<Fact> program_relevance(const std::vector<dsl::Atom>& goals, const dsl::ValidatedProgram& program,
                                 const World& upper) {
  const World possible = possible_atoms(upper, program);
  std::set<Fact> out;
  std::set<std::string> seen;
  std::vector<dsl::Atom> stack(goals.begin(), goals.end());
  while (!stack.empty()) {
    dsl::Atom goal = std::move(stack.back());
    stack.pop_back();
    if (!seen.insert(dsl::to_string(goal)).second) continue;
    if (!program.is_intensional(goal.predicate)) {
      read_facts(upper, goal, out);
      continue;
    }
    for (const auto* rule : program.rules_for(goal.predicate)) {
      Binding head;
      bool applies = true;
      for (std::size_t k = 0; k < goal.arity() && applies; ++k) {
        const auto& h = rule->head.args[k];
        const auto& g = goal.args[k];
        if (!g.is_constant()) continue;
        if (h.is_constant()) {
          applies = h == g;
        } else {
          auto [it, inserted] = head.emplace(h.name(), g.value());
          applies = inserted || it->second == g.value();
        }
      }
      if (!applies) continue;
      std::vector<lifted::Literal> body;
      for (const auto& l : rule->body)
        if (!l.negated) body.push_back(lifted::Literal{l.atom, false});
      Binding b = head;
      solve(possible, body, 0, b, [&](const Binding& found) {
        for (const auto& l : rule->body) stack.push_back(ground_where_bound(l.atom, found));
      });
    }
  }
  return out;
}

}  // namespace

double world_count(const ProbDatabase& db) { return count(plan_worlds(db)); }

void for_each_world(const ProbDatabase& db, const std::function<void(const World&, double)>& visit, double cap) {
  Plan plan = plan_worlds(db);
  const double n = count(plan);
  if (n > cap)
    throw TooLargeError("possible-worlds enumeration needs " + std::to_string(n) + " worlds, above the cap of " +
                        std::to_string(cap));
  World world = plan.fixed;
  std::function<void(std::size_t, double)> step = [&](std::size_t i, double weight) {
    if (weight == 0.0) return;
    if (i == plan.decisions.size()) {
      visit(world, weight);
      return;
    }
    const Decision& d = plan.decisions[i];
    auto& tuples = world[d.relation->name()];
    if (!d.relation->is_choice()) {
      const std::size_t r = d.rows.front();
      const double p = d.relation->prob(r);
      auto row = d.relation->row(r);
      tuples.emplace_back(row.begin(), row.end());
      step(i + 1, weight * p);
      tuples.pop_back();
      step(i + 1, weight * (1.0 - p));
      return;
    }
    for (auto r : d.rows) {
      auto row = d.relation->row(r);
      tuples.emplace_back(row.begin(), row.end());
      step(i + 1, weight * d.relation->prob(r));
      tuples.pop_back();
    }
    if (d.none > 0.0) step(i + 1, weight * d.none);
  };
  step(0, 1.0);
}

std::vector<std::pair<World, double>> enumerate_worlds(const ProbDatabase& db, double cap) {
  std::vector<std::pair<World, double>> out;
  for_each_world(db, [&](const World& w, double p) { out.emplace_back(w, p); }, cap);
  return out;
}

ProbDatabase relevant_part(const ProbDatabase& db, const std::vector<dsl::Atom>& patterns) {
  ProbDatabase out;
  for (const auto& [name, rel] : db.relations()) {
    std::vector<const dsl::Atom*> mine;
    for (const auto& p : patterns)
      if (p.predicate == name && p.arity() == rel->arity()) mine.push_back(&p);
    ProbRelation kept(name, rel->arity(), rel->semantics());
    for (std::size_t r = 0; r < rel->size(); ++r) {
      auto row = rel->row(r);
      if (std::any_of(mine.begin(), mine.end(), [&](const dsl::Atom* p) { return matches(*p, row); }))
        kept.add(row, rel->prob(r));
    }
    out.add(std::move(kept));
  }
  return out;
}

ra::ProbTable oracle_prob(const lifted::UCQ& q, const ProbDatabase& db, double cap) {
  std::vector<dsl::Atom> patterns;
  for (const auto& cq : q.disjuncts)
    for (const auto& l : cq.literals) patterns.push_back(l.atom);
  ProbDatabase pruned = relevant_part(db, patterns);

  std::vector<std::string> columns(q.free_vars.begin(), q.free_vars.end());
  std::sort(columns.begin(), columns.end());
  columns.erase(std::unique(columns.begin(), columns.end()), columns.end());
  ra::ProbTable out(columns);
  double scalar = 0.0;

  for_each_relevant_world(
      pruned, [&](const World& upper) { return ucq_relevance(q, upper); },
      [&](const World& w, double weight) {
        std::set<std::vector<Symbol>> hits;
        for (const auto& cq : q.disjuncts) {
          Binding b;
          solve(w, cq.literals, 0, b, [&](const Binding& found) { hits.insert(key_of(found, columns)); });
        }
        if (columns.empty()) {
          if (!hits.empty()) scalar += weight;
          return;
        }
        for (const auto& key : hits) {
          std::size_t r = out.upsert(key, 0.0);
          out.p(r) += weight;
        }
      },
      cap);
  if (columns.empty()) out.set_default(scalar);
  return out;
}

OracleAnswer oracle_query(const dsl::Query& query, const dsl::ValidatedProgram& program, const ProbDatabase& db,
                          double cap) {
  std::vector<dsl::Atom> calls{query.target};
  if (query.condition) formula_atoms(*query.condition, calls);
  std::set<std::string> visited;
  std::vector<dsl::Atom> patterns;
  for (const auto& c : calls) demand(c, program, visited, patterns);
  ProbDatabase pruned = relevant_part(db, patterns);

  std::set<std::string> vars;
  dsl::collect_variables(query.target, vars);
  std::vector<std::string> columns(vars.begin(), vars.end());
  OracleAnswer answer;
  answer.joint = ra::ProbTable(columns);
  double joint_scalar = 0.0;
  double condition = 0.0;

  for_each_relevant_world(
      pruned, [&](const World& upper) { return program_relevance(calls, program, upper); },
      [&](const World& base, double weight) {
        World w = base;
        for (const auto& pred : program.evaluation_order()) {
          std::set<std::vector<Symbol>> derived;
          for (const auto* rule : program.rules_for(pred)) {
            std::vector<lifted::Literal> body;
            for (const auto& l : rule->body) body.push_back(lifted::Literal{l.atom, l.negated});
            Binding b;
            solve(w, body, 0, b, [&](const Binding& found) { derived.insert(key_of_head(rule->head, found)); });
          }
          auto& tuples = w[pred];
          tuples.insert(tuples.end(), derived.begin(), derived.end());
        }
        if (query.condition && !eval_formula(*query.condition, w)) return;
        condition += weight;
        std::set<std::vector<Symbol>> hits;
        Binding b;
        solve(w, {lifted::Literal{query.target, false}}, 0, b,
              [&](const Binding& found) { hits.insert(key_of(found, columns)); });
        if (columns.empty()) {
          if (!hits.empty()) joint_scalar += weight;
          return;
        }
        for (const auto& key : hits) {
          std::size_t r = answer.joint.upsert(key, 0.0);
          answer.joint.p(r) += weight;
        }
      },
      cap);
  if (columns.empty()) answer.joint.set_default(joint_scalar);
  answer.condition = query.kind == dsl::QueryKind::Conditional ? condition : 1.0;
  return answer;
}

}  // namespace probcbma
