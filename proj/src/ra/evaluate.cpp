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

#include "probcbma/ra/evaluate.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <set>

#include "probcbma/error.hpp"

namespace probcbma::ra {
namespace {

using lifted::Op;
using lifted::PlanNode;

using Sink = std::function<void(std::span<const Symbol>, double)>;

// Positions of `sub` columns inside `cols`.
std::vector<std::size_t> positions(const std::vector<std::string>& sub, const std::vector<std::string>& cols) {
  std::vector<std::size_t> out;
  for (const auto& c : sub) {
    auto it = std::find(cols.begin(), cols.end(), c);
    if (it == cols.end()) throw SchemaError("column " + c + " missing");
    out.push_back(static_cast<std::size_t>(it - cols.begin()));
  }
  return out;
}

std::vector<std::string> merge_columns(const std::vector<std::string>& a, const std::vector<std::string>& b) {
  std::vector<std::string> out;
  std::set_union(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return out;
}

bool subset(const std::vector<std::string>& a, const std::vector<std::string>& b) {
  return std::includes(b.begin(), b.end(), a.begin(), a.end());
}

// A ground-lookup atom resolved against its relation.
struct Pattern {
  const ProbRelation* relation = nullptr;
  std::vector<std::string> columns;           // sorted variable names
  std::vector<std::size_t> first_position;    // per column, where it first occurs in the atom
  std::vector<std::pair<std::size_t, Symbol>> constants;
  std::vector<std::pair<std::size_t, std::size_t>> equal_positions;

  bool matches(std::span<const Symbol> row) const {
    for (auto [k, s] : constants)
      if (row[k] != s) return false;
    for (auto [a, b] : equal_positions)
      if (row[a] != row[b]) return false;
    return true;
  }

  std::size_t estimate() const {
    std::size_t best = relation->size();
    for (auto [k, s] : constants) best = std::min(best, relation->rows_with(k, s).size());
    return best;
  }
};

Pattern resolve(const PlanNode& node, const ProbDatabase& db) {
  Pattern p;
  p.relation = &db.at(node.atom.predicate);
  if (p.relation->arity() != node.atom.arity())
    throw SchemaError("relation " + node.atom.predicate + " has arity " + std::to_string(p.relation->arity()));
  p.columns = node.columns;
  p.first_position.assign(p.columns.size(), 0);
  std::vector<bool> seen(p.columns.size(), false);
  for (std::size_t k = 0; k < node.atom.arity(); ++k) {
    const auto& t = node.atom.args[k];
    if (t.is_constant()) {
      p.constants.emplace_back(k, t.value());
      continue;
    }
    auto c = static_cast<std::size_t>(std::find(p.columns.begin(), p.columns.end(), t.name()) - p.columns.begin());
    if (!seen[c]) {
      seen[c] = true;
      p.first_position[c] = k;
    } else {
      p.equal_positions.emplace_back(p.first_position[c], k);
    }
  }
  return p;
}

class Evaluator {
 public:
  explicit Evaluator(const ProbDatabase& db) : db_(db) {}

  ProbTable eval(const PlanNode& n) {
    switch (n.op) {
      case Op::Constant:
        return ProbTable::scalar(n.value);
      case Op::GroundLookup:
        return lookup(n);
      case Op::Complement: {
        ProbTable t = eval(*n.children.front());
        for (std::size_t r = 0; r < t.size(); ++r) t.p(r) = 1.0 - t.p(r);
        t.set_default(1.0 - t.default_p());
        return t;
      }
      case Op::IndependentJoin: {
        ProbTable out(n.columns);
        double def = 0.0;
        join(n, [&](std::span<const Symbol> key, double p) { out.add(key, p); }, def);
        out.set_default(def);
        return out;
      }
      case Op::IndependentUnion:
        return fold(n, [](double a, double b) { return 1.0 - (1.0 - a) * (1.0 - b); });
      case Op::InclusionExclusion:
        return inclusion_exclusion(n);
      case Op::IndependentProject:
      case Op::ExclusiveSum:
        return aggregate(n);
      case Op::Selection: {
        ProbTable child = eval(*n.children.front());
        require_zero_default(child, n);
        auto col = *child.column_index(n.column);
        ProbTable out(child.columns());
        for (std::size_t r = 0; r < child.size(); ++r)
          if (child.key(r)[col] == n.constant) out.add(child.key(r), child.p(r));
        return out;
      }
    }
    throw SchemaError("unknown plan operator");
  }

 private:
  [[noreturn]] void schema_failure(const PlanNode& n, const std::string& why) {
    throw SchemaError(why + " in plan:\n" + lifted::explain(n));
  }

  void require_zero_default(const ProbTable& t, const PlanNode& n) {
    if (t.default_p() != 0.0) schema_failure(n, std::string(lifted::op_name(n.op)) + " over a non-zero default");
  }

  ProbTable lookup(const PlanNode& n) {
    Pattern pat = resolve(n, db_);
    ProbTable out(pat.columns);
    scan(pat, [&](std::size_t row) {
      auto tuple = pat.relation->row(row);
      if (out.is_scalar()) {
        out.set_default(pat.relation->prob(row));
        return;
      }
      std::vector<Symbol> key(pat.columns.size());
      for (std::size_t c = 0; c < key.size(); ++c) key[c] = tuple[pat.first_position[c]];
      out.add(key, pat.relation->prob(row));
    });
    return out;
  }

  template <class F>
  void scan(const Pattern& pat, F&& on_row) {
    if (!pat.constants.empty()) {
      // Use the most selective constant position.
      std::span<const std::uint32_t> best;
      bool have = false;
      for (auto [k, s] : pat.constants) {
        auto rows = pat.relation->rows_with(k, s);
        if (!have || rows.size() < best.size()) {
          best = rows;
          have = true;
        }
      }
      for (auto r : best)
        if (pat.matches(pat.relation->row(r))) on_row(r);
      return;
    }
    for (std::size_t r = 0; r < pat.relation->size(); ++r)
      if (pat.matches(pat.relation->row(r))) on_row(r);
  }

  // Product of all children. Rows are passed to `sink` over `n.columns`;
  // the value for keys without a row (or of a column-less join) lands in `result_default`.
  void join(const PlanNode& n, const Sink& sink, double& result_default) {
    std::vector<Pattern> lookups;
    std::vector<ProbTable> tables;
    for (const auto& c : n.children) {
      if (c->op == Op::GroundLookup && !c->columns.empty())
        lookups.push_back(resolve(*c, db_));
      else
        tables.push_back(eval(*c));
    }
    // Column-less operands only scale the result.
    double factor = 1.0;
    std::vector<ProbTable> keyed;
    for (auto& t : tables) {
      if (t.is_scalar())
        factor *= t.value();
      else
        keyed.push_back(std::move(t));
    }
    result_default = 0.0;
    if (factor == 0.0) return;
    if (keyed.empty() && lookups.empty()) {
      result_default = factor;
      return;
    }

    // Seed with the smallest zero-default operand.
    ProbTable acc;
    bool seeded = false;
    std::size_t best_table = keyed.size();
    for (std::size_t i = 0; i < keyed.size(); ++i)
      if (keyed[i].default_p() == 0.0 && (best_table == keyed.size() || keyed[i].size() < keyed[best_table].size()))
        best_table = i;
    std::size_t best_lookup = lookups.size();
    for (std::size_t i = 0; i < lookups.size(); ++i)
      if (best_lookup == lookups.size() || lookups[i].estimate() < lookups[best_lookup].estimate()) best_lookup = i;
    if (best_table < keyed.size() &&
        (best_lookup == lookups.size() || keyed[best_table].size() <= lookups[best_lookup].estimate())) {
      acc = std::move(keyed[best_table]);
      keyed.erase(keyed.begin() + static_cast<std::ptrdiff_t>(best_table));
      seeded = true;
    } else if (best_lookup < lookups.size()) {
      acc = materialize(lookups[best_lookup]);
      lookups.erase(lookups.begin() + static_cast<std::ptrdiff_t>(best_lookup));
      seeded = true;
    }
    if (!seeded) {
      // Only non-zero-default tables: their columns coincide.
      acc = std::move(keyed.front());
      keyed.erase(keyed.begin());
      for (auto& t : keyed) acc = combine(acc, t, n, [](double a, double b) { return a * b; });
      keyed.clear();
    }

    // Remaining zero-default tables, then lookups by probing, then the rest.
    for (std::size_t i = 0; i < keyed.size();) {
      if (keyed[i].default_p() == 0.0) {
        acc = combine(acc, keyed[i], n, [](double a, double b) { return a * b; });
        keyed.erase(keyed.begin() + static_cast<std::ptrdiff_t>(i));
      } else {
        ++i;
      }
    }
    std::vector<ProbTable> rest = std::move(keyed);

    while (!lookups.empty()) {
      // Prefer pure filters, then the probe sharing a column with the smallest estimate.
      std::size_t pick = lookups.size();
      for (std::size_t i = 0; i < lookups.size(); ++i) {
        bool shares = std::any_of(lookups[i].columns.begin(), lookups[i].columns.end(),
                                  [&](const std::string& c) { return acc.column_index(c).has_value(); });
        if (!shares) continue;
        bool filter_i = subset(lookups[i].columns, acc.columns());
        if (pick == lookups.size()) {
          pick = i;
          continue;
        }
        bool filter_p = subset(lookups[pick].columns, acc.columns());
        if (filter_i != filter_p ? filter_i : lookups[i].estimate() < lookups[pick].estimate()) pick = i;
      }
      bool last = lookups.size() == 1 && rest.empty();
      if (pick == lookups.size() || acc.default_p() != 0.0) {
        // No shared column: fall back to a materialized product.
        ProbTable t = materialize(lookups.front());
        lookups.erase(lookups.begin());
        acc = combine(acc, t, n, [](double a, double b) { return a * b; });
        continue;
      }
      Pattern pat = std::move(lookups[pick]);
      lookups.erase(lookups.begin() + static_cast<std::ptrdiff_t>(pick));
      if (last && merge_columns(acc.columns(), pat.columns) == n.columns) {
        probe(acc, pat, factor, sink);
        result_default = 0.0;
        return;
      }
      ProbTable next(merge_columns(acc.columns(), pat.columns));
      probe(acc, pat, 1.0, [&](std::span<const Symbol> key, double p) { next.add(key, p); });
      acc = std::move(next);
    }
    for (auto& t : rest) acc = combine(acc, t, n, [](double a, double b) { return a * b; });

    if (acc.columns() != n.columns) schema_failure(n, "join produced unexpected columns");
    result_default = factor * acc.default_p();
    for (std::size_t r = 0; r < acc.size(); ++r) sink(acc.key(r), factor * acc.p(r));
  }

  ProbTable materialize(const Pattern& pat) {
    ProbTable out(pat.columns);
    scan(pat, [&](std::size_t row) {
      auto tuple = pat.relation->row(row);
      std::vector<Symbol> key(pat.columns.size());
      for (std::size_t c = 0; c < key.size(); ++c) key[c] = tuple[pat.first_position[c]];
      out.add(key, pat.relation->prob(row));
    });
    return out;
  }

  // For every row of `acc`, the matching tuples of `pat`, output over acc ∪ pat columns.
  void probe(const ProbTable& acc, const Pattern& pat, double factor, const Sink& sink) {
    auto out_cols = merge_columns(acc.columns(), pat.columns);
    // For each output column: take it from acc (index) or from the tuple (position).
    struct Source {
      bool from_acc;
      std::size_t index;
    };
    std::vector<Source> sources;
    for (const auto& c : out_cols) {
      if (auto i = acc.column_index(c)) {
        sources.push_back({true, *i});
      } else {
        auto at = static_cast<std::size_t>(std::find(pat.columns.begin(), pat.columns.end(), c) - pat.columns.begin());
        sources.push_back({false, pat.first_position[at]});
      }
    }
    // Shared columns constrain tuple positions.
    std::vector<std::pair<std::size_t, std::size_t>> shared;  // (acc index, tuple position)
    for (std::size_t c = 0; c < pat.columns.size(); ++c)
      if (auto i = acc.column_index(pat.columns[c])) shared.emplace_back(*i, pat.first_position[c]);
    if (shared.empty()) throw SchemaError("probe without shared columns");

    std::vector<Symbol> key(out_cols.size());
    for (std::size_t r = 0; r < acc.size(); ++r) {
      double pa = acc.p(r) * factor;
      if (pa == 0.0) continue;
      auto akey = acc.key(r);
      auto candidates = pat.relation->rows_with(shared.front().second, akey[shared.front().first]);
      for (auto row : candidates) {
        auto tuple = pat.relation->row(row);
        if (!pat.matches(tuple)) continue;
        bool ok = true;
        for (std::size_t s = 1; s < shared.size() && ok; ++s) ok = tuple[shared[s].second] == akey[shared[s].first];
        if (!ok) continue;
        double p = pa * pat.relation->prob(row);
        if (p == 0.0) continue;
        for (std::size_t c = 0; c < out_cols.size(); ++c)
          key[c] = sources[c].from_acc ? akey[sources[c].index] : tuple[sources[c].index];
        sink(key, p);
      }
    }
  }

  template <class F>
  ProbTable combine(const ProbTable& a, const ProbTable& b, const PlanNode& n, F op) {
    const double def = op(a.default_p(), b.default_p());
    if (a.is_scalar() || b.is_scalar()) {
      const ProbTable& t = a.is_scalar() ? b : a;
      const double s = a.is_scalar() ? a.value() : b.value();
      ProbTable out(t.columns(), a.is_scalar() ? op(s, t.default_p()) : op(t.default_p(), s));
      out.reserve(t.size());
      for (std::size_t r = 0; r < t.size(); ++r) out.add(t.key(r), a.is_scalar() ? op(s, t.p(r)) : op(t.p(r), s));
      return out;
    }
    if (a.columns() == b.columns()) {
      ProbTable out(a.columns(), def);
      out.reserve(a.size() + b.size());
      for (std::size_t r = 0; r < a.size(); ++r) out.add(a.key(r), op(a.p(r), b.lookup(a.key(r))));
      for (std::size_t r = 0; r < b.size(); ++r)
        if (!a.find(b.key(r))) out.add(b.key(r), op(a.default_p(), b.p(r)));
      return out;
    }
    // Rows of one side whose partner is absent must agree with the default.
    auto absorbed = [&](const ProbTable& t, bool t_is_a, double other_default) {
      for (std::size_t r = 0; r < t.size(); ++r) {
        double v = t_is_a ? op(t.p(r), other_default) : op(other_default, t.p(r));
        if (std::abs(v - def) > 1e-15) return false;
      }
      return true;
    };
    auto cols = merge_columns(a.columns(), b.columns());
    ProbTable out(cols, def);
    if (subset(a.columns(), b.columns()) || subset(b.columns(), a.columns())) {
      const bool a_small = subset(a.columns(), b.columns());
      const ProbTable& small = a_small ? a : b;
      const ProbTable& big = a_small ? b : a;
      if (!absorbed(small, a_small, big.default_p()))
        schema_failure(n, "operand over fewer columns is not absorbed by the default");
      auto pos = positions(small.columns(), big.columns());
      std::vector<Symbol> sub(pos.size());
      out.reserve(big.size());
      for (std::size_t r = 0; r < big.size(); ++r) {
        auto k = big.key(r);
        for (std::size_t i = 0; i < pos.size(); ++i) sub[i] = k[pos[i]];
        double ps = small.lookup(sub);
        out.add(k, a_small ? op(ps, big.p(r)) : op(big.p(r), ps));
      }
      return out;
    }
    if (!absorbed(a, true, b.default_p()) || !absorbed(b, false, a.default_p()))
      schema_failure(n, "operands over unrelated columns with non-absorbing defaults");
    std::vector<std::string> shared;
    std::set_intersection(a.columns().begin(), a.columns().end(), b.columns().begin(), b.columns().end(),
                          std::back_inserter(shared));
    auto pa = positions(shared, a.columns());
    auto pb = positions(shared, b.columns());
    std::unordered_multimap<std::size_t, std::uint32_t> by_shared;
    auto shared_hash = [](std::span<const Symbol> k, const std::vector<std::size_t>& pos) {
      std::size_t h = 0x84222325ull;
      for (auto p : pos) h = (h ^ k[p].id()) * 0x100000001b3ull;
      return h;
    };
    for (std::size_t r = 0; r < b.size(); ++r) by_shared.emplace(shared_hash(b.key(r), pb), static_cast<std::uint32_t>(r));
    std::vector<Symbol> key(cols.size());
    for (std::size_t r = 0; r < a.size(); ++r) {
      auto ka = a.key(r);
      auto [lo, hi] = by_shared.equal_range(shared_hash(ka, pa));
      for (auto it = lo; it != hi; ++it) {
        auto kb = b.key(it->second);
        bool eq = true;
        for (std::size_t i = 0; i < pa.size() && eq; ++i) eq = ka[pa[i]] == kb[pb[i]];
        if (!eq) continue;
        for (std::size_t c = 0; c < cols.size(); ++c) {
          auto ia = a.column_index(cols[c]);
          key[c] = ia ? ka[*ia] : kb[*b.column_index(cols[c])];
        }
        out.add(key, op(a.p(r), b.p(it->second)));
      }
    }
    return out;
  }

  template <class F>
  ProbTable fold(const PlanNode& n, F op) {
    ProbTable acc = eval(*n.children.front());
    for (std::size_t i = 1; i < n.children.size(); ++i) acc = combine(acc, eval(*n.children[i]), n, op);
    return acc;
  }

  ProbTable inclusion_exclusion(const PlanNode& n) {
    auto scaled = [&](std::size_t i) {
      ProbTable t = eval(*n.children[i]);
      const double s = n.signs[i];
      for (std::size_t r = 0; r < t.size(); ++r) t.p(r) *= s;
      t.set_default(t.default_p() * s);
      return t;
    };
    ProbTable acc = scaled(0);
    for (std::size_t i = 1; i < n.children.size(); ++i)
      acc = combine(acc, scaled(i), n, [](double a, double b) { return a + b; });
    for (std::size_t r = 0; r < acc.size(); ++r) acc.p(r) = std::clamp(acc.p(r), 0.0, 1.0);
    acc.set_default(std::clamp(acc.default_p(), 0.0, 1.0));
    return acc;
  }

  ProbTable aggregate(const PlanNode& n) {
    const PlanNode& child = *n.children.front();
    const bool sum = n.op == Op::ExclusiveSum;
    auto keep = positions(n.columns, child.columns);
    ProbTable out(n.columns);
    // Per group: Neumaier sum of p (exclusive) or of log1p(-p) (independent).
    std::vector<double> acc, comp;
    double scalar_acc = 0.0, scalar_comp = 0.0;
    std::vector<Symbol> group(keep.size());
    auto add = [&](double& s, double& c, double x) {
      double t = s + x;
      c += std::abs(s) >= std::abs(x) ? (s - t) + x : (x - t) + s;
      s = t;
    };
    Sink sink = [&](std::span<const Symbol> key, double p) {
      // p = 1 maps to a finite log that expm1 still turns into exactly -1.
      double x = sum ? p : std::max(std::log1p(-p), -1000.0);
      if (out.is_scalar()) {
        add(scalar_acc, scalar_comp, x);
        return;
      }
      for (std::size_t i = 0; i < keep.size(); ++i) group[i] = key[keep[i]];
      std::size_t r = out.upsert(group, 0.0);
      if (r >= acc.size()) {
        acc.push_back(0.0);
        comp.push_back(0.0);
      }
      add(acc[r], comp[r], x);
    };
    if (child.columns.empty()) schema_failure(n, "aggregate over a column-less operand");
    if (child.op == Op::IndependentJoin) {
      double def = 0.0;
      join(child, sink, def);
      if (def != 0.0) schema_failure(n, std::string(lifted::op_name(n.op)) + " over a non-zero default");
    } else {
      ProbTable t = eval(child);
      require_zero_default(t, n);
      for (std::size_t r = 0; r < t.size(); ++r) sink(t.key(r), t.p(r));
    }
    auto finish = [&](double s, double c) {
      double v = s + c;
      return std::clamp(sum ? v : -std::expm1(v), 0.0, 1.0);
    };
    if (out.is_scalar()) {
      out.set_default(finish(scalar_acc, scalar_comp));
      return out;
    }
    for (std::size_t r = 0; r < out.size(); ++r) out.p(r) = finish(acc[r], comp[r]);
    return out;
  }

  const ProbDatabase& db_;
};

}  // namespace

ProbTable evaluate(const lifted::PlanNode& plan, const ProbDatabase& db) {
  ProbTable t = Evaluator(db).eval(plan);
  for (std::size_t r = 0; r < t.size(); ++r) t.p(r) = std::clamp(t.p(r), 0.0, 1.0);
  t.set_default(std::clamp(t.default_p(), 0.0, 1.0));
  return t;
}

}  // namespace probcbma::ra
