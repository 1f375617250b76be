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

#include <initializer_list>
#include <random>
#include <string>
#include <vector>

#include "probcbma/cbma/dataset.hpp"
#include "probcbma/dsl/ast.hpp"
#include "probcbma/lifted/ucq.hpp"
#include "probcbma/probdb.hpp"

namespace probcbma::testing {

// Arguments written 'a' are constants, anything else is a variable.
inline dsl::Atom atom(const std::string& predicate, std::initializer_list<std::string> args) {
  dsl::Atom a;
  a.predicate = predicate;
  for (const auto& s : args)
    a.args.push_back(s.size() >= 2 && s.front() == '\'' ? dsl::Term::constant(s.substr(1, s.size() - 2))
                                                        : dsl::Term::var(s));
  return a;
}

inline lifted::Literal pos(dsl::Atom a) { return {std::move(a), false}; }
inline lifted::Literal neg(dsl::Atom a) { return {std::move(a), true}; }

inline lifted::UCQ ucq(std::vector<std::vector<lifted::Literal>> disjuncts, std::vector<std::string> free = {}) {
  lifted::UCQ q;
  q.free_vars = std::move(free);
  for (auto& d : disjuncts) q.disjuncts.push_back(lifted::CQ{std::move(d)});
  return q;
}

inline double uniform(std::mt19937_64& rng, double lo = 0.0, double hi = 1.0) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

inline std::size_t pick(std::mt19937_64& rng, std::size_t lo, std::size_t hi) {
  return std::uniform_int_distribution<std::size_t>(lo, hi)(rng);
}

struct DatasetShape {
  std::size_t max_studies = 8;
  std::size_t max_terms = 4;
  std::size_t max_voxels = 4;
  // TF-IDF values are kept at least this far from tau.
  double tau = 0.1;
  double margin = 0.0;
  double density = 0.7;
};

// Random small dataset; terms are named t0, t1, ...
inline cbma::CbmaDataset random_dataset(std::mt19937_64& rng, const DatasetShape& shape = {}) {
  const std::size_t n = pick(rng, 1, shape.max_studies);
  const std::size_t m = pick(rng, 1, shape.max_terms);
  const std::size_t k = pick(rng, 1, shape.max_voxels);
  std::vector<Symbol> studies, terms, voxels;
  for (std::size_t i = 0; i < n; ++i) studies.push_back(Symbol::intern("s" + std::to_string(i)));
  for (std::size_t j = 0; j < m; ++j) terms.push_back(Symbol::intern("t" + std::to_string(j)));
  for (std::size_t v = 0; v < k; ++v) voxels.push_back(Symbol::intern("v" + std::to_string(v)));
  std::vector<cbma::FeatureEntry> x;
  std::vector<cbma::ActivationEntry> y;
  for (std::uint32_t i = 0; i < n; ++i) {
    for (std::uint32_t j = 0; j < m; ++j) {
      if (uniform(rng) > shape.density) continue;
      double value;
      do value = uniform(rng, 0.0, 0.3);
      while (std::abs(value - shape.tau) < shape.margin);
      x.push_back({i, j, value});
    }
    for (std::uint32_t v = 0; v < k; ++v)
      if (uniform(rng) < 0.5) y.push_back({i, v});
  }
  return cbma::CbmaDataset(std::move(studies), std::move(terms), std::move(voxels), std::move(x), std::move(y));
}

inline cbma::CbmaDataset make_dataset(const std::vector<std::string>& study_ids, const std::vector<std::string>& term_ids,
                                      const std::vector<std::string>& voxel_ids,
                                      const std::vector<std::vector<double>>& x,
                                      const std::vector<std::vector<int>>& y) {
  std::vector<Symbol> s, t, v;
  for (const auto& id : study_ids) s.push_back(Symbol::intern(id));
  for (const auto& id : term_ids) t.push_back(Symbol::intern(id));
  for (const auto& id : voxel_ids) v.push_back(Symbol::intern(id));
  std::vector<cbma::FeatureEntry> xe;
  std::vector<cbma::ActivationEntry> ye;
  for (std::uint32_t i = 0; i < x.size(); ++i)
    for (std::uint32_t j = 0; j < x[i].size(); ++j)
      if (x[i][j] > 0) xe.push_back({i, j, x[i][j]});
  for (std::uint32_t i = 0; i < y.size(); ++i)
    for (std::uint32_t k = 0; k < y[i].size(); ++k)
      if (y[i][k]) ye.push_back({i, k});
  return cbma::CbmaDataset(std::move(s), std::move(t), std::move(v), std::move(xe), std::move(ye));
}

// Random tuple-independent database over unary R, T and binary S, plus an
// optional choice relation C, with at most `max_tuples` uncertain tuples.
inline ProbDatabase random_database(std::mt19937_64& rng, std::size_t max_tuples = 12, bool with_choice = true) {
  const std::vector<std::string> domain{"a", "b", "c"};
  ProbDatabase db;
  ProbRelation r("R", 1), t("T", 1), s("S", 2), c("C", 1, Semantics::Choice);
  std::size_t budget = max_tuples;
  auto prob = [&] {
    double u = uniform(rng);
    return u < 0.1 ? 1.0 : uniform(rng, 0.05, 0.95);
  };
  for (const auto& x : domain) {
    if (budget && uniform(rng) < 0.6) {
      r.add({x}, prob());
      --budget;
    }
    if (budget && uniform(rng) < 0.6) {
      t.add({x}, prob());
      --budget;
    }
    for (const auto& y : domain)
      if (budget && uniform(rng) < 0.35) {
        s.add({x, y}, prob());
        --budget;
      }
  }
  db.add(std::move(r));
  db.add(std::move(t));
  db.add(std::move(s));
  if (with_choice) {
    double left = uniform(rng, 0.5, 1.0);
    for (const auto& x : domain) {
      if (!budget || uniform(rng) < 0.3) continue;
      double p = x == domain.back() ? left : uniform(rng, 0.0, left);
      c.add({x}, p);
      left -= p;
      --budget;
    }
    db.add(std::move(c));
  }
  return db;
}

}  // namespace probcbma::testing
