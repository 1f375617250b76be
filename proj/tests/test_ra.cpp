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

#include <gtest/gtest.h>

#include "helpers.hpp"
#include "probcbma/error.hpp"
#include "probcbma/lifted/compiler.hpp"
#include "probcbma/ra/evaluate.hpp"
#include "probcbma/ra/table.hpp"

using namespace probcbma;
using namespace probcbma::lifted;
using namespace probcbma::testing;

namespace {

ProbDatabase small_db() {
  ProbDatabase db;
  ProbRelation r("R", 1), s("S", 2), c("C", 1, Semantics::Choice);
  r.add({"a"}, 0.5);
  r.add({"b"}, 0.5);
  s.add({"a", "x"}, 0.2);
  s.add({"a", "y"}, 0.3);
  s.add({"b", "x"}, 1.0);
  c.add({"a"}, 0.25);
  c.add({"b"}, 0.25);
  db.add(std::move(r));
  db.add(std::move(s));
  db.add(std::move(c));
  return db;
}

}  // namespace

TEST(ProbTable, ScalarAndLookup) {
  auto t = ra::ProbTable::scalar(0.3);
  EXPECT_TRUE(t.is_scalar());
  EXPECT_DOUBLE_EQ(t.value(), 0.3);
  ra::ProbTable u({"x"}, 0.1);
  u.add({"a"}, 0.7);
  EXPECT_DOUBLE_EQ(u.lookup({"a"}), 0.7);
  EXPECT_DOUBLE_EQ(u.lookup({"zzz"}), 0.1);
}

TEST(ProbTable, TsvIsSortedByKey) {
  ra::ProbTable t({"v"});
  t.add({"v2"}, 0.5);
  t.add({"v1"}, 0.25);
  EXPECT_EQ(t.to_tsv(), "v\tp\nv1\t0.25\nv2\t0.5\n");
}

TEST(Evaluate, LookupReadsRelation) {
  auto db = small_db();
  auto t = ra::evaluate(*make_lookup(atom("S", {"'a'", "y"})), db);
  EXPECT_EQ(t.columns(), std::vector<std::string>{"y"});
  EXPECT_DOUBLE_EQ(t.lookup({"x"}), 0.2);
  EXPECT_DOUBLE_EQ(t.lookup({"y"}), 0.3);
  EXPECT_DOUBLE_EQ(t.default_p(), 0.0);
}

TEST(Evaluate, RepeatedVariableIsEquality) {
  ProbDatabase db;
  ProbRelation s("S", 2);
  s.add({"a", "a"}, 0.4);
  s.add({"a", "b"}, 0.6);
  db.add(std::move(s));
  auto t = ra::evaluate(*make_lookup(atom("S", {"x", "x"})), db);
  EXPECT_EQ(t.size(), 1u);
  EXPECT_DOUBLE_EQ(t.lookup({"a"}), 0.4);
}

TEST(Evaluate, IndependentProject) {
  auto db = small_db();
  auto t = ra::evaluate(*make_project({"x"}, make_lookup(atom("R", {"x"}))), db);
  EXPECT_DOUBLE_EQ(t.value(), 0.75);
}

TEST(Evaluate, ExclusiveSum) {
  auto db = small_db();
  auto t = ra::evaluate(*make_exclusive_sum({"x"}, make_lookup(atom("C", {"x"}))), db);
  EXPECT_DOUBLE_EQ(t.value(), 0.5);
}

TEST(Evaluate, JoinThenProject) {
  auto db = small_db();
  auto plan = make_join({make_lookup(atom("R", {"'a'"})), make_project({"y"}, make_lookup(atom("S", {"'a'", "y"})))});
  EXPECT_NEAR(ra::evaluate(*plan, db).value(), 0.5 * (1 - 0.8 * 0.7), 1e-15);
}

TEST(Evaluate, ComplementFlipsDefault) {
  auto db = small_db();
  auto t = ra::evaluate(*make_complement(make_lookup(atom("R", {"x"}))), db);
  EXPECT_DOUBLE_EQ(t.lookup({"a"}), 0.5);
  EXPECT_DOUBLE_EQ(t.lookup({"zzz"}), 1.0);
}

TEST(Evaluate, Selection) {
  auto db = small_db();
  auto t = ra::evaluate(*make_selection("y", Symbol::intern("x"), make_lookup(atom("S", {"x", "y"}))), db);
  EXPECT_DOUBLE_EQ(t.lookup({"a", "x"}), 0.2);
  EXPECT_DOUBLE_EQ(t.lookup({"a", "y"}), 0.0);
}

TEST(Evaluate, InclusionExclusion) {
  auto db = small_db();
  auto a = make_lookup(atom("R", {"'a'"}));
  auto b = make_lookup(atom("R", {"'b'"}));
  auto plan = make_inclusion_exclusion({a, b, make_join({a, b})}, {1, 1, -1});
  EXPECT_DOUBLE_EQ(ra::evaluate(*plan, db).value(), 0.75);
}

TEST(Evaluate, ProjectRejectsNonZeroDefault) {
  EXPECT_THROW(make_project({"x"}, make_complement(make_lookup(atom("R", {"x"})))), UnsupportedQuery);
}

TEST(Conditional, DividesEveryRow) {
  ra::ProbTable t({"v"});
  t.add({"v1"}, 0.2);
  auto c = ra::conditional(t, 0.4);
  EXPECT_DOUBLE_EQ(c.lookup({"v1"}), 0.5);
}

TEST(Conditional, ZeroCondition) {
  EXPECT_THROW(ra::conditional(ra::ProbTable::scalar(0.0), 0.0), ZeroConditionError);
  EXPECT_THROW(ra::conditional(ra::ProbTable::scalar(0.0), 1e-16), ZeroConditionError);
}

TEST(MaxAbsDifference, UsesDefaults) {
  ra::ProbTable a({"v"}), b({"v"});
  a.add({"v1"}, 0.2);
  b.add({"v2"}, 0.1);
  EXPECT_DOUBLE_EQ(ra::max_abs_difference(a, b), 0.2);
}

// Raising one tuple's probability never lowers a positive query.
TEST(Property, PositiveQueriesAreMonotone) {
  std::mt19937_64 rng(77);
  const std::vector<UCQ> queries{
      ucq({{pos(atom("R", {"x"})), pos(atom("S", {"x", "y"}))}}),
      ucq({{pos(atom("R", {"x"}))}, {pos(atom("T", {"x"}))}}),
      ucq({{pos(atom("C", {"x"})), pos(atom("S", {"x", "y"}))}}),
      ucq({{pos(atom("S", {"x", "y"})), pos(atom("T", {"y"}))}}),
  };
  for (int trial = 0; trial < 200; ++trial) {
    ProbDatabase db = random_database(rng, 10, false);
    const auto& q = queries[trial % queries.size()];
    if (q.disjuncts[0].literals[0].atom.predicate == "C") {
      ProbRelation c("C", 1, Semantics::Choice);
      c.add({"a"}, 0.3);
      c.add({"b"}, 0.3);
      db.add(std::move(c));
    }
    auto plan = compile(q, db.schema());
    double before = ra::evaluate(*plan, db).value();
    const auto& s = db.at("S");
    if (s.size() == 0) continue;
    std::size_t row = pick(rng, 0, s.size() - 1);
    ProbRelation raised("S", 2);
    for (std::size_t i = 0; i < s.size(); ++i) raised.add(s.row(i), i == row ? std::min(1.0, s.prob(i) + 0.2) : s.prob(i));
    db.put(std::move(raised));
    EXPECT_GE(ra::evaluate(*plan, db).value(), before - 1e-12);
  }
}
