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

#include <map>

#include "helpers.hpp"
#include "probcbma/dsl/parser.hpp"
#include "probcbma/dsl/validate.hpp"
#include "probcbma/engine.hpp"
#include "probcbma/error.hpp"
#include "probcbma/lifted/choices.hpp"
#include "probcbma/lifted/compiler.hpp"
#include "probcbma/lifted/unfold.hpp"
#include "probcbma/oracle.hpp"
#include "probcbma/ra/evaluate.hpp"

using namespace probcbma;
using namespace probcbma::lifted;
using namespace probcbma::testing;

namespace {

const char* kRules = R"(
Activation(v) :- SelectedStudy(s), VoxelReported(v, s).
TermAssociation(t) :- SelectedStudy(s), TermInStudy(t, s).
)";

Schema cbma_schema() {
  return Schema{{"SelectedStudy", {1, Semantics::Choice}},
                {"VoxelReported", {2, Semantics::Independent}},
                {"TermInStudy", {2, Semantics::Independent}}};
}

Schema rst_schema() {
  return Schema{{"R", {1, Semantics::Independent}},
                {"S", {2, Semantics::Independent}},
                {"T", {1, Semantics::Independent}},
                {"C", {1, Semantics::Choice}}};
}

std::multiset<std::string> predicates(const CQ& q) {
  std::multiset<std::string> out;
  for (const auto& l : q.literals) out.insert((l.negated ? "!" : "") + l.atom.predicate);
  return out;
}

// Renames every variable of a query with a random permutation of fresh names.
UCQ rename(const UCQ& q, std::mt19937_64& rng) {
  auto vars = variables(q);
  std::vector<std::string> names;
  for (std::size_t i = 0; i < vars.size(); ++i) names.push_back("r" + std::to_string(i));
  std::shuffle(names.begin(), names.end(), rng);
  Substitution s;
  std::size_t i = 0;
  for (const auto& v : vars) s.emplace(v, Term::var(names[i++]));
  UCQ out;
  for (const auto& f : q.free_vars) out.free_vars.push_back(s.at(f).name());
  for (const auto& d : q.disjuncts) out.disjuncts.push_back(substitute(s, d));
  std::shuffle(out.disjuncts.begin(), out.disjuncts.end(), rng);
  return out;
}

// Random UCQ over R(x), S(x, y), T(y), C(x) with at most three disjuncts.
UCQ random_query(std::mt19937_64& rng, bool free_x) {
  const std::vector<std::string> vars{"x", "y"};
  const std::vector<std::string> consts{"'a'", "'b'", "'c'"};
  auto term = [&] { return uniform(rng) < 0.75 ? vars[pick(rng, 0, 1)] : consts[pick(rng, 0, 2)]; };
  UCQ q;
  if (free_x) q.free_vars = {"x"};
  const std::size_t n = pick(rng, 1, 3);
  for (std::size_t d = 0; d < n; ++d) {
    CQ cq;
    const std::size_t k = pick(rng, 1, 3);
    for (std::size_t i = 0; i < k; ++i) {
      switch (pick(rng, 0, 3)) {
        case 0: cq.literals.push_back(pos(atom("R", {term()}))); break;
        case 1: cq.literals.push_back(pos(atom("S", {term(), term()}))); break;
        case 2: cq.literals.push_back(pos(atom("T", {term()}))); break;
        default: cq.literals.push_back(pos(atom("C", {term()}))); break;
      }
    }
    if (free_x) cq.literals.push_back(pos(atom("R", {"x"})));
    if (uniform(rng) < 0.3) {
      // Negate a copy of an unrelated atom over variables already bound.
      std::set<std::string> bound;
      for (const auto& l : cq.literals)
        for (const auto& t : l.atom.args)
          if (t.is_var()) bound.insert(t.name());
      if (bound.count("x")) cq.literals.push_back(neg(atom(uniform(rng) < 0.5 ? "T" : "R", {"x"})));
    }
    q.disjuncts.push_back(std::move(cq));
  }
  return q;
}

}  // namespace

TEST(Unfold, Activation) {
  auto vp = dsl::validate_program(dsl::parse_program(kRules));
  auto u = unfold(dsl::parse_query("Activation(v)"), vp, cbma_schema());
  ASSERT_EQ(u.numerator.disjuncts.size(), 1u);
  EXPECT_EQ(predicates(u.numerator.disjuncts[0]), (std::multiset<std::string>{"SelectedStudy", "VoxelReported"}));
  EXPECT_EQ(u.numerator.free_vars, std::vector<std::string>{"v"});
  EXPECT_FALSE(u.denominator);
}

TEST(Unfold, TermAssociation) {
  auto vp = dsl::validate_program(dsl::parse_program(kRules));
  UCQ q = unfold_formula(std::nullopt, dsl::parse_formula("insula"), vp, cbma_schema());
  ASSERT_EQ(q.disjuncts.size(), 1u);
  EXPECT_EQ(predicates(q.disjuncts[0]), (std::multiset<std::string>{"SelectedStudy", "TermInStudy"}));
  for (const auto& l : q.disjuncts[0].literals)
    if (l.atom.predicate == "TermInStudy") {
      EXPECT_EQ(l.atom.args[0].value().str(), "insula");
    }
}

TEST(Unfold, ExtensionalQueryIsItself) {
  auto vp = dsl::validate_program(dsl::parse_program(kRules));
  auto u = unfold(dsl::parse_query("VoxelReported(v, s)"), vp, cbma_schema());
  ASSERT_EQ(u.numerator.disjuncts.size(), 1u);
  ASSERT_EQ(u.numerator.disjuncts[0].literals.size(), 1u);
  EXPECT_EQ(u.numerator.disjuncts[0].literals[0].atom.predicate, "VoxelReported");
}

TEST(Unfold, ConditionalHasDenominator) {
  auto vp = dsl::validate_program(dsl::parse_program(kRules));
  auto u = unfold(dsl::parse_query("Activation(v) | insula & speech"), vp, cbma_schema());
  ASSERT_TRUE(u.denominator);
  EXPECT_EQ(predicates(u.numerator.disjuncts[0]).count("TermInStudy"), 2u);
  EXPECT_TRUE(u.denominator->free_vars.empty());
}

TEST(Safety, CanonicalUnsafeQuery) {
  auto h0 = ucq({{pos(atom("R", {"x"})), pos(atom("S", {"x", "y"}))}, {pos(atom("S", {"x", "y"})), pos(atom("T", {"y"}))}});
  auto verdict = check_safety(h0, rst_schema());
  EXPECT_FALSE(verdict.safe);
  EXPECT_FALSE(verdict.witness.empty());
  EXPECT_THROW(compile(h0, rst_schema()), UnsupportedQuery);
  try {
    compile(h0, rst_schema());
  } catch (const UnsupportedQuery& e) {
    EXPECT_NE(std::string(e.what()).find("oracle"), std::string::npos);
  }
}

TEST(Safety, NonHierarchicalConjunction) {
  auto q = ucq({{pos(atom("R", {"x"})), pos(atom("S", {"x", "y"})), pos(atom("T", {"y"}))}});
  EXPECT_FALSE(check_safety(q, rst_schema()).safe);
}

TEST(Safety, GroundAtomIsLookup) {
  auto verdict = check_safety(ucq({{pos(atom("R", {"'a'"}))}}), rst_schema());
  ASSERT_TRUE(verdict.safe);
  EXPECT_EQ(verdict.plan->op, Op::GroundLookup);
}

TEST(Safety, TwoTermConjunctionIsSafe) {
  auto vp = dsl::validate_program(dsl::parse_program(kRules));
  auto u = unfold(dsl::parse_query("Activation(v) | insula & speech"), vp, cbma_schema());
  EXPECT_TRUE(check_safety(u.numerator, cbma_schema()).safe);
  EXPECT_TRUE(check_safety(*u.denominator, cbma_schema()).safe);
}

TEST(Safety, VerdictsStableUnderRenaming) {
  std::mt19937_64 rng(21);
  auto h0 = ucq({{pos(atom("R", {"x"})), pos(atom("S", {"x", "y"}))}, {pos(atom("S", {"x", "y"})), pos(atom("T", {"y"}))}});
  for (int i = 0; i < 50; ++i) {
    EXPECT_FALSE(check_safety(rename(h0, rng), rst_schema()).safe);
    UCQ q = random_query(rng, i % 2 == 0);
    bool safe = check_safety(q, rst_schema()).safe;
    EXPECT_EQ(check_safety(rename(q, rng), rst_schema()).safe, safe) << to_string(q);
  }
}

TEST(Compile, ExclusiveSumOverStudies) {
  auto q = ucq({{pos(atom("SelectedStudy", {"s"})), pos(atom("VoxelReported", {"v", "s"}))}}, {"v"});
  PlanPtr plan = compile(q, cbma_schema());
  EXPECT_EQ(plan->op, Op::ExclusiveSum);
  EXPECT_EQ(plan->columns, std::vector<std::string>{"v"});
  EXPECT_EQ(count_ops(*plan, Op::ExclusiveSum), 1u);
  EXPECT_EQ(count_ops(*plan, Op::IndependentProject), 0u);
}

TEST(Compile, IndependentFactsMultiply) {
  auto q = ucq({{pos(atom("R", {"'a'"})), pos(atom("T", {"'b'"}))}});
  PlanPtr plan = compile(q, rst_schema());
  EXPECT_EQ(plan->op, Op::IndependentJoin);
  ProbDatabase db;
  ProbRelation r("R", 1), t("T", 1);
  r.add({"a"}, 0.5);
  t.add({"b"}, 0.4);
  db.add(std::move(r));
  db.add(std::move(t));
  EXPECT_DOUBLE_EQ(ra::evaluate(*plan, db).value(), 0.2);
}

TEST(Compile, DisjunctionIsNoisyOr) {
  auto q = ucq({{pos(atom("R", {"x"}))}, {pos(atom("T", {"x"}))}}, {"x"});
  PlanPtr plan = compile(q, rst_schema());
  EXPECT_EQ(plan->op, Op::IndependentUnion);
  ProbDatabase db;
  ProbRelation r("R", 1), t("T", 1);
  r.add({"a"}, 0.5);
  t.add({"a"}, 0.4);
  t.add({"b"}, 0.3);
  db.add(std::move(r));
  db.add(std::move(t));
  auto out = ra::evaluate(*plan, db);
  EXPECT_DOUBLE_EQ(out.lookup({"a"}), 1 - 0.5 * 0.6);
  EXPECT_DOUBLE_EQ(out.lookup({"b"}), 0.3);
}

TEST(Compile, SeparatorProjection) {
  auto q = ucq({{pos(atom("R", {"x"})), pos(atom("S", {"x", "y"}))}});
  PlanPtr plan = compile(q, rst_schema());
  EXPECT_EQ(plan->op, Op::IndependentProject);
}

TEST(Compile, UnknownRelation) {
  EXPECT_THROW(compile(ucq({{pos(atom("Nope", {"x"}))}}), rst_schema()), Error);
}

TEST(Choices, SameChoiceUnifies) {
  auto q = ucq({{pos(atom("C", {"x"})), pos(atom("C", {"y"})), pos(atom("S", {"x", "y"}))}});
  UCQ r = rewrite_choices(q, rst_schema());
  ASSERT_EQ(r.disjuncts.size(), 1u);
  std::size_t choice_atoms = 0;
  for (const auto& l : r.disjuncts[0].literals) choice_atoms += l.atom.predicate == "C";
  EXPECT_EQ(choice_atoms, 1u);
  const auto& s = std::find_if(r.disjuncts[0].literals.begin(), r.disjuncts[0].literals.end(),
                               [](const Literal& l) { return l.atom.predicate == "S"; })
                      ->atom;
  EXPECT_EQ(s.args[0], s.args[1]);
}

TEST(Choices, DistinctGroundTuplesExclude) {
  auto q = ucq({{pos(atom("C", {"'a'"})), pos(atom("C", {"'b'"}))}});
  UCQ r = rewrite_choices(q, rst_schema());
  EXPECT_TRUE(r.disjuncts.empty());
}

TEST(Choices, NoChoiceUnchanged) {
  auto q = ucq({{pos(atom("R", {"x"})), pos(atom("S", {"x", "y"}))}});
  UCQ r = rewrite_choices(q, rst_schema());
  ASSERT_EQ(r.disjuncts.size(), 1u);
  EXPECT_EQ(r.disjuncts[0].literals.size(), 2u);
}

TEST(Choices, UnificationMatchesWorlds) {
  ProbDatabase db;
  db.add(make_equiprobable_choice("C", {Symbol::intern("a"), Symbol::intern("b"), Symbol::intern("c")}));
  ProbRelation s("S", 2);
  s.add({"a", "a"}, 0.5);
  s.add({"a", "b"}, 0.9);
  s.add({"c", "c"}, 0.2);
  db.add(std::move(s));
  db.add(ProbRelation("R", 1));
  db.add(ProbRelation("T", 1));
  auto q = ucq({{pos(atom("C", {"x"})), pos(atom("C", {"y"})), pos(atom("S", {"x", "y"}))}});
  double lifted = ra::evaluate(*compile(q, db.schema()), db).value();
  EXPECT_NEAR(lifted, oracle_prob(q, db).value(), 1e-12);
  EXPECT_NEAR(lifted, (0.5 + 0.2) / 3.0, 1e-12);
}

TEST(Compile, FullChoiceGroupSumsToOne) {
  ProbDatabase db;
  db.add(make_equiprobable_choice("C", {Symbol::intern("a"), Symbol::intern("b"), Symbol::intern("c")}));
  PlanPtr plan = compile(ucq({{pos(atom("C", {"x"}))}}), db.schema());
  EXPECT_EQ(plan->op, Op::ExclusiveSum);
  EXPECT_NEAR(ra::evaluate(*plan, db).value(), 1.0, 1e-15);
}

// Every safe random query agrees with world enumeration.
TEST(Soundness, RandomQueriesMatchOracle) {
  std::mt19937_64 rng(1234);
  int safe = 0;
  for (int trial = 0; trial < 400; ++trial) {
    ProbDatabase db = random_database(rng, 12);
    UCQ q = random_query(rng, trial % 3 == 0);
    auto verdict = check_safety(q, db.schema());
    if (!verdict.safe) continue;
    ++safe;
    auto lifted = ra::evaluate(*verdict.plan, db);
    auto exact = oracle_prob(q, db);
    ASSERT_LE(ra::max_abs_difference(lifted, exact), 1e-9)
        << to_string(q) << "\n" << explain(*verdict.plan) << lifted.to_tsv() << exact.to_tsv();
  }
  EXPECT_GT(safe, 150);
}

TEST(Engine, GroundTargetUsesSelection) {
  auto vp = dsl::validate_program(dsl::parse_program(std::string(kRules) + R"(
0.5::SelectedStudy(s1); 0.5::SelectedStudy(s2) :- true.
VoxelReported(v1, s1). VoxelReported(v2, s2). VoxelReported(v1, s2).
0.4::TermInStudy(insula, s1).
)"));
  auto db = database_from_program(vp);
  auto plans = compile_query(dsl::parse_query("Activation('v1') | insula"), vp, db.schema());
  EXPECT_EQ(plans.joint->op, Op::Selection);
  auto p = lifted_query(dsl::parse_query("Activation('v1') | insula"), vp, db);
  EXPECT_TRUE(p.is_scalar());
  EXPECT_NEAR(p.value(), 1.0, 1e-12);
  auto q = lifted_query(dsl::parse_query("Activation('v2') | insula"), vp, db);
  EXPECT_NEAR(q.value(), 0.0, 1e-12);
}

TEST(Engine, ExplainMentionsExclusiveSum) {
  auto vp = dsl::validate_program(dsl::parse_program(kRules));
  std::string text = explain_query(dsl::parse_query("Activation(v) | insula & speech"), vp, cbma_schema());
  EXPECT_NE(text.find("ExclusiveSum"), std::string::npos);
}
