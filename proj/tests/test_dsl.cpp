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

#include "probcbma/dsl/parser.hpp"
#include "probcbma/dsl/printer.hpp"
#include "probcbma/dsl/validate.hpp"
#include "probcbma/error.hpp"

using namespace probcbma;
using namespace probcbma::dsl;

namespace {

const char* kFourStudies = R"(
% two studies, one voxel each
0.5::SelectedStudy(s1); 0.5::SelectedStudy(s2) :- true.
VoxelReported(v1, s1).
VoxelReported(v2, s2).
1.0::TermInStudy(insula, s1).
0.3::TermInStudy(speech, s2).
Activation(v) :- SelectedStudy(s), VoxelReported(v, s).
TermAssociation(t) :- SelectedStudy(s), TermInStudy(t, s).
)";

}  // namespace

TEST(Parser, ActivationRule) {
  Program p = parse_program("Activation(v) :- SelectedStudy(s), VoxelReported(v, s).");
  ASSERT_EQ(p.rules.size(), 1u);
  const auto& r = p.rules[0];
  EXPECT_EQ(to_string(r.head), "Activation(v)");
  ASSERT_EQ(r.body.size(), 2u);
  EXPECT_EQ(to_string(r.body[0].atom), "SelectedStudy(s)");
  EXPECT_EQ(to_string(r.body[1].atom), "VoxelReported(v, s)");
  EXPECT_FALSE(r.body[0].negated);
}

TEST(Parser, ProbabilisticFact) {
  Program p = parse_program("0.7::TermInStudy(insula, s1).");
  ASSERT_EQ(p.facts.size(), 1u);
  EXPECT_EQ(p.facts[0].relation, "TermInStudy");
  ASSERT_EQ(p.facts[0].tuples.size(), 1u);
  EXPECT_DOUBLE_EQ(p.facts[0].tuples[0].p, 0.7);
  EXPECT_EQ(p.facts[0].tuples[0].args[1].str(), "s1");
}

TEST(Parser, ChoiceBlock) {
  Program p = parse_program("0.25::S(a); 0.75::S(b) :- true.");
  ASSERT_EQ(p.choices.size(), 1u);
  EXPECT_EQ(p.choices[0].tuples.size(), 2u);
  EXPECT_DOUBLE_EQ(p.choices[0].tuples[1].p, 0.75);
}

TEST(Parser, BareFactHasProbabilityOne) {
  Program p = parse_program("VoxelReported(v1, s1).");
  ASSERT_EQ(p.facts.size(), 1u);
  EXPECT_DOUBLE_EQ(p.facts[0].tuples[0].p, 1.0);
}

TEST(Parser, ProbabilityOutOfRange) {
  EXPECT_THROW(parse_program("1.5::R(a)."), ProbabilityRangeError);
  EXPECT_THROW(parse_program("-0.1::R(a)."), Error);
}

TEST(Parser, ArityMismatch) { EXPECT_THROW(parse_program("R(a).\nR(a, b)."), ArityError); }

TEST(Parser, DuplicateFact) { EXPECT_THROW(parse_program("0.2::R(a).\n0.3::R(a)."), ParseError); }

TEST(Parser, ErrorNamesLine) {
  try {
    parse_program("R(a).\n\nS(b) :- \n", "f.npl");
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.file(), "f.npl");
    EXPECT_GE(e.line(), 3);
  }
}

TEST(Parser, MixedChoiceRelationsRejected) { EXPECT_THROW(parse_program("0.5::A(a); 0.5::B(b) :- true."), ParseError); }

TEST(Parser, QueryConditional) {
  Query q = parse_query("Activation(v) | insula & speech");
  EXPECT_EQ(q.kind, QueryKind::Conditional);
  EXPECT_EQ(to_string(q.target), "Activation(v)");
  ASSERT_TRUE(q.condition);
  EXPECT_EQ(q.condition->kind, Formula::Kind::And);
  ASSERT_EQ(q.condition->children.size(), 2u);
  EXPECT_EQ(to_string(q.condition->children[0].atom), "TermAssociation('insula')");
}

TEST(Parser, QuerySucc) {
  Query q = parse_query("Activation(v)");
  EXPECT_EQ(q.kind, QueryKind::Succ);
  EXPECT_FALSE(q.condition);
}

TEST(Parser, FormulaPrecedence) {
  Formula f = parse_formula("(a | b) & (c | d)");
  ASSERT_EQ(f.kind, Formula::Kind::And);
  EXPECT_EQ(f.children[0].kind, Formula::Kind::Or);
  Formula g = parse_formula("a & b | !c");
  ASSERT_EQ(g.kind, Formula::Kind::Or);
  EXPECT_EQ(g.children[0].kind, Formula::Kind::And);
  EXPECT_EQ(g.children[1].kind, Formula::Kind::Not);
}

TEST(Parser, QuotedConstants) {
  Query q = parse_query("Activation(v) | 'left insula'");
  EXPECT_EQ(q.condition->atom.args[0].value().str(), "left insula");
}

TEST(Printer, RoundTrip) {
  Program p = parse_program(kFourStudies);
  std::string text = print_program(p);
  Program again = parse_program(text);
  EXPECT_EQ(print_program(again), text);
  EXPECT_EQ(again.rules.size(), 2u);
  EXPECT_EQ(again.choices.size(), 1u);
}

TEST(Printer, Probability) {
  EXPECT_EQ(format_probability(1.0), "1.0");
  EXPECT_EQ(format_probability(0.3), "0.3");
  EXPECT_EQ(format_probability(0.1 + 0.2), "0.30000000000000004");
}

TEST(Validate, FourStudyProgramIsValid) {
  ValidatedProgram vp = validate_program(parse_program(kFourStudies));
  EXPECT_TRUE(vp.is_intensional("Activation"));
  EXPECT_TRUE(vp.is_choice("SelectedStudy"));
  EXPECT_FALSE(vp.is_intensional("TermInStudy"));
  EXPECT_EQ(vp.evaluation_order().size(), 2u);
}

TEST(Validate, Recursion) {
  try {
    validate_program(parse_program("B(a).\nA(x) :- A(y), B(x)."));
    FAIL();
  } catch (const RecursionError& e) {
    ASSERT_FALSE(e.cycle().empty());
    EXPECT_EQ(e.cycle().front(), "A");
  }
}

TEST(Validate, MutualRecursion) {
  EXPECT_THROW(validate_program(parse_program("C(a).\nA(x) :- B(x).\nB(x) :- A(x), C(x).")), RecursionError);
}

TEST(Validate, UnsafeHeadVariable) {
  try {
    validate_program(parse_program("B(a).\nH(x, z) :- B(x)."));
    FAIL();
  } catch (const UnsafeVariableError& e) {
    EXPECT_EQ(e.variable(), "z");
  }
}

TEST(Validate, ChoiceSumAboveOne) {
  EXPECT_THROW(validate_program(parse_program("0.6::S(a); 0.6::S(b) :- true.")), ChoiceSumError);
}

TEST(Validate, NegationInRuleBody) {
  EXPECT_THROW(validate_program(parse_program("B(a). C(a).\nH(x) :- B(x), not C(x).")), ValidationError);
}

TEST(Validate, RuleForExtensionalRelation) {
  EXPECT_THROW(validate_program(parse_program("0.5::B(a).\nB(x) :- C(x).")), ValidationError);
}

TEST(Validate, CopiesShareRules) {
  ValidatedProgram a = validate_program(parse_program(kFourStudies));
  ValidatedProgram b = a;
  a = validate_program(parse_program("R(a)."));
  ASSERT_EQ(b.rules_for("Activation").size(), 1u);
  EXPECT_EQ(to_string(b.rules_for("Activation")[0]->head), "Activation(v)");
}
