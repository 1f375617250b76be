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

#include <string>

#include "probcbma/dsl/validate.hpp"
#include "probcbma/lifted/plan.hpp"
#include "probcbma/probdb.hpp"
#include "probcbma/ra/table.hpp"

namespace probcbma {

struct CompiledQuery {
  // Plan for P[target & condition]; columns are the target's variables.
  lifted::PlanPtr joint;
  // Plan for P[condition]; null for a SUCC query.
  lifted::PlanPtr condition;
};

// Unfolds the query against the program and compiles both parts. Throws
// UnsupportedQuery for unsafe queries.
CompiledQuery compile_query(const dsl::Query& query, const dsl::ValidatedProgram& program, const Schema& schema);

struct JointAnswer {
  ra::ProbTable joint;
  double condition = 1.0;

  ra::ProbTable conditional() const { return ra::conditional(joint, condition); }
};

JointAnswer lifted_joint(const dsl::Query& query, const dsl::ValidatedProgram& program, const ProbDatabase& db);

// P[target | condition] per binding of the target's variables.
ra::ProbTable lifted_query(const dsl::Query& query, const dsl::ValidatedProgram& program, const ProbDatabase& db);

// P[target | a or b] as the sum of the joints for (a & b), (a & !b) and
// (!a & b), divided by the sum of their conditions. Terms are
// TermAssociation constants.
ra::ProbTable lifted_disjunction_by_parts(const dsl::Atom& target, const std::string& a, const std::string& b,
                                          const dsl::ValidatedProgram& program, const ProbDatabase& db);

std::string explain_query(const dsl::Query& query, const dsl::ValidatedProgram& program, const Schema& schema);

}  // namespace probcbma
