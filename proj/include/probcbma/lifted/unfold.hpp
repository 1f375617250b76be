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

#include <optional>

#include "probcbma/dsl/validate.hpp"
#include "probcbma/lifted/ucq.hpp"
#include "probcbma/probdb.hpp"

namespace probcbma::lifted {

// P[target | condition] = P[numerator] / P[denominator]. A SUCC query has no denominator.
struct UnfoldedQuery {
  UCQ numerator;
  std::optional<UCQ> denominator;
};

// Replaces intensional atoms by their rule bodies. Negated intensional atoms
// are resolved against a positive choice atom of the same disjunct: given
// C(z), not exists y. C(y) & psi(y) is equivalent to not psi(z).
UnfoldedQuery unfold(const dsl::Query& query, const dsl::ValidatedProgram& program, const Schema& schema);

// Unfolds `target & condition` with the target's variables free.
UCQ unfold_formula(const std::optional<dsl::Atom>& target, const dsl::Formula& condition,
                   const dsl::ValidatedProgram& program, const Schema& schema);

// Conjunctions of (atom, negated) equivalent to the formula.
std::vector<std::vector<Literal>> to_dnf(const dsl::Formula& formula);

}  // namespace probcbma::lifted
