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

#include <functional>
#include <map>
#include <string>
#include <vector>

#include "probcbma/dsl/validate.hpp"
#include "probcbma/lifted/ucq.hpp"
#include "probcbma/probdb.hpp"
#include "probcbma/ra/table.hpp"

namespace probcbma {

inline constexpr double kMaxWorlds = 1 << 20;

// Tuples present in one possible world, by relation.
using World = std::map<std::string, std::vector<std::vector<Symbol>>>;

// Number of worlds for_each_world would visit. Tuples with p in {0, 1} do not branch.
double world_count(const ProbDatabase& db);

// Visits every possible world with its probability. Throws TooLargeError when
// world_count(db) exceeds `cap`.
void for_each_world(const ProbDatabase& db, const std::function<void(const World&, double)>& visit,
                    double cap = kMaxWorlds);
std::vector<std::pair<World, double>> enumerate_worlds(const ProbDatabase& db, double cap = kMaxWorlds);

// Keeps only tuples matching one of `patterns` (variables match anything).
// Dropped independent tuples marginalize out; dropped choice tuples merge
// into the choice's "nothing selected" outcome.
ProbDatabase relevant_part(const ProbDatabase& db, const std::vector<dsl::Atom>& patterns);

// P[q(x)] for every binding x of the free variables, summed over worlds.
// For each choice outcome, independent tuples the query cannot read are
// summed out rather than enumerated; `cap` bounds the worlds still visited.
ra::ProbTable oracle_prob(const lifted::UCQ& q, const ProbDatabase& db, double cap = kMaxWorlds);

struct OracleAnswer {
  // P[target(x) & condition] per binding, and P[condition].
  ra::ProbTable joint;
  double condition = 1.0;

  ra::ProbTable conditional() const { return ra::conditional(joint, condition); }
};

// Evaluates the rules of `program` in every world of `db` (facts of the
// program itself are expected to be in `db` already).
OracleAnswer oracle_query(const dsl::Query& query, const dsl::ValidatedProgram& program, const ProbDatabase& db,
                          double cap = kMaxWorlds);

}  // namespace probcbma
