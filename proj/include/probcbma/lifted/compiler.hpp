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

#include "probcbma/lifted/plan.hpp"
#include "probcbma/lifted/ucq.hpp"
#include "probcbma/probdb.hpp"

namespace probcbma::lifted {

struct SafetyVerdict {
  bool safe = false;
  PlanPtr plan;
  // For unsafe queries, the sub-query no rule applies to and why.
  std::string witness;
};

// Rules are tried in a fixed order: ground elimination, independent join,
// independent union, choice factoring, inclusion-exclusion, separator
// projection. The first that applies wins.
SafetyVerdict check_safety(const UCQ& q, const Schema& schema);

// Throws UnsupportedQuery for unsafe queries.
PlanPtr compile(const UCQ& q, const Schema& schema);

inline constexpr std::size_t kMaxInclusionExclusionClauses = 10;

}  // namespace probcbma::lifted
