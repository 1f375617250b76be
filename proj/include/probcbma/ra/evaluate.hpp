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

#include "probcbma/lifted/plan.hpp"
#include "probcbma/probdb.hpp"
#include "probcbma/ra/table.hpp"

namespace probcbma::ra {

// Runs an extensional plan. Joins probe indexed relations binding by binding
// and feed aggregates directly, so large relations are never copied.
ProbTable evaluate(const lifted::PlanNode& plan, const ProbDatabase& db);

}  // namespace probcbma::ra
