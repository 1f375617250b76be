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

#include <set>
#include <string>

#include "probcbma/lifted/ucq.hpp"
#include "probcbma/probdb.hpp"

namespace probcbma::lifted {

bool is_choice(const Schema& schema, const std::string& relation);

// Two distinct tuples of a choice relation never hold in the same world, so
// all positive atoms of one choice relation inside a CQ denote the same tuple.
// Their arguments are unified; a CQ that needs two different constants to be
// equal is dropped. `bound` variables behave like unknown constants, and a
// unifier that would have to equate them with anything else is rejected with
// UnsupportedQuery, as are negated choice atoms.
UCQ rewrite_choices(const UCQ& q, const Schema& schema, const std::set<std::string>& bound);
UCQ rewrite_choices(const UCQ& q, const Schema& schema);

}  // namespace probcbma::lifted
