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
#include <string_view>

#include "probcbma/dsl/ast.hpp"

namespace probcbma::dsl {

// Parses a program in the `.npl` dialect:
//
//   Activation(v) :- SelectedStudy(s), VoxelReported(v, s).
//   0.5::SelectedStudy(s1); 0.5::SelectedStudy(s2).
//   0.9::TermInStudy(insula, s1).
//
// In rule atoms bare identifiers are variables and constants are quoted or
// numeric. In facts and choices every argument is a constant.
Program parse_program(std::string_view source, const std::string& file = {});
Program parse_program_file(const std::string& path);

// Parses `Target(x)` or `Target(x) | formula`. Inside the formula a bare name
// `t` abbreviates TermAssociation(t), and atom arguments are constants.
Query parse_query(std::string_view text);
Formula parse_formula(std::string_view text);

}  // namespace probcbma::dsl
