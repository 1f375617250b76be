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

#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "probcbma/dsl/ast.hpp"

namespace probcbma::dsl {

inline constexpr double kChoiceSumEpsilon = 1e-9;

// A program that passed validate_program: no recursion, safe heads, no
// negation in rule bodies, choice sums within 1 + kChoiceSumEpsilon.
class ValidatedProgram {
 public:
  const Program& program() const { return *program_; }

  bool is_intensional(const std::string& predicate) const { return rules_by_head_.count(predicate) > 0; }
  bool is_choice(const std::string& predicate) const { return program_->choice_block(predicate) != nullptr; }
  const std::vector<const DeterministicRule*>& rules_for(const std::string& predicate) const;

  // Intensional predicates, each listed after everything it depends on.
  const std::vector<std::string>& evaluation_order() const { return order_; }
  std::optional<std::size_t> arity(const std::string& predicate) const;

 private:
  friend ValidatedProgram validate_program(Program program);
  ValidatedProgram() = default;

  std::shared_ptr<const Program> program_;
  std::map<std::string, std::vector<const DeterministicRule*>> rules_by_head_;
  std::map<std::string, std::size_t> arity_;
  std::vector<std::string> order_;
};

ValidatedProgram validate_program(Program program);

}  // namespace probcbma::dsl
