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

#include "probcbma/error.hpp"

#include <sstream>

namespace probcbma {
namespace {

std::string located(const std::string& message, int line, int column, const std::string& file) {
  std::ostringstream os;
  if (!file.empty()) os << file << ':';
  os << line;
  if (column > 0) os << ':' << column;
  os << ": " << message;
  return os.str();
}

std::string cycle_text(const std::vector<std::string>& cycle) {
  std::string text;
  for (const auto& p : cycle) {
    if (!text.empty()) text += " -> ";
    text += p;
  }
  if (!cycle.empty()) text += " -> " + cycle.front();
  return text;
}

}  // namespace

SourceError::SourceError(std::string message, int line, int column, std::string file)
    : Error(located(message, line, column, file)),
      message_(std::move(message)),
      line_(line),
      column_(column),
      file_(std::move(file)) {}

RecursionError::RecursionError(std::vector<std::string> cycle)
    : ValidationError("recursive rules are not allowed: " + cycle_text(cycle)), cycle_(std::move(cycle)) {}

UnsafeVariableError::UnsafeVariableError(std::string variable, std::string rule, int line)
    : ValidationError("line " + std::to_string(line) + ": head variable '" + variable +
                      "' does not occur in the body of rule for " + rule),
      variable_(std::move(variable)) {}

ChoiceSumError::ChoiceSumError(std::string relation, double sum)
    : ValidationError("probabilities of choice " + relation + " sum to " + std::to_string(sum) + " > 1"),
      sum_(sum) {}

}  // namespace probcbma
