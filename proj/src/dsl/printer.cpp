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

#include "probcbma/dsl/printer.hpp"

#include <charconv>

namespace probcbma::dsl {
namespace {

std::string ground_atom(const std::string& relation, const std::vector<Symbol>& args) {
  std::string out = relation + "(";
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (i) out += ", ";
    out += constant_text(args[i]);
  }
  return out + ")";
}

}  // namespace

std::string format_probability(double p) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, p);
  std::string s(buf, ptr);
  if (s.find_first_of(".e") == std::string::npos) s += ".0";
  return s;
}

std::string print_program(const Program& program) {
  std::string out;
  for (const auto& block : program.facts)
    for (const auto& t : block.tuples) {
      if (t.p != 1.0) out += format_probability(t.p) + "::";
      out += ground_atom(block.relation, t.args) + ".\n";
    }
  for (const auto& block : program.choices) {
    for (std::size_t i = 0; i < block.tuples.size(); ++i) {
      if (i) out += "; ";
      out += format_probability(block.tuples[i].p) + "::" + ground_atom(block.relation, block.tuples[i].args);
    }
    out += ".\n";
  }
  for (const auto& rule : program.rules) {
    out += to_string(rule.head) + " :- ";
    for (std::size_t i = 0; i < rule.body.size(); ++i) {
      if (i) out += ", ";
      if (rule.body[i].negated) out += "not ";
      out += to_string(rule.body[i].atom);
    }
    out += ".\n";
  }
  return out;
}

std::string print_query(const Query& query) {
  std::string out = to_string(query.target);
  if (query.condition) out += " | " + to_string(*query.condition);
  return out;
}

}  // namespace probcbma::dsl
