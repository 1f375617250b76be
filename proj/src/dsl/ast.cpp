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

#include "probcbma/dsl/ast.hpp"

#include <algorithm>
#include <cctype>

namespace probcbma::dsl {

bool operator<(const Term& a, const Term& b) {
  if (a.is_var() != b.is_var()) return a.is_var();
  if (a.is_var()) return a.name() < b.name();
  return a.value().str() < b.value().str();
}

bool Atom::is_ground() const {
  return std::all_of(args.begin(), args.end(), [](const Term& t) { return t.is_constant(); });
}

bool operator<(const Atom& a, const Atom& b) {
  if (a.predicate != b.predicate) return a.predicate < b.predicate;
  return std::lexicographical_compare(a.args.begin(), a.args.end(), b.args.begin(), b.args.end());
}

const ProbabilisticFactBlock* Program::fact_block(const std::string& relation) const {
  for (const auto& b : facts)
    if (b.relation == relation) return &b;
  return nullptr;
}

const ProbabilisticChoiceBlock* Program::choice_block(const std::string& relation) const {
  for (const auto& b : choices)
    if (b.relation == relation) return &b;
  return nullptr;
}

Formula Formula::negation(Formula f) {
  Formula out;
  out.kind = Kind::Not;
  out.children.push_back(std::move(f));
  return out;
}

Formula Formula::conjunction(std::vector<Formula> parts) {
  if (parts.size() == 1) return std::move(parts.front());
  Formula out;
  out.kind = parts.empty() ? Kind::True : Kind::And;
  out.children = std::move(parts);
  return out;
}

Formula Formula::disjunction(std::vector<Formula> parts) {
  if (parts.size() == 1) return std::move(parts.front());
  Formula out;
  out.kind = Kind::Or;
  out.children = std::move(parts);
  return out;
}

bool is_bare_identifier(std::string_view text) {
  if (text.empty()) return false;
  if (!(std::isalpha(static_cast<unsigned char>(text[0])) || text[0] == '_')) return false;
  if (text == "true" || text == "not") return false;
  return std::all_of(text.begin(), text.end(),
                     [](char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; });
}

bool is_number_literal(std::string_view text) {
  std::size_t i = 0;
  if (i < text.size() && text[i] == '-') ++i;
  std::size_t digits = 0;
  while (i < text.size() && std::isdigit(static_cast<unsigned char>(text[i]))) ++i, ++digits;
  if (i < text.size() && text[i] == '.') {
    ++i;
    std::size_t frac = 0;
    while (i < text.size() && std::isdigit(static_cast<unsigned char>(text[i]))) ++i, ++frac;
    if (frac == 0) return false;
  }
  return digits > 0 && i == text.size();
}

std::string constant_text(Symbol s) {
  const auto& text = s.str();
  if (is_bare_identifier(text) || is_number_literal(text)) return text;
  std::string out = "'";
  for (char c : text) {
    if (c == '\'' || c == '\\') out += '\\';
    out += c;
  }
  out += '\'';
  return out;
}

std::string to_string(const Term& t) {
  if (t.is_var()) return t.name();
  // Inside rules and query targets a bare identifier reads back as a variable.
  const auto& text = t.value().str();
  if (is_number_literal(text)) return text;
  std::string out = "'";
  for (char c : text) {
    if (c == '\'' || c == '\\') out += '\\';
    out += c;
  }
  out += '\'';
  return out;
}

std::string to_string(const Atom& a) {
  std::string out = a.predicate + "(";
  for (std::size_t i = 0; i < a.args.size(); ++i) {
    if (i) out += ", ";
    out += to_string(a.args[i]);
  }
  return out + ")";
}

std::string to_string(const Formula& f) {
  switch (f.kind) {
    case Formula::Kind::True:
      return "true";
    case Formula::Kind::Atom:
      return to_string(f.atom);
    case Formula::Kind::Not:
      return "!" + to_string(f.children.front());
    case Formula::Kind::And:
    case Formula::Kind::Or: {
      std::string out = "(";
      for (std::size_t i = 0; i < f.children.size(); ++i) {
        if (i) out += f.kind == Formula::Kind::And ? " & " : " | ";
        out += to_string(f.children[i]);
      }
      return out + ")";
    }
  }
  return {};
}

std::vector<std::string> variables(const Atom& a) {
  std::vector<std::string> out;
  for (const auto& t : a.args)
    if (t.is_var() && std::find(out.begin(), out.end(), t.name()) == out.end()) out.push_back(t.name());
  return out;
}

void collect_variables(const Atom& a, std::set<std::string>& out) {
  for (const auto& t : a.args)
    if (t.is_var()) out.insert(t.name());
}

}  // namespace probcbma::dsl
