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

#include <memory>
#include <string>
#include <vector>

#include "probcbma/dsl/ast.hpp"

namespace probcbma::lifted {

enum class Op {
  GroundLookup,
  Complement,
  IndependentJoin,
  IndependentUnion,
  IndependentProject,
  ExclusiveSum,
  Selection,
  InclusionExclusion,
  Constant,
};

const char* op_name(Op op);

// What a plan yields for bindings it has no row for: exactly 0, exactly 1, or unknown.
enum class DefaultKind { Zero, One, Other };

struct PlanNode;
using PlanPtr = std::shared_ptr<const PlanNode>;

struct PlanNode {
  Op op = Op::Constant;
  // Output key columns, sorted.
  std::vector<std::string> columns;
  DefaultKind default_kind = DefaultKind::Zero;
  std::vector<PlanPtr> children;

  // GroundLookup: the atom read from the database. Variables become columns.
  dsl::Atom atom;
  // IndependentProject, ExclusiveSum: variables eliminated.
  std::vector<std::string> variables;
  // InclusionExclusion: coefficient of each child.
  std::vector<int> signs;
  // Constant.
  double value = 0.0;
  // Selection: keeps rows whose `column` equals `constant`.
  std::string column;
  Symbol constant;
};

// Builders check that the operator's result is representable as a finite
// table plus one default value, throwing UnsupportedQuery otherwise.
PlanPtr make_lookup(const dsl::Atom& atom);
PlanPtr make_complement(PlanPtr child);
PlanPtr make_join(std::vector<PlanPtr> children);
PlanPtr make_union(std::vector<PlanPtr> children);
PlanPtr make_project(std::vector<std::string> variables, PlanPtr child);
PlanPtr make_exclusive_sum(std::vector<std::string> variables, PlanPtr child);
PlanPtr make_selection(std::string column, Symbol constant, PlanPtr child);
PlanPtr make_inclusion_exclusion(std::vector<PlanPtr> children, std::vector<int> signs);
PlanPtr make_constant(double value);

// Indented tree, one operator per line.
std::string explain(const PlanNode& plan);
std::size_t count_ops(const PlanNode& plan, Op op);
std::size_t plan_size(const PlanNode& plan);

}  // namespace probcbma::lifted
