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

#include "probcbma/lifted/plan.hpp"

#include <algorithm>
#include <set>

#include "probcbma/error.hpp"

namespace probcbma::lifted {
namespace {

std::vector<std::string> merged_columns(const std::vector<PlanPtr>& children) {
  std::set<std::string> cols;
  for (const auto& c : children) cols.insert(c->columns.begin(), c->columns.end());
  return {cols.begin(), cols.end()};
}

// Non-scalar operands must share their columns.
void require_aligned(const std::vector<PlanPtr>& children, const char* op) {
  const std::vector<std::string>* ref = nullptr;
  for (const auto& c : children) {
    if (c->columns.empty()) continue;
    if (!ref) {
      ref = &c->columns;
    } else if (*ref != c->columns) {
      throw UnsupportedQuery(std::string(op) + " over operands with different free variables");
    }
  }
}

// A node without columns is a single number; its kind is known only for constants.
PlanPtr finish(std::shared_ptr<PlanNode> n) {
  if (n->columns.empty() && n->op != Op::Constant) n->default_kind = DefaultKind::Other;
  return n;
}

std::string join_names(const std::vector<std::string>& names) {
  std::string out;
  for (const auto& n : names) out += (out.empty() ? "" : ", ") + n;
  return out;
}

void explain_into(const PlanNode& n, int depth, std::string& out) {
  out.append(2 * depth, ' ');
  out += op_name(n.op);
  switch (n.op) {
    case Op::GroundLookup:
      out += " " + dsl::to_string(n.atom);
      break;
    case Op::IndependentProject:
    case Op::ExclusiveSum:
      out += "[" + join_names(n.variables) + "]";
      break;
    case Op::Selection:
      out += "[" + n.column + " = " + dsl::constant_text(n.constant) + "]";
      break;
    case Op::InclusionExclusion: {
      out += "[";
      for (std::size_t i = 0; i < n.signs.size(); ++i) out += (i ? " " : "") + std::string(n.signs[i] > 0 ? "+" : "-");
      out += "]";
      break;
    }
    case Op::Constant:
      out += " " + std::to_string(n.value);
      break;
    default:
      break;
  }
  if (!n.columns.empty()) out += " -> (" + join_names(n.columns) + ")";
  out += "\n";
  for (const auto& c : n.children) explain_into(*c, depth + 1, out);
}

}  // namespace

const char* op_name(Op op) {
  switch (op) {
    case Op::GroundLookup:
      return "GroundLookup";
    case Op::Complement:
      return "Complement";
    case Op::IndependentJoin:
      return "IndependentJoin";
    case Op::IndependentUnion:
      return "IndependentUnion";
    case Op::IndependentProject:
      return "IndependentProject";
    case Op::ExclusiveSum:
      return "ExclusiveSum";
    case Op::Selection:
      return "Selection";
    case Op::InclusionExclusion:
      return "InclusionExclusion";
    case Op::Constant:
      return "Constant";
  }
  return "?";
}

PlanPtr make_lookup(const dsl::Atom& atom) {
  auto n = std::make_shared<PlanNode>();
  n->op = Op::GroundLookup;
  n->atom = atom;
  std::set<std::string> cols;
  dsl::collect_variables(atom, cols);
  n->columns.assign(cols.begin(), cols.end());
  n->default_kind = DefaultKind::Zero;
  return finish(n);
}

PlanPtr make_complement(PlanPtr child) {
  auto n = std::make_shared<PlanNode>();
  n->op = Op::Complement;
  n->columns = child->columns;
  n->default_kind = child->default_kind == DefaultKind::Zero  ? DefaultKind::One
                    : child->default_kind == DefaultKind::One ? DefaultKind::Zero
                                                              : DefaultKind::Other;
  n->children.push_back(std::move(child));
  return finish(n);
}

PlanPtr make_join(std::vector<PlanPtr> children) {
  std::vector<PlanPtr> flat;
  for (auto& c : children) {
    if (c->op == Op::IndependentJoin) {
      flat.insert(flat.end(), c->children.begin(), c->children.end());
    } else if (c->op == Op::Constant && c->value == 1.0) {
      continue;
    } else if (c->op == Op::Constant && c->value == 0.0) {
      return make_constant(0.0);
    } else {
      flat.push_back(std::move(c));
    }
  }
  if (flat.empty()) return make_constant(1.0);
  if (flat.size() == 1) return flat.front();

  std::set<std::string> zero_cols;
  bool any_zero = false;
  for (const auto& c : flat)
    if (c->default_kind == DefaultKind::Zero) {
      any_zero = true;
      zero_cols.insert(c->columns.begin(), c->columns.end());
    }
  if (any_zero) {
    for (const auto& c : flat)
      if (c->default_kind != DefaultKind::Zero)
        for (const auto& col : c->columns)
          if (!zero_cols.count(col))
            throw UnsupportedQuery("join needs every column of a non-zero-default operand to be bound elsewhere");
  } else {
    require_aligned(flat, "join");
  }

  auto n = std::make_shared<PlanNode>();
  n->op = Op::IndependentJoin;
  n->columns = merged_columns(flat);
  bool all_one = std::all_of(flat.begin(), flat.end(), [](const PlanPtr& c) { return c->default_kind == DefaultKind::One; });
  n->default_kind = any_zero ? DefaultKind::Zero : all_one ? DefaultKind::One : DefaultKind::Other;
  n->children = std::move(flat);
  return finish(n);
}

PlanPtr make_union(std::vector<PlanPtr> children) {
  std::vector<PlanPtr> flat;
  for (auto& c : children) {
    if (c->op == Op::IndependentUnion) {
      flat.insert(flat.end(), c->children.begin(), c->children.end());
    } else if (c->op == Op::Constant && c->value == 0.0) {
      continue;
    } else if (c->op == Op::Constant && c->value == 1.0) {
      return make_constant(1.0);
    } else {
      flat.push_back(std::move(c));
    }
  }
  if (flat.empty()) return make_constant(0.0);
  if (flat.size() == 1) return flat.front();
  require_aligned(flat, "union");
  auto n = std::make_shared<PlanNode>();
  n->op = Op::IndependentUnion;
  n->columns = merged_columns(flat);
  bool all_zero = std::all_of(flat.begin(), flat.end(), [](const PlanPtr& c) { return c->default_kind == DefaultKind::Zero; });
  bool any_one = std::any_of(flat.begin(), flat.end(), [](const PlanPtr& c) { return c->default_kind == DefaultKind::One; });
  n->default_kind = all_zero ? DefaultKind::Zero : any_one ? DefaultKind::One : DefaultKind::Other;
  n->children = std::move(flat);
  return finish(n);
}

namespace {

PlanPtr make_aggregate(Op op, std::vector<std::string> variables, PlanPtr child) {
  if (child->default_kind != DefaultKind::Zero)
    throw UnsupportedQuery(std::string(op_name(op)) + " over an operand that is non-zero on absent keys");
  auto n = std::make_shared<PlanNode>();
  n->op = op;
  std::sort(variables.begin(), variables.end());
  for (const auto& c : child->columns)
    if (!std::binary_search(variables.begin(), variables.end(), c)) n->columns.push_back(c);
  n->variables = std::move(variables);
  n->default_kind = DefaultKind::Zero;
  n->children.push_back(std::move(child));
  return finish(n);
}

}  // namespace

PlanPtr make_project(std::vector<std::string> variables, PlanPtr child) {
  return make_aggregate(Op::IndependentProject, std::move(variables), std::move(child));
}

PlanPtr make_exclusive_sum(std::vector<std::string> variables, PlanPtr child) {
  return make_aggregate(Op::ExclusiveSum, std::move(variables), std::move(child));
}

PlanPtr make_selection(std::string column, Symbol constant, PlanPtr child) {
  if (child->default_kind != DefaultKind::Zero)
    throw UnsupportedQuery("selection over an operand that is non-zero on absent keys");
  if (!std::binary_search(child->columns.begin(), child->columns.end(), column))
    throw SchemaError("selection on unknown column " + column);
  auto n = std::make_shared<PlanNode>();
  n->op = Op::Selection;
  n->columns = child->columns;
  n->column = std::move(column);
  n->constant = constant;
  n->default_kind = DefaultKind::Zero;
  n->children.push_back(std::move(child));
  return finish(n);
}

PlanPtr make_inclusion_exclusion(std::vector<PlanPtr> children, std::vector<int> signs) {
  if (children.size() != signs.size()) throw SchemaError("inclusion-exclusion needs one sign per operand");
  if (children.size() == 1 && signs.front() == 1) return children.front();
  require_aligned(children, "inclusion-exclusion");
  auto n = std::make_shared<PlanNode>();
  n->op = Op::InclusionExclusion;
  n->columns = merged_columns(children);
  bool all_zero =
      std::all_of(children.begin(), children.end(), [](const PlanPtr& c) { return c->default_kind == DefaultKind::Zero; });
  n->default_kind = all_zero ? DefaultKind::Zero : DefaultKind::Other;
  n->children = std::move(children);
  n->signs = std::move(signs);
  return finish(n);
}

PlanPtr make_constant(double value) {
  auto n = std::make_shared<PlanNode>();
  n->op = Op::Constant;
  n->value = value;
  n->default_kind = value == 0.0 ? DefaultKind::Zero : value == 1.0 ? DefaultKind::One : DefaultKind::Other;
  return n;
}

std::string explain(const PlanNode& plan) {
  std::string out;
  explain_into(plan, 0, out);
  return out;
}

std::size_t count_ops(const PlanNode& plan, Op op) {
  std::size_t n = plan.op == op ? 1 : 0;
  for (const auto& c : plan.children) n += count_ops(*c, op);
  return n;
}

std::size_t plan_size(const PlanNode& plan) {
  std::size_t n = 1;
  for (const auto& c : plan.children) n += plan_size(*c);
  return n;
}

}  // namespace probcbma::lifted
