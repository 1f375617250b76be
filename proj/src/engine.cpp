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

#include "probcbma/engine.hpp"

#include <set>
#include <vector>

#include "probcbma/lifted/compiler.hpp"
#include "probcbma/lifted/unfold.hpp"
#include "probcbma/ra/evaluate.hpp"

namespace probcbma {
namespace {

// Constant target arguments become fresh variables selected back afterwards.
struct Lifted {
  dsl::Query query;
  std::vector<std::pair<std::string, Symbol>> selections;
};

Lifted lift_constants(const dsl::Query& query) {
  Lifted out{query, {}};
  std::set<std::string> taken;
  dsl::collect_variables(query.target, taken);
  int next = 0;
  for (auto& arg : out.query.target.args) {
    if (!arg.is_constant()) continue;
    std::string name;
    do name = "_g" + std::to_string(next++);
    while (taken.count(name));
    taken.insert(name);
    out.selections.emplace_back(name, arg.value());
    arg = dsl::Term::var(name);
  }
  return out;
}

std::vector<std::string> target_columns(const dsl::Atom& target) {
  std::set<std::string> vars;
  dsl::collect_variables(target, vars);
  return {vars.begin(), vars.end()};
}

}  // namespace

CompiledQuery compile_query(const dsl::Query& query, const dsl::ValidatedProgram& program, const Schema& schema) {
  Lifted lifted = lift_constants(query);
  lifted::UnfoldedQuery u = lifted::unfold(lifted.query, program, schema);
  CompiledQuery out;
  out.joint = lifted::compile(u.numerator, schema);
  for (const auto& [column, value] : lifted.selections) out.joint = lifted::make_selection(column, value, out.joint);
  if (u.denominator) out.condition = lifted::compile(*u.denominator, schema);
  return out;
}

JointAnswer lifted_joint(const dsl::Query& query, const dsl::ValidatedProgram& program, const ProbDatabase& db) {
  CompiledQuery plans = compile_query(query, program, db.schema());
  JointAnswer out;
  ra::ProbTable raw = ra::evaluate(*plans.joint, db);
  // Put the columns in the order of the target's variables, dropping the lifted constants.
  std::vector<std::string> columns = target_columns(query.target);
  if (raw.columns() == columns) {
    out.joint = std::move(raw);
  } else if (columns.empty()) {
    out.joint = ra::ProbTable::scalar(raw.size() ? raw.p(0) : raw.default_p());
  } else if (raw.is_scalar()) {
    out.joint = ra::ProbTable(columns, raw.value());
  } else {
    out.joint = ra::ProbTable(columns, raw.default_p());
    std::vector<std::size_t> pick;
    for (const auto& c : columns) pick.push_back(*raw.column_index(c));
    std::vector<Symbol> key(columns.size());
    for (std::size_t r = 0; r < raw.size(); ++r) {
      auto k = raw.key(r);
      for (std::size_t i = 0; i < pick.size(); ++i) key[i] = k[pick[i]];
      out.joint.add(key, raw.p(r));
    }
  }
  if (plans.condition) out.condition = ra::evaluate(*plans.condition, db).value();
  return out;
}

ra::ProbTable lifted_query(const dsl::Query& query, const dsl::ValidatedProgram& program, const ProbDatabase& db) {
  return lifted_joint(query, program, db).conditional();
}

ra::ProbTable lifted_disjunction_by_parts(const dsl::Atom& target, const std::string& a, const std::string& b,
                                          const dsl::ValidatedProgram& program, const ProbDatabase& db) {
  auto term = [](const std::string& name) {
    dsl::Atom atom;
    atom.predicate = "TermAssociation";
    atom.args.push_back(dsl::Term::constant(name));
    return dsl::Formula::leaf(std::move(atom));
  };
  using dsl::Formula;
  const std::vector<Formula> parts{
      Formula::conjunction({term(a), term(b)}),
      Formula::conjunction({term(a), Formula::negation(term(b))}),
      Formula::conjunction({Formula::negation(term(a)), term(b)}),
  };
  std::vector<std::string> columns = target_columns(target);
  ra::ProbTable sum(columns);
  double scalar = 0.0, condition = 0.0;
  for (const auto& phi : parts) {
    dsl::Query q{dsl::QueryKind::Conditional, target, phi};
    JointAnswer part = lifted_joint(q, program, db);
    condition += part.condition;
    if (columns.empty()) {
      scalar += part.joint.value();
      continue;
    }
    for (std::size_t r = 0; r < part.joint.size(); ++r) sum.p(sum.upsert(part.joint.key(r), 0.0)) += part.joint.p(r);
  }
  if (columns.empty()) sum.set_default(scalar);
  return ra::conditional(sum, condition);
}

std::string explain_query(const dsl::Query& query, const dsl::ValidatedProgram& program, const Schema& schema) {
  CompiledQuery plans = compile_query(query, program, schema);
  std::string out = lifted::explain(*plans.joint);
  if (plans.condition) out += "/\n" + lifted::explain(*plans.condition);
  return out;
}

}  // namespace probcbma
