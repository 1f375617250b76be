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

#include "probcbma/cbma/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "probcbma/error.hpp"
#include "probcbma/parallel.hpp"

namespace probcbma::cbma {
namespace {

constexpr std::size_t kMaxEnumeratedTerms = 20;
constexpr std::size_t kVoxelChunk = 4096;

struct Neumaier {
  double sum = 0.0, c = 0.0;
  void add(double x) {
    double t = sum + x;
    c += std::abs(sum) >= std::abs(x) ? (sum - t) + x : (x - t) + sum;
    sum = t;
  }
  double value() const { return sum + c; }
};

const std::string& term_of(const dsl::Atom& atom) {
  if (atom.predicate != "TermAssociation" || atom.arity() != 1 || !atom.args[0].is_constant())
    throw UnsupportedQuery("the estimator handles formulas over TermAssociation(term) only, got " +
                           dsl::to_string(atom));
  return atom.args[0].value().str();
}

void collect_terms(const dsl::Formula& f, std::vector<std::string>& out) {
  if (f.kind == dsl::Formula::Kind::Atom) out.push_back(term_of(f.atom));
  for (const auto& c : f.children) collect_terms(c, out);
}

using Weights = std::vector<double>;

Weights read_once(const dsl::Formula& f, const std::map<std::string, Weights>& terms, std::size_t n) {
  switch (f.kind) {
    case dsl::Formula::Kind::True:
      return Weights(n, 1.0);
    case dsl::Formula::Kind::Atom:
      return terms.at(term_of(f.atom));
    case dsl::Formula::Kind::Not: {
      Weights w = read_once(f.children.front(), terms, n);
      for (auto& x : w) x = 1.0 - x;
      return w;
    }
    case dsl::Formula::Kind::And: {
      Weights w(n, 1.0);
      for (const auto& c : f.children) {
        Weights x = read_once(c, terms, n);
        for (std::size_t i = 0; i < n; ++i) w[i] *= x[i];
      }
      return w;
    }
    case dsl::Formula::Kind::Or: {
      Weights miss(n, 1.0);
      for (const auto& c : f.children) {
        Weights x = read_once(c, terms, n);
        for (std::size_t i = 0; i < n; ++i) miss[i] *= 1.0 - x[i];
      }
      for (auto& x : miss) x = 1.0 - x;
      return miss;
    }
  }
  return Weights(n, 0.0);
}

bool truth(const dsl::Formula& f, const std::map<std::string, std::size_t>& slot, std::uint32_t assignment) {
  switch (f.kind) {
    case dsl::Formula::Kind::True:
      return true;
    case dsl::Formula::Kind::Atom:
      return (assignment >> slot.at(term_of(f.atom))) & 1u;
    case dsl::Formula::Kind::Not:
      return !truth(f.children.front(), slot, assignment);
    case dsl::Formula::Kind::And:
      return std::all_of(f.children.begin(), f.children.end(),
                         [&](const dsl::Formula& c) { return truth(c, slot, assignment); });
    case dsl::Formula::Kind::Or:
      return std::any_of(f.children.begin(), f.children.end(),
                         [&](const dsl::Formula& c) { return truth(c, slot, assignment); });
  }
  return false;
}

}  // namespace

std::vector<double> term_weights(const CbmaDataset& ds, const ThresholdConfig& cfg, std::string_view term) {
  std::vector<double> w(ds.n_studies(), 0.0);
  auto j = ds.term_index(term);
  if (!j) return w;
  for (const auto& f : ds.term_column(*j)) w[f.study] = cfg.weight(f.tfidf);
  return w;
}

std::vector<double> formula_weights(const CbmaDataset& ds, const ThresholdConfig& cfg, const dsl::Formula& phi) {
  cfg.validate();
  std::vector<std::string> occurrences;
  collect_terms(phi, occurrences);
  std::map<std::string, Weights> terms;
  for (const auto& t : occurrences)
    if (!terms.count(t)) terms.emplace(t, term_weights(ds, cfg, t));
  const std::size_t n = ds.n_studies();
  if (terms.size() == occurrences.size()) return read_once(phi, terms, n);

  if (terms.size() > kMaxEnumeratedTerms)
    throw UnsupportedQuery("formula repeats terms and mentions more than " + std::to_string(kMaxEnumeratedTerms) +
                           " distinct terms");
  std::map<std::string, std::size_t> slot;
  std::vector<const Weights*> columns;
  for (const auto& [name, w] : terms) {
    slot.emplace(name, columns.size());
    columns.push_back(&w);
  }
  Weights out(n, 0.0);
  for (std::uint32_t a = 0; a < (1u << columns.size()); ++a) {
    if (!truth(phi, slot, a)) continue;
    for (std::size_t i = 0; i < n; ++i) {
      double p = 1.0;
      for (std::size_t t = 0; t < columns.size() && p > 0.0; ++t) p *= (a >> t) & 1u ? (*columns[t])[i] : 1.0 - (*columns[t])[i];
      out[i] += p;
    }
  }
  return out;
}

double WeightedCounts::probability(std::size_t voxel) const {
  return std::clamp(active_weight[voxel] / total_weight, 0.0, 1.0);
}

stats::Contingency2x2 WeightedCounts::table(std::size_t voxel) const {
  const double a = active_weight[voxel];
  const double y = active_count[voxel];
  stats::Contingency2x2 t;
  t.n11 = a;
  t.n10 = std::max(0.0, y - a);
  t.n01 = std::max(0.0, total_weight - a);
  t.n00 = std::max(0.0, static_cast<double>(studies) - total_weight - (y - a));
  return t;
}

WeightedCounts weighted_counts(const CbmaDataset& ds, std::span<const double> weights) {
  if (weights.size() != ds.n_studies()) throw Error("one weight per study is required");
  WeightedCounts out;
  out.studies = ds.n_studies();
  Neumaier total;
  std::vector<std::uint32_t> matching;
  for (std::uint32_t i = 0; i < weights.size(); ++i) {
    if (!(weights[i] >= 0.0 && weights[i] <= 1.0)) throw Error("study weights must lie in [0, 1]");
    total.add(weights[i]);
    if (weights[i] > 0.0) matching.push_back(i);
  }
  out.total_weight = total.value();

  const std::size_t k = ds.n_voxels();
  out.active_weight.assign(k, 0.0);
  out.active_count.assign(k, 0);
  for (std::uint32_t i = 0; i < ds.n_studies(); ++i)
    for (auto v : ds.reported(i)) ++out.active_count[v];

  // Each chunk of voxels sums its studies in study order, so results do not depend on the worker count.
  const std::size_t chunks = (k + kVoxelChunk - 1) / kVoxelChunk;
  parallel_for(chunks, [&](std::size_t c) {
    const std::uint32_t lo = static_cast<std::uint32_t>(c * kVoxelChunk);
    const std::uint32_t hi = static_cast<std::uint32_t>(std::min(k, (c + 1) * kVoxelChunk));
    std::vector<Neumaier> acc(hi - lo);
    for (auto i : matching) {
      auto voxels = ds.reported(i);
      auto it = chunks == 1 ? voxels.begin() : std::lower_bound(voxels.begin(), voxels.end(), lo);
      for (; it != voxels.end() && *it < hi; ++it) acc[*it - lo].add(weights[i]);
    }
    for (std::uint32_t v = lo; v < hi; ++v) out.active_weight[v] = acc[v - lo].value();
  });
  return out;
}

ra::ProbTable estimate_from_weights(const CbmaDataset& ds, std::span<const double> weights, const std::string& column) {
  if (std::none_of(weights.begin(), weights.end(), [](double w) { return w >= kNoMatchingWeight; }))
    throw NoMatchingStudies("no study matches the condition");
  WeightedCounts counts = weighted_counts(ds, weights);
  ra::ProbTable out({column});
  out.reserve(ds.n_voxels());
  for (std::size_t k = 0; k < ds.n_voxels(); ++k) out.add(std::span<const Symbol>(&ds.voxels()[k], 1), counts.probability(k));
  return out;
}

ra::ProbTable estimate_conjunction(const CbmaDataset& ds, const ThresholdConfig& cfg,
                                   const std::vector<std::string>& terms, const std::string& column) {
  if (terms.empty()) throw Error("a conjunction needs at least one term");
  cfg.validate();
  std::vector<double> w(ds.n_studies(), 1.0);
  for (const auto& t : terms) {
    auto x = term_weights(ds, cfg, t);
    for (std::size_t i = 0; i < w.size(); ++i) w[i] *= x[i];
  }
  return estimate_from_weights(ds, w, column);
}

ra::ProbTable estimate_disjunction(const CbmaDataset& ds, const ThresholdConfig& cfg,
                                   const std::vector<std::string>& terms, const std::string& column) {
  if (terms.empty()) throw Error("a disjunction needs at least one term");
  cfg.validate();
  std::vector<double> miss(ds.n_studies(), 1.0);
  for (const auto& t : terms) {
    auto x = term_weights(ds, cfg, t);
    for (std::size_t i = 0; i < miss.size(); ++i) miss[i] *= 1.0 - x[i];
  }
  for (auto& m : miss) m = 1.0 - m;
  return estimate_from_weights(ds, miss, column);
}

ra::ProbTable estimate_formula(const CbmaDataset& ds, const ThresholdConfig& cfg, const dsl::Formula& phi,
                               const std::string& column) {
  return estimate_from_weights(ds, formula_weights(ds, cfg, phi), column);
}

std::vector<VoxelTest> test_voxels(const WeightedCounts& counts, double base) {
  const std::size_t k = counts.active_weight.size();
  std::vector<VoxelTest> out(k);
  std::vector<double> p(k);
  for (std::size_t v = 0; v < k; ++v) {
    out[v].g = stats::g_test(counts.table(v));
    p[v] = out[v].g.p;
  }
  auto flags = stats::bonferroni(p, base);
  for (std::size_t v = 0; v < k; ++v) {
    out[v].significant = flags[v];
    auto t = counts.table(v);
    const double with = t.n11 + t.n01, without = t.n10 + t.n00;
    out[v].active = flags[v] && with > 0 && without > 0 && t.n11 / with > t.n10 / without;
  }
  return out;
}

std::vector<std::uint8_t> active_voxels(const WeightedCounts& counts, double base) {
  auto tests = test_voxels(counts, base);
  std::vector<std::uint8_t> out(tests.size());
  for (std::size_t v = 0; v < tests.size(); ++v) out[v] = tests[v].active;
  return out;
}

}  // namespace probcbma::cbma
