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

// Acceptance checks. Prints one PASS/FAIL line per criterion; arguments
// select criteria by number (default: all).

#include <algorithm>
#include <boost/math/distributions/chi_squared.hpp>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <set>
#include <string>

#include "helpers.hpp"
#include "probcbma/cbma/encode.hpp"
#include "probcbma/cbma/estimators.hpp"
#include "probcbma/dsl/parser.hpp"
#include "probcbma/engine.hpp"
#include "probcbma/error.hpp"
#include "probcbma/experiments.hpp"
#include "probcbma/lifted/compiler.hpp"
#include "probcbma/lifted/unfold.hpp"
#include "probcbma/oracle.hpp"
#include "probcbma/sim.hpp"
#include "probcbma/stats.hpp"

using namespace probcbma;
using namespace probcbma::testing;
using cbma::Mode;
using cbma::ThresholdConfig;

namespace {

// Tolerances and budgets.
constexpr int kFixtures = 200;
constexpr double kOracleTol = 1e-9;
constexpr double kDecompositionTol = 1e-9;
constexpr double kSoftHardTol = 1e-6;
constexpr double kSoftHardAlpha = 1e6;
constexpr double kSoftHardMargin = 0.01;
constexpr double kOracleSeconds = 60;
constexpr double kEstimatorSeconds = 10;
constexpr double kLiftedSeconds = 60;
constexpr double kMaxScalingExponent = 2.0;
constexpr std::size_t kScaleStudies = 15000, kScaleTerms = 3000, kScaleVoxels = 200000;
constexpr double kScaleActivationRate = 0.0138;
constexpr std::size_t kScaleTermsPerStudy = 60;
constexpr double kF1Seconds = 15 * 60;
constexpr std::size_t kMinF1Cells = 20;
constexpr double kPValueTol = 1e-10;
constexpr int kStatTables = 100;
constexpr int kRenamings = 50;

struct Outcome {
  bool pass = false;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t) { return std::chrono::duration<double>(Clock::now() - t).count(); }

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

ra::ProbTable estimate(const cbma::CbmaDataset& ds, const ThresholdConfig& cfg, const std::string& phi) {
  return cbma::estimate_formula(ds, cfg, dsl::parse_formula(phi));
}

// The three query shapes over a fixture's terms; terms repeat when there are fewer than four.
std::vector<std::string> query_family(const cbma::CbmaDataset& ds) {
  auto t = [&](std::size_t k) { return ds.terms()[k % ds.n_terms()].str(); };
  return {t(0) + " & " + t(1), t(0) + " | " + t(1), "(" + t(0) + " | " + t(1) + ") & (" + t(2) + " | " + t(3) + ")"};
}

// Runs `f`; a query without matching studies yields nullopt.
template <class F>
std::optional<ra::ProbTable> defined(F&& f) {
  try {
    return f();
  } catch (const NoMatchingStudies&) {
  } catch (const ZeroConditionError&) {
  }
  return std::nullopt;
}

std::vector<std::pair<cbma::CbmaDataset, ThresholdConfig>> fixtures(std::uint64_t seed, double margin) {
  std::mt19937_64 rng(seed);
  std::vector<std::pair<cbma::CbmaDataset, ThresholdConfig>> out;
  DatasetShape shape;
  shape.margin = margin;
  for (int i = 0; i < kFixtures; ++i) {
    shape.density = uniform(rng, 0.4, 1.0);
    auto ds = random_dataset(rng, shape);
    ThresholdConfig cfg{i % 2 ? Mode::Soft : Mode::Hard, 0.1, 300.0};
    out.emplace_back(std::move(ds), cfg);
  }
  return out;
}

Outcome oracle_equivalence() {
  const auto start = Clock::now();
  double worst = 0;
  int queries = 0, undefined = 0, mismatched = 0;
  for (const auto& [ds, cfg] : fixtures(1, 0.0)) {
    auto enc = cbma::encode_program(ds, cfg);
    for (const auto& phi : query_family(ds)) {
      auto query = dsl::parse_query("Activation(v) | " + phi);
      auto est = defined([&] { return estimate(ds, cfg, phi); });
      auto lifted = defined([&] { return lifted_query(query, enc.program, enc.db); });
      auto exact = defined([&] { return oracle_query(query, enc.program, enc.db).conditional(); });
      ++queries;
      if (!est && !lifted && !exact) {
        ++undefined;
        continue;
      }
      if (!est || !lifted || !exact) {
        ++mismatched;
        continue;
      }
      worst = std::max({worst, ra::max_abs_difference(*est, *exact), ra::max_abs_difference(*lifted, *exact)});
    }
  }
  const double t = seconds_since(start);
  Outcome o;
  o.pass = mismatched == 0 && worst <= kOracleTol && t < kOracleSeconds;
  o.detail = "max diff " + fmt("%.2e", worst) + " over " + std::to_string(queries) + " queries on " +
             std::to_string(kFixtures) + " fixtures (" + std::to_string(undefined) + " with no matching study, " +
             std::to_string(mismatched) + " defined in only some engines), " + fmt("%.1f", t) + " s";
  return o;
}

Outcome eq2_reproduction() {
  struct Case {
    std::vector<std::vector<double>> x;
    std::vector<std::vector<int>> y;
    std::vector<std::string> terms;
    std::vector<double> expected;  // per voxel, by hand
  };
  const std::vector<Case> cases{
      {{{0.5}, {0.5}}, {{1}, {0}}, {"t0"}, {1.0 / 2}},
      // Studies 0, 1 and 3 exceed tau on both terms.
      {{{0.2, 0.3}, {0.5, 0.11}, {0.05, 0.9}, {0.2, 0.2}}, {{1, 0}, {0, 0}, {1, 1}, {1, 1}}, {"t0", "t1"}, {2.0 / 3, 1.0 / 3}},
      // Only study 2 exceeds tau on all three terms; 0.1 itself does not.
      {{{0.1, 0.2, 0.3}, {0.2, 0.0, 0.3}, {0.15, 0.12, 0.4}}, {{1}, {1}, {0}}, {"t0", "t1", "t2"}, {0.0}},
      {{{0.3, 0.3}, {0.3, 0.3}, {0.3, 0.3}, {0.3, 0.3}, {0.3, 0.3}}, {{1, 1}, {0, 1}, {0, 1}, {1, 1}, {0, 0}}, {"t0", "t1"},
       {2.0 / 5, 4.0 / 5}},
  };
  int exact = 0, total = 0;
  for (const auto& c : cases) {
    std::vector<std::string> studies, voxels;
    for (std::size_t i = 0; i < c.x.size(); ++i) studies.push_back("s" + std::to_string(i));
    for (std::size_t k = 0; k < c.y[0].size(); ++k) voxels.push_back("v" + std::to_string(k));
    std::vector<std::string> terms;
    for (std::size_t j = 0; j < c.x[0].size(); ++j) terms.push_back("t" + std::to_string(j));
    auto ds = make_dataset(studies, terms, voxels, c.x, c.y);
    auto t = cbma::estimate_conjunction(ds, {Mode::Hard, 0.1, 300.0}, c.terms);
    for (std::size_t k = 0; k < voxels.size(); ++k) {
      ++total;
      exact += t.lookup({voxels[k]}) == c.expected[k];
    }
  }
  return {exact == total, std::to_string(exact) + "/" + std::to_string(total) + " voxel estimates equal the hand values exactly"};
}

Outcome disjunction_decomposition() {
  double worst = 0;
  int compared = 0, mismatched = 0;
  for (const auto& [ds, cfg] : fixtures(1, 0.0)) {
    auto enc = cbma::encode_program(ds, cfg);
    const std::string a = ds.terms()[0].str(), b = ds.terms()[ds.n_terms() > 1 ? 1 : 0].str();
    auto direct = defined([&] { return lifted_query(dsl::parse_query("Activation(v) | " + a + " | " + b), enc.program, enc.db); });
    auto parts = defined([&] {
      return lifted_disjunction_by_parts(dsl::parse_query("Activation(v)").target, a, b, enc.program, enc.db);
    });
    if (!direct && !parts) continue;
    if (!direct || !parts) {
      ++mismatched;
      continue;
    }
    ++compared;
    worst = std::max(worst, ra::max_abs_difference(*direct, *parts));
  }
  return {mismatched == 0 && worst <= kDecompositionTol,
          "max diff " + fmt("%.2e", worst) + " on " + std::to_string(compared) + " fixtures with matching studies"};
}

Outcome soft_hard_limit() {
  double worst = 0;
  int compared = 0, mismatched = 0;
  for (auto& [ds, cfg] : fixtures(4, kSoftHardMargin)) {
    for (const auto& phi : query_family(ds)) {
      auto hard = defined([&] { return estimate(ds, {Mode::Hard, 0.1, 300.0}, phi); });
      auto soft = defined([&] { return estimate(ds, {Mode::Soft, 0.1, kSoftHardAlpha}, phi); });
      if (!hard && !soft) continue;
      if (!hard || !soft) {
        ++mismatched;
        continue;
      }
      ++compared;
      worst = std::max(worst, ra::max_abs_difference(*hard, *soft));
    }
  }
  return {mismatched == 0 && worst <= kSoftHardTol,
          "max diff " + fmt("%.2e", worst) + " over " + std::to_string(compared) + " queries at alpha = 1e6"};
}

// Neurosynth-sized synthetic data: terms t0000 and t0001 each occur in about
// 30% of studies; every study also carries kScaleTermsPerStudy random terms
// and reports about kScaleActivationRate of the voxels.
cbma::CbmaDataset scale_dataset(std::size_t n) {
  auto rng = sim::stream_rng(5, "scale", n);
  std::vector<Symbol> studies, terms, voxels;
  for (std::size_t i = 0; i < n; ++i) studies.push_back(Symbol::intern("s" + std::to_string(i)));
  for (std::size_t j = 0; j < kScaleTerms; ++j) terms.push_back(Symbol::intern(fmt("t%04.0f", static_cast<double>(j))));
  for (std::size_t k = 0; k < kScaleVoxels; ++k) voxels.push_back(Symbol::intern("v" + std::to_string(k)));
  std::vector<cbma::FeatureEntry> x;
  std::vector<cbma::ActivationEntry> y;
  const auto per_study = static_cast<std::size_t>(kScaleActivationRate * kScaleVoxels);
  y.reserve(n * per_study);
  std::vector<std::uint32_t> picks;
  for (std::uint32_t i = 0; i < n; ++i) {
    std::set<std::uint32_t> t;
    for (std::uint32_t j : {0u, 1u})
      if (sim::uniform01(rng) < 0.3) t.insert(j);
    while (t.size() < kScaleTermsPerStudy) t.insert(static_cast<std::uint32_t>(rng() % kScaleTerms));
    for (auto j : t) x.push_back({i, j, 0.3 * sim::uniform01(rng)});
    picks.clear();
    for (std::size_t c = 0; c < per_study; ++c) picks.push_back(static_cast<std::uint32_t>(rng() % kScaleVoxels));
    std::sort(picks.begin(), picks.end());
    picks.erase(std::unique(picks.begin(), picks.end()), picks.end());
    for (auto k : picks) y.push_back({i, k});
  }
  return cbma::CbmaDataset(std::move(studies), std::move(terms), std::move(voxels), std::move(x), std::move(y));
}

template <class F>
double best_time(int runs, F&& f) {
  double best = 1e300;
  for (int r = 0; r < runs; ++r) {
    auto t = Clock::now();
    f();
    best = std::min(best, seconds_since(t));
  }
  return best;
}

Outcome performance() {
  const std::vector<std::size_t> sizes{kScaleStudies / 4, kScaleStudies / 2, kScaleStudies};
  const auto query = dsl::parse_query("Activation(v) | t0000 & t0001");
  std::vector<double> est_times, lifted_times;
  double est_full = 0, lifted_full = 0, encode_full = 0;
  std::size_t tuples = 0;
  for (std::size_t n : sizes) {
    auto ds = scale_dataset(n);
    double est = 0, lifted = 0;
    for (auto mode : {Mode::Hard, Mode::Soft}) {
      const ThresholdConfig cfg{mode, 0.1, 300.0};
      est = std::max(est, best_time(3, [&] { cbma::estimate_conjunction(ds, cfg, {"t0000", "t0001"}); }));
      auto t = Clock::now();
      auto enc = cbma::encode_program(ds, cfg);
      const double encode = seconds_since(t);
      lifted = std::max(lifted, best_time(n == kScaleStudies ? 1 : 2, [&] { lifted_query(query, enc.program, enc.db); }));
      if (n == kScaleStudies) {
        encode_full = std::max(encode_full, encode);
        tuples = enc.db.tuple_count();
      }
    }
    est_times.push_back(est);
    lifted_times.push_back(lifted);
    if (n == kScaleStudies) {
      est_full = est;
      lifted_full = lifted;
    }
  }
  auto exponent = [](const std::vector<double>& t) { return std::log(t.back() / t.front()) / std::log(4.0); };
  const double e_est = exponent(est_times), e_lifted = exponent(lifted_times);
  Outcome o;
  o.pass = est_full <= kEstimatorSeconds && lifted_full <= kLiftedSeconds && e_est < kMaxScalingExponent &&
           e_lifted < kMaxScalingExponent;
  o.detail = "15000 studies x 3000 terms x 200000 voxels (" + std::to_string(tuples) + " tuples): estimator " +
             fmt("%.2f", est_full) + " s, lifted " + fmt("%.2f", lifted_full) + " s (encoding " + fmt("%.1f", encode_full) +
             " s); scaling exponent over 3750..15000 studies: estimator " + fmt("%.2f", e_est) + ", lifted " +
             fmt("%.2f", e_lifted);
  return o;
}

Outcome simulation_f1() {
  const auto start = Clock::now();
  experiments::F1Config cfg;
  auto r = experiments::run_f1_benchmark(cfg);
  const double t = seconds_since(start);
  const std::size_t small = cfg.sample_sizes.front(), large = cfg.sample_sizes.back();
  auto soft_small = r.summary(small, Mode::Soft), hard_small = r.summary(small, Mode::Hard);
  auto soft_large = r.summary(large, Mode::Soft), hard_large = r.summary(large, Mode::Hard);
  const double gap_small = soft_small.median - hard_small.median;
  const double gap_large = soft_large.median - hard_large.median;
  Outcome o;
  o.pass = soft_small.count >= kMinF1Cells && gap_small > 0 && gap_large <= gap_small && t <= kF1Seconds;
  o.detail = "median F1 at n=" + std::to_string(small) + ": soft " + fmt("%.3f", soft_small.median) + " vs hard " +
             fmt("%.3f", hard_small.median) + "; at n=" + std::to_string(large) + ": soft " +
             fmt("%.3f", soft_large.median) + " vs hard " + fmt("%.3f", hard_large.median) + " (" +
             std::to_string(soft_small.count) + " cells per size and mode, " + fmt("%.0f", t) + " s)";
  return o;
}

Outcome statistical_kernel() {
  std::mt19937_64 rng(7);
  double worst = 0;
  for (int i = 0; i < kStatTables; ++i) {
    stats::Contingency2x2 t;
    for (double* c : {&t.n11, &t.n10, &t.n01, &t.n00})
      *c = i % 2 ? std::floor(uniform(rng, 1, 200)) : uniform(rng, 0.5, 300);
    if (i % 5 == 0) t.n11 = t.n00 * 4 + 30;
    const auto r = stats::g_test(t);
    const double ref = boost::math::cdf(boost::math::complement(boost::math::chi_squared(1.0), r.g));
    worst = std::max(worst, std::abs(r.p - ref));
  }
  int flag_errors = 0;
  for (int i = 0; i < 100; ++i) {
    std::vector<double> p(pick(rng, 1, 2000));
    for (auto& v : p) v = std::pow(uniform(rng), 6);
    auto flags = stats::bonferroni(p);
    for (std::size_t k = 0; k < p.size(); ++k) flag_errors += flags[k] != (p[k] < 0.01 / static_cast<double>(p.size()));
  }
  return {worst <= kPValueTol && flag_errors == 0,
          "max p-value diff " + fmt("%.2e", worst) + " vs reference on " + std::to_string(kStatTables) +
              " tables; " + std::to_string(flag_errors) + " Bonferroni flag errors"};
}

Outcome consistency_metric() {
  int failures = 0;
  failures += stats::consistency({{1, 1, 1}, {1, 1, 1}}) != 1.0;
  failures += stats::consistency({{1, 0}, {0, 1}}) != 0.0;
  failures += stats::consistency({{1, 0}, {1, 1}}) != 0.5;
  failures += stats::consistency({{0, 1, 1, 0}}) != 1.0;
  std::mt19937_64 rng(8);
  for (int i = 0; i < 500; ++i) {
    std::vector<std::vector<std::uint8_t>> maps(pick(rng, 1, 10), std::vector<std::uint8_t>(pick(rng, 1, 10)));
    for (auto& row : maps)
      for (auto& b : row) b = uniform(rng) < 0.5;
    const double c = stats::consistency(maps);
    failures += !(c >= 0.0 && c <= 1.0);
    const std::size_t col = pick(rng, 0, maps[0].size() - 1);
    for (auto& row : maps) row[col] = !row[col];
    failures += std::abs(stats::consistency(maps) - c) > 1e-15;
  }
  return {failures == 0, std::to_string(failures) +
                             " property violations; the real-database comparison at n=2395 is optional and not run"};
}

lifted::UCQ rename(const lifted::UCQ& q, std::mt19937_64& rng) {
  auto vars = lifted::variables(q);
  std::vector<std::string> names;
  for (std::size_t i = 0; i < vars.size(); ++i) names.push_back("w" + std::to_string(i));
  std::shuffle(names.begin(), names.end(), rng);
  lifted::Substitution s;
  std::size_t i = 0;
  for (const auto& v : vars) s.emplace(v, dsl::Term::var(names[i++]));
  lifted::UCQ out;
  for (const auto& f : q.free_vars) out.free_vars.push_back(s.at(f).name());
  for (const auto& d : q.disjuncts) out.disjuncts.push_back(lifted::substitute(s, d));
  std::shuffle(out.disjuncts.begin(), out.disjuncts.end(), rng);
  return out;
}

Outcome safety_checker() {
  const Schema rst{{"R", {1, Semantics::Independent}}, {"S", {2, Semantics::Independent}}, {"T", {1, Semantics::Independent}}};
  const auto h0 = ucq({{pos(atom("R", {"x"})), pos(atom("S", {"x", "y"}))}, {pos(atom("S", {"x", "y"})), pos(atom("T", {"y"}))}});
  const bool h0_unsafe = !lifted::check_safety(h0, rst).safe;

  const Schema cbma_schema{{"SelectedStudy", {1, Semantics::Choice}},
                           {"VoxelReported", {2, Semantics::Independent}},
                           {"TermInStudy", {2, Semantics::Independent}}};
  auto program = dsl::validate_program(dsl::parse_program(cbma::kCbmaRules));
  const std::vector<std::string> family{"a", "a & b", "a & b & c", "a & b & c & d", "a | b", "a | b | c | d",
                                        "(a | b) & (c | d)", "(a & b) | (c & d)", "(a | b) & c", "a & !b", "!a & b"};
  std::vector<lifted::UCQ> family_ucqs;
  int unsafe_family = 0;
  for (const auto& phi : family) {
    auto u = lifted::unfold(dsl::parse_query("Activation(v) | " + phi), program, cbma_schema);
    family_ucqs.push_back(u.numerator);
    family_ucqs.push_back(*u.denominator);
    unsafe_family += !lifted::check_safety(u.numerator, cbma_schema).safe;
    unsafe_family += !lifted::check_safety(*u.denominator, cbma_schema).safe;
  }

  std::mt19937_64 rng(9);
  int changed = 0;
  for (int i = 0; i < kRenamings; ++i) {
    changed += lifted::check_safety(rename(h0, rng), rst).safe;
    const auto& q = family_ucqs[i % family_ucqs.size()];
    changed += !lifted::check_safety(rename(q, rng), cbma_schema).safe;
  }
  return {h0_unsafe && unsafe_family == 0 && changed == 0,
          std::string("H0 ") + (h0_unsafe ? "unsafe" : "SAFE") + "; " + std::to_string(unsafe_family) + " of " +
              std::to_string(family_ucqs.size()) + " CBMA-family queries unsafe; " + std::to_string(changed) +
              " verdict changes under " + std::to_string(kRenamings) + " renamings"};
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
      {"oracle equivalence", oracle_equivalence},
      {"hard-mode estimator reproduction", eq2_reproduction},
      {"disjunction decomposition", disjunction_decomposition},
      {"soft-to-hard limit", soft_hard_limit},
      {"performance", performance},
      {"simulation F1 (soft beats hard at small n)", simulation_f1},
      {"statistical kernel", statistical_kernel},
      {"consistency metric", consistency_metric},
      {"safety checker", safety_checker},
  };
  std::set<int> selected;
  for (int i = 1; i < argc; ++i) selected.insert(std::stoi(argv[i]));
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int id = static_cast<int>(i) + 1;
    if (!selected.empty() && !selected.count(id)) continue;
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    failed += !o.pass;
    std::cout << "criterion " << id << " " << (o.pass ? "PASS" : "FAIL") << "  " << criteria[i].first << ": "
              << o.detail << std::endl;
  }
  return failed == 0 ? 0 : 1;
}
