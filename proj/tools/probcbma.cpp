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

// Command-line front end: query, explain, simulate, bench-f1, bench-consistency.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "probcbma/cbma/dataset.hpp"
#include "probcbma/cbma/encode.hpp"
#include "probcbma/cbma/estimators.hpp"
#include "probcbma/config.hpp"
#include "probcbma/dsl/parser.hpp"
#include "probcbma/dsl/validate.hpp"
#include "probcbma/engine.hpp"
#include "probcbma/error.hpp"
#include "probcbma/experiments.hpp"
#include "probcbma/oracle.hpp"
#include "probcbma/probdb.hpp"
#include "probcbma/sim.hpp"

namespace {

using namespace probcbma;

constexpr int kUserError = 2;
constexpr int kVerdictError = 3;

struct Inputs {
  std::string program_file;
  std::vector<std::string> tables;
  std::vector<std::string> choice_tables;
  std::string dataset;
  std::string mode = "hard";
  double tau = 0.1;
  double alpha = 300.0;
};

struct Loaded {
  std::optional<dsl::ValidatedProgram> program;
  ProbDatabase db;
  std::optional<cbma::CbmaDataset> dataset;
  cbma::ThresholdConfig threshold;
};

std::pair<std::string, std::string> split_binding(const std::string& spec) {
  auto eq = spec.find('=');
  if (eq == std::string::npos || eq == 0) throw Error("expected NAME=PATH, got '" + spec + "'");
  return {spec.substr(0, eq), spec.substr(eq + 1)};
}

std::vector<std::string> tuple_columns(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path, 0, 0, path);
  std::string header;
  std::getline(in, header);
  if (!header.empty() && header.back() == '\r') header.pop_back();
  std::vector<std::string> out;
  std::stringstream ss(header);
  for (std::string field; std::getline(ss, field, '\t');)
    if (field != "p") out.push_back(field);
  if (out.empty()) throw DataError("header names no tuple columns", 1, 0, path);
  return out;
}

Loaded load_inputs(const Inputs& in) {
  Loaded out;
  out.threshold = cbma::ThresholdConfig{cbma::parse_mode(in.mode), in.tau, in.alpha};
  out.threshold.validate();
  if (!in.dataset.empty()) {
    if (!in.program_file.empty()) throw Error("give either --dataset or --program, not both");
    out.dataset = cbma::load_dataset(in.dataset);
    auto encoded = cbma::encode_program(*out.dataset, out.threshold);
    out.program = std::move(encoded.program);
    out.db = std::move(encoded.db);
    return out;
  }
  if (in.program_file.empty()) throw Error("a query needs --dataset or --program");
  out.program = dsl::validate_program(dsl::parse_program_file(in.program_file));
  out.db = database_from_program(*out.program);
  for (const auto& spec : in.tables) {
    auto [name, path] = split_binding(spec);
    out.db.add(load_tsv(name, path, tuple_columns(path)));
  }
  for (const auto& spec : in.choice_tables) {
    auto [name, path] = split_binding(spec);
    ProbRelation r = load_tsv(name, path, tuple_columns(path));
    std::vector<Symbol> args;
    std::vector<double> probs;
    for (std::size_t i = 0; i < r.size(); ++i) {
      auto row = r.row(i);
      args.insert(args.end(), row.begin(), row.end());
      probs.push_back(r.prob(i));
    }
    out.db.add(ProbRelation::from_rows(name, r.arity(), std::move(args), std::move(probs), Semantics::Choice));
  }
  return out;
}

void add_input_options(CLI::App& cmd, Inputs& in) {
  cmd.add_option("--program", in.program_file, "program file (.npl)");
  cmd.add_option("--table", in.tables, "independent relation NAME=PATH.tsv (header row, optional p column)");
  cmd.add_option("--choice-table", in.choice_tables, "choice relation NAME=PATH.tsv");
  cmd.add_option("--dataset", in.dataset, "directory with features.tsv and activations.tsv");
  cmd.add_option("--mode", in.mode, "term probabilities: hard or soft")->check(CLI::IsMember({"hard", "soft"}));
  cmd.add_option("--tau", in.tau, "TF-IDF threshold");
  cmd.add_option("--alpha", in.alpha, "logistic slope of the soft mode");
}

void write_output(const std::string& text, const std::string& path) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream f(path);
  f << text;
  if (!f) throw Error("cannot write " + path);
}

std::string voxel_variable(const dsl::Query& q) {
  if (q.target.predicate != "Activation" || q.target.arity() != 1 || q.target.args[0].is_constant())
    throw UnsupportedQuery("the estimator answers Activation(v) | formula only; use --engine lifted");
  return q.target.args[0].name();
}

std::string significance_tsv(const cbma::CbmaDataset& ds, const std::vector<double>& weights, const std::string& column,
                             double base) {
  auto counts = cbma::weighted_counts(ds, weights);
  auto tests = cbma::test_voxels(counts, base);
  std::vector<std::uint32_t> order(ds.n_voxels());
  for (std::uint32_t k = 0; k < order.size(); ++k) order[k] = k;
  std::sort(order.begin(), order.end(), [&](auto a, auto b) { return ds.voxels()[a].str() < ds.voxels()[b].str(); });
  std::ostringstream out;
  out.precision(17);
  out << column << "\tp\tG\tp_value\tsignificant\tactive\n";
  for (auto k : order)
    out << ds.voxels()[k].str() << '\t' << counts.probability(k) << '\t' << tests[k].g.g << '\t' << tests[k].g.p << '\t'
        << (tests[k].significant ? 1 : 0) << '\t' << (tests[k].active ? 1 : 0) << '\n';
  return out.str();
}

int report(const std::exception& e, int code) {
  if (const auto* s = dynamic_cast<const SourceError*>(&e)) {
    std::cerr << (s->file().empty() ? "<input>" : s->file()) << ':' << s->line();
    if (s->column() > 0) std::cerr << ':' << s->column();
    std::cerr << ": error: " << s->message() << '\n';
  } else {
    std::cerr << "error: " << e.what() << '\n';
  }
  return code;
}

std::vector<std::size_t> parse_sizes(const std::string& text) {
  std::vector<std::size_t> out;
  std::stringstream ss(text);
  for (std::string item; std::getline(ss, item, ',');) {
    try {
      out.push_back(std::stoul(item));
    } catch (const std::exception&) {
      throw Error("bad sample size '" + item + "'");
    }
  }
  if (out.empty()) throw Error("no sample sizes given");
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Probabilistic logic queries over coordinate-based meta-analysis databases"};
  app.require_subcommand(1);

  Inputs query_in;
  std::string query_text, engine = "auto", out_path;
  bool cross_check = false, significance = false;
  double significance_base = 0.01;
  std::uint64_t seed = 0;
  auto* query = app.add_subcommand("query", "answer P[target | condition] and print a TSV table");
  add_input_options(*query, query_in);
  query->add_option("query", query_text, "e.g. \"Activation(v) | insula & speech\"")->required();
  query->add_option("--engine", engine, "estimator, lifted or oracle (default: estimator for --dataset)")
      ->check(CLI::IsMember({"auto", "estimator", "lifted", "oracle"}));
  query->add_flag("--oracle", cross_check, "also run the possible-worlds oracle and report the largest difference");
  query->add_flag("--significance", significance, "add G-test columns (estimator only)");
  query->add_option("--base", significance_base, "family-wise threshold before Bonferroni correction");
  query->add_option("--seed", seed, "accepted for uniformity; queries are deterministic");
  query->add_option("--out", out_path, "output file (default stdout)");

  Inputs explain_in;
  std::string explain_text;
  auto* explain = app.add_subcommand("explain", "print the extensional plan of a query");
  add_input_options(*explain, explain_in);
  explain->add_option("query", explain_text)->required();

  std::string sim_config, sim_out;
  std::optional<std::uint64_t> sim_seed;
  auto* simulate = app.add_subcommand("simulate", "generate a synthetic dataset with ground truth");
  simulate->add_option("--config", sim_config, "key = value generator settings");
  simulate->add_option("--seed", sim_seed);
  simulate->add_option("--out", sim_out, "output directory")->required();

  std::string f1_config, f1_sizes = "150,500,1500,5000", f1_out;
  std::size_t f1_repeats = 10;
  std::optional<std::size_t> f1_population;
  std::optional<std::uint64_t> f1_seed;
  std::optional<double> f1_tau, f1_alpha;
  auto* bench_f1 = app.add_subcommand("bench-f1", "soft versus hard F1 on simulated data");
  bench_f1->add_option("--config", f1_config, "generator settings");
  bench_f1->add_option("--population", f1_population, "studies in each simulated population (default 10000)");
  bench_f1->add_option("--sizes", f1_sizes, "comma-separated sample sizes");
  bench_f1->add_option("--repeats", f1_repeats);
  bench_f1->add_option("--seed", f1_seed);
  bench_f1->add_option("--tau", f1_tau);
  bench_f1->add_option("--alpha", f1_alpha);
  bench_f1->add_option("--significance", significance_base, "family-wise threshold before Bonferroni correction");
  bench_f1->add_option("--out", f1_out, "output prefix; writes PREFIX.tsv and PREFIX.json");

  std::string cons_dataset, cons_sizes = "150,500,1500,5000", cons_out;
  std::vector<std::string> cons_queries;
  experiments::ConsistencyConfig cons_cfg;
  auto* bench_cons = app.add_subcommand("bench-consistency", "sub-sampling consistency of thresholded maps");
  bench_cons->add_option("--dataset", cons_dataset)->required();
  bench_cons->add_option("--sizes", cons_sizes);
  bench_cons->add_option("--subsamples", cons_cfg.subsamples);
  bench_cons->add_option("--query", cons_queries, "term pair a&b (repeatable; default all pairs of the top 11 terms)");
  bench_cons->add_option("--tau", cons_cfg.tau);
  bench_cons->add_option("--alpha", cons_cfg.alpha);
  bench_cons->add_option("--seed", cons_cfg.seed);
  bench_cons->add_option("--significance", cons_cfg.significance);
  bench_cons->add_option("--out", cons_out, "output prefix; writes PREFIX.tsv and PREFIX.json");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : kUserError;
  }

  try {
    if (*query) {
      Loaded in = load_inputs(query_in);
      dsl::Query q = dsl::parse_query(query_text);
      if (engine == "auto") engine = in.dataset ? "estimator" : "lifted";
      std::string text;
      ra::ProbTable table;
      if (engine == "estimator") {
        if (!in.dataset) throw Error("the estimator engine needs --dataset");
        const std::string column = voxel_variable(q);
        auto weights = cbma::formula_weights(*in.dataset, in.threshold, q.condition ? *q.condition : dsl::Formula::truth());
        table = cbma::estimate_from_weights(*in.dataset, weights, column);
        text = significance ? significance_tsv(*in.dataset, weights, column, significance_base) : table.to_tsv();
      } else {
        if (significance) throw Error("--significance needs the estimator engine");
        table = engine == "lifted" ? lifted_query(q, *in.program, in.db) : oracle_query(q, *in.program, in.db).conditional();
        text = table.to_tsv();
      }
      if (cross_check) {
        ra::ProbTable reference = oracle_query(q, *in.program, in.db).conditional();
        std::fprintf(stderr, "max |%s - oracle| = %.3g\n", engine.c_str(), ra::max_abs_difference(table, reference));
      }
      write_output(text, out_path);
    } else if (*explain) {
      Loaded in = load_inputs(explain_in);
      std::cout << explain_query(dsl::parse_query(explain_text), *in.program, in.db.schema());
    } else if (*simulate) {
      sim::GenConfig cfg = sim_config.empty() ? sim::GenConfig{} : load_gen_config(sim_config);
      if (sim_seed) cfg.seed = *sim_seed;
      auto ds = sim::generate(cfg);
      cbma::save_dataset(ds.data, sim_out);
      std::ofstream truth(std::filesystem::path(sim_out) / "truth.tsv");
      truth << "voxel_id\ttruth\n";
      for (std::size_t k = 0; k < ds.truth.size(); ++k) truth << ds.data.voxels()[k].str() << '\t' << int(ds.truth[k]) << '\n';
      if (!truth) throw Error("cannot write truth.tsv");
    } else if (*bench_f1) {
      experiments::F1Config cfg;
      if (f1_population) cfg.population.n_studies = *f1_population;
      if (!f1_config.empty()) cfg.population = load_gen_config(f1_config, cfg.population);
      if (f1_seed) cfg.population.seed = *f1_seed;
      if (f1_tau) cfg.population.tau = *f1_tau;
      if (f1_alpha) cfg.population.alpha = *f1_alpha;
      cfg.sample_sizes = parse_sizes(f1_sizes);
      cfg.repeats = f1_repeats;
      cfg.significance = significance_base;
      auto result = experiments::run_f1_benchmark(cfg);
      if (f1_out.empty()) {
        std::cout << result.to_tsv();
        std::cerr << result.summary_json();
      } else {
        write_output(result.to_tsv(), f1_out + ".tsv");
        write_output(result.summary_json(), f1_out + ".json");
      }
    } else if (*bench_cons) {
      auto ds = cbma::load_dataset(cons_dataset);
      cons_cfg.sample_sizes = parse_sizes(cons_sizes);
      for (const auto& q : cons_queries) {
        auto amp = q.find('&');
        if (amp == std::string::npos) throw Error("expected a term pair a&b, got '" + q + "'");
        cons_cfg.queries.emplace_back(q.substr(0, amp), q.substr(amp + 1));
      }
      auto result = experiments::run_consistency_benchmark(ds, cons_cfg);
      if (cons_out.empty()) {
        std::cout << result.to_tsv();
        std::cerr << result.summary_json();
      } else {
        write_output(result.to_tsv(), cons_out + ".tsv");
        write_output(result.summary_json(), cons_out + ".json");
      }
    }
  } catch (const UnsupportedQuery& e) {
    return report(e, kVerdictError);
  } catch (const TooLargeError& e) {
    return report(e, kVerdictError);
  } catch (const std::exception& e) {
    return report(e, kUserError);
  }
  return 0;
}
