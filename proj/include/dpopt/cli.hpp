// Copyright 2026 The dpopt Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "dpopt/apps/registry.hpp"
#include "dpopt/objective.hpp"
#include "dpopt/optimizer.hpp"
#include "dpopt/pipeline_model.hpp"
#include "dpopt/preprocess.hpp"
#include "dpopt/search/strategies.hpp"
#include "dpopt/sim.hpp"
#include "dpopt/traces.hpp"

namespace dpopt {

inline ObjectiveKind parse_objective(const std::string& s) {
  for (auto k : {ObjectiveKind::miss_rate, ObjectiveKind::network_cost, ObjectiveKind::max_percentile_error,
                 ObjectiveKind::mean_estimate_error, ObjectiveKind::collision_ratio, ObjectiveKind::topk_error}) {
    if (s == to_string(k)) return k;
  }
  throw Error("unknown objective '" + s + "'");
}

namespace cli_detail {

struct AppFlags {
  std::string app;
  std::vector<std::string> variants;
  std::string objective;
  std::string pipeline;

  void add(CLI::App& cmd) {
    cmd.add_option("--app", app, "application")->required()->check(CLI::IsMember(apps::app_names()));
    cmd.add_option("--variant", variants, "cache key trackers to consider (cms, precision, plain)")
        ->check(CLI::IsMember({"cms", "precision", "plain"}));
    cmd.add_option("--objective", objective, "cache objective (miss_rate, network_cost)")
        ->check(CLI::IsMember({"miss_rate", "network_cost"}));
    cmd.add_option("--pipeline", pipeline, "pipeline model file (key=value)")->check(CLI::ExistingFile);
  }

  std::unique_ptr<SketchProgram> program() const {
    apps::AppOptions opts;
    if (!variants.empty()) {
      opts.cache.variants.clear();
      for (const auto& v : variants) opts.cache.variants.push_back(apps::parse_cache_variant(v));
    }
    if (!objective.empty()) opts.cache.objective = parse_objective(objective);
    return apps::make_app(app, opts);
  }

  PipelineModel pipe() const { return pipeline.empty() ? PipelineModel{} : PipelineModel::load(pipeline); }

  nlohmann::json manifest() const {
    return {{"app", app},
            {"variants", variants},
            {"objective", objective},
            {"pipeline", pipeline.empty() ? std::string("default") : pipeline}};
  }
};

inline void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path);
  out << text;
  if (!out) throw Error("write failed: " + path);
}

/// Runs `cmd <config file>`; exit status 0 means the configuration compiled.
inline Verifier command_verifier(const std::string& cmd, const SketchProgram& program) {
  return [cmd, &program](const Config& c) {
    const auto path = std::filesystem::temp_directory_path() /
                      ("dpopt-verify-" + std::to_string(fnv1a(c.to_text())) + ".cfg");
    write_text(path.string(), format_config(program.params(), c));
    const int rc = std::system((cmd + " '" + path.string() + "'").c_str());
    std::filesystem::remove(path);
    return rc == 0;
  };
}

}  // namespace cli_detail

/// Entry point of the `dpopt` tool. Returns 0 on success, 1 on usage or I/O
/// errors, 2 when the problem has no usable answer.
inline int run_cli(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  CLI::App app{"Data-plane program parameter optimizer"};
  app.require_subcommand(1);

  // gen
  auto* gen = app.add_subcommand("gen", "generate a synthetic trace");
  std::string kind = "zipf", preset = "high", gen_out, test_out;
  WorkloadSpec ws;
  double train_fraction = 0.0;
  gen->add_option("--kind", kind, "zipf or reqresp")->check(CLI::IsMember({"zipf", "reqresp"}));
  gen->add_option("--preset", preset, "skew preset")->check(CLI::IsMember({"high", "moderate", "uniform"}));
  gen->add_option("--keys", ws.n_keys, "distinct keys")->check(CLI::PositiveNumber);
  gen->add_option("--events", ws.n_events, "events")->check(CLI::PositiveNumber);
  gen->add_option("--seed", ws.seed, "seed");
  gen->add_option("--spacing", ws.spacing_ns, "ns between requests")->check(CLI::NonNegativeNumber);
  gen->add_option("--delay-mu", ws.delay_mu, "log-normal delay mu");
  gen->add_option("--delay-sigma", ws.delay_sigma, "log-normal delay sigma")->check(CLI::NonNegativeNumber);
  gen->add_option("-o,--out", gen_out, "trace CSV")->required();
  auto* frac_opt = gen->add_option("--train-fraction", train_fraction, "write only this prefix to --out")
                       ->check(CLI::Range(0.0, 1.0));
  gen->add_option("--test-out", test_out, "write the remaining suffix here")->needs(frac_opt);

  // preprocess
  auto* pre = app.add_subcommand("preprocess", "enumerate the compiling space");
  cli_detail::AppFlags pre_flags;
  pre_flags.add(*pre);
  std::string heuristic = "greedy", pre_out;
  pre->add_option("--heuristic", heuristic, "greedy or dataflow")->check(CLI::IsMember({"greedy", "dataflow"}));
  pre->add_option("-o,--out", pre_out, "space CSV (default: stdout)");

  // simulate
  auto* sim = app.add_subcommand("simulate", "run one configuration over a trace");
  cli_detail::AppFlags sim_flags;
  sim_flags.add(*sim);
  std::string config_path, trace_path, sink_out;
  std::uint64_t sim_seed = 0;
  sim->add_option("--config", config_path, "configuration file (name=value)")->required()->check(CLI::ExistingFile);
  sim->add_option("--trace", trace_path, "trace CSV")->required()->check(CLI::ExistingFile);
  sim->add_option("--seed", sim_seed, "seed");
  sim->add_option("-o,--out", sink_out, "measurement JSON");

  // optimize
  auto* opt = app.add_subcommand("optimize", "search for the best compiling configuration");
  cli_detail::AppFlags opt_flags;
  opt_flags.add(*opt);
  std::string strategy = "exhaustive", train_path, test_path, report_out, verify_cmd;
  OptimizeOptions oo;
  opt->add_option("--strategy", strategy, "search strategy")
      ->check(CLI::IsMember({"exhaustive", "simanneal", "neldermead", "bayesian", "all"}));
  opt->add_option("--budget", oo.budget_secs, "search budget in seconds")->check(CLI::PositiveNumber);
  opt->add_option("--seed", oo.seed, "seed");
  opt->add_option("--train", train_path, "training trace CSV")->required()->check(CLI::ExistingFile);
  opt->add_option("--test", test_path, "held-out trace CSV")->check(CLI::ExistingFile);
  opt->add_option("-o,--out", report_out, "report JSON (default: stdout)");
  opt->add_option("--max-evals", oo.max_evaluations, "simulation cap per strategy (0 = none)");
  opt->add_option("--workers", oo.workers, "parallel evaluations (exhaustive only)")->check(CLI::PositiveNumber);
  opt->add_option("--verify-cmd", verify_cmd, "external compile check, called as CMD <config file>");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e, out, err);
    return rc == 0 ? 0 : 1;
  }

  try {
    if (*gen) {
      ws.kind = kind == "zipf" ? WorkloadKind::zipf_requests : WorkloadKind::request_response;
      ws.preset = preset == "high" ? SkewPreset::high : preset == "moderate" ? SkewPreset::moderate : SkewPreset::uniform;
      const Trace t = gen_trace(ws);
      if (train_fraction > 0.0) {
        auto [train, test] = split_trace(t, train_fraction);
        write_trace_csv(train, gen_out);
        if (!test_out.empty()) write_trace_csv(test, test_out);
      } else {
        write_trace_csv(t, gen_out);
      }
      return 0;
    }
    if (*pre) {
      auto program = pre_flags.program();
      const auto pipe = pre_flags.pipe();
      const auto space =
          enumerate_compiling(*program, pipe, heuristic == "greedy" ? Heuristic::greedy : Heuristic::dataflow);
      std::ostringstream csv;
      write_space_csv(space, program->params(), csv);
      const auto grid = bounded_grid_size(program->params());
      nlohmann::json stats{{"app", program->name()},
                           {"heuristic", heuristic},
                           {"pipeline_hash", pipe.hash_hex()},
                           {"space_size", space.size()},
                           {"grid_size", grid},
                           {"heuristic_calls", space.heuristic_calls},
                           {"reduction_pct", 100.0 * (1.0 - static_cast<double>(space.size()) / static_cast<double>(grid))}};
      if (pre_out.empty()) {
        out << csv.str();
        err << stats.dump() << '\n';
      } else {
        cli_detail::write_text(pre_out, csv.str());
        out << stats.dump(2) << '\n';
      }
      return 0;
    }
    if (*sim) {
      auto program = sim_flags.program();
      std::ifstream cf(config_path);
      const Config config = parse_config(program->params(), cf);
      if (auto v = validate_config(program->params(), config); !v.empty()) {
        throw DomainError("invalid config:\n" + describe(v));
      }
      const Trace trace = parse_trace_csv(trace_path);
      SimStats stats;
      SimOptions so;
      so.stats = &stats;
      const auto sink = simulate_trace(*program, config, trace, sim_seed, so);
      const double score = program->objective(sink, config);
      if (!sink_out.empty()) cli_detail::write_text(sink_out, sink.to_json().dump() + "\n");
      nlohmann::json r{{"app", program->name()},
                       {"config", config_json(program->params(), config)},
                       {"seed", sim_seed},
                       {"trace_events", stats.trace_events},
                       {"generated_events", stats.emitted_events},
                       {"score", score}};
      out << r.dump(2) << '\n';
      return 0;
    }
    if (*opt) {
      auto program = opt_flags.program();
      const auto pipe = opt_flags.pipe();
      oo.strategy = search::parse_strategy(strategy);
      if (!verify_cmd.empty()) oo.verifier = cli_detail::command_verifier(verify_cmd, *program);
      const Trace train = parse_trace_csv(train_path);
      const auto report = optimize(*program, train, pipe, oo);

      nlohmann::json manifest = opt_flags.manifest();
      manifest["strategy"] = strategy;
      manifest["seed"] = oo.seed;
      manifest["budget"] = oo.budget_secs;
      manifest["train"] = train_path;
      manifest["test"] = test_path;
      manifest["max_evals"] = oo.max_evaluations;
      manifest["workers"] = oo.workers;
      manifest["verify_cmd"] = verify_cmd;

      nlohmann::json j = report_json(*program, report);
      j["app"] = program->name();
      j["strategy"] = strategy;
      j["seed"] = oo.seed;
      j["budget"] = oo.budget_secs;
      j["manifest"] = manifest;
      j["pipeline"] = pipe.to_text();
      j["pipeline_hash"] = pipe.hash_hex();
      if (!test_path.empty()) {
        const Trace test = parse_trace_csv(test_path);
        const auto& best = report.results.best();
        j["test"] = {{"config", config_json(program->params(), best.config)},
                     {"score", evaluate_config(*program, best.config, test, oo.seed)}};
      }
      if (report_out.empty()) out << j.dump(2) << '\n';
      else cli_detail::write_text(report_out, j.dump(2) + "\n");
      return 0;
    }
  } catch (const DomainError& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}

}  // namespace dpopt
