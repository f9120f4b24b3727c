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

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <exception>
#include <thread>
#include <variant>
#include <vector>

#include <json.hpp>
#include "dpopt/params.hpp"
#include "dpopt/pipeline.hpp"
#include "dpopt/pipeline_model.hpp"
#include "dpopt/preprocess.hpp"
#include "dpopt/search/lattice.hpp"
#include "dpopt/search/strategies.hpp"
#include "dpopt/sim.hpp"

namespace dpopt {

inline double evaluate_config(const SketchProgram& program, const Config& config, const Trace& trace,
                              std::uint64_t seed) {
  SimOptions opts;
  return program.objective(simulate_trace(program, config, trace, seed, opts), config);
}

struct Evaluated {
  Config config;
  double score;
};

struct RankedEntry {
  Config config;
  double score;
  bool verified;
};

struct RankedResults {
  std::vector<RankedEntry> entries;
  double budget_used = 0.0;
  std::size_t iterations = 0;
  std::size_t evaluations = 0;

  /// The first verified entry.
  const RankedEntry& best() const {
    for (const auto& e : entries) {
      if (e.verified) return e;
    }
    throw Error("no verified entry");
  }
};

/// Every candidate failed verification: search again without these.
struct RestartDirective {
  std::vector<Config> exclude;
};

/// Returns true when a configuration is accepted by the target's compiler.
using Verifier = std::function<bool(const Config&)>;

inline Verifier layout_verifier(const SketchProgram& program, const PipelineModel& pipe) {
  return [&program, pipe](const Config& c) { return layout(program.footprint(c), pipe, Heuristic::greedy).fits; };
}

/// Sorts by score (ties by canonical text) and verifies in rank order until
/// one configuration is accepted.
inline std::variant<RankedResults, RestartDirective> verify_and_rank(std::vector<Evaluated> evaluated,
                                                                     const Verifier& verifier) {
  if (evaluated.empty()) throw Error("nothing to rank");
  std::stable_sort(evaluated.begin(), evaluated.end(), [](const Evaluated& a, const Evaluated& b) {
    return a.score != b.score ? a.score < b.score : a.config.to_text() < b.config.to_text();
  });
  RankedResults out;
  bool found = false;
  for (auto& e : evaluated) {
    const bool ok = !found && verifier(e.config);
    found = found || ok;
    out.entries.push_back(RankedEntry{e.config, e.score, ok});
  }
  if (found) return out;
  RestartDirective r;
  for (auto& e : evaluated) r.exclude.push_back(std::move(e.config));
  return r;
}

inline std::variant<RankedResults, RestartDirective> verify_and_rank(std::vector<Evaluated> evaluated,
                                                                     const SketchProgram& program,
                                                                     const PipelineModel& pipe) {
  return verify_and_rank(std::move(evaluated), layout_verifier(program, pipe));
}

struct OptimizeOptions {
  search::StrategyKind strategy = search::StrategyKind::exhaustive;
  double budget_secs = 60.0;
  std::uint64_t seed = 0;
  /// Cap on simulations per strategy run; 0 means unlimited.
  std::size_t max_evaluations = 0;
  unsigned workers = 1;
  /// Defaults to the greedy layout check.
  Verifier verifier;
  int max_restarts = 3;
};

struct OptimizeReport {
  RankedResults results;
  std::size_t space_size = 0;
  std::size_t heuristic_calls = 0;
  std::size_t grid_size = 0;
  int restarts = 0;
};

namespace detail {

using Clock = std::chrono::steady_clock;

/// Score cache keyed by canonical config text, plus first-seen order.
struct ScoreCache {
  std::map<std::string, double> scores;
  std::vector<Evaluated> order;
  std::size_t evaluations = 0;
};

inline CompilingSpace without(const CompilingSpace& space, const std::set<std::string>& excluded) {
  CompilingSpace out = space;
  out.configs.clear();
  for (const auto& c : space.configs) {
    if (!excluded.count(c.to_text())) out.configs.push_back(c);
  }
  return out;
}

inline Config project(const Config& c, const std::vector<std::string>& columns) {
  Config p;
  for (const auto& n : columns) p.set(n, c.at(n));
  return p;
}

inline std::size_t run_strategy(const SketchProgram& program, const Trace& trace, const search::Lattice& lattice,
                                search::StrategyKind kind, std::uint64_t seed, Clock::time_point deadline,
                                const OptimizeOptions& opts, ScoreCache& cache) {
  auto strategy = search::make_strategy(
      kind, lattice, derive_seed(seed, std::string("search.") + std::string(search::to_string(kind))));
  search::History history;
  std::size_t iterations = 0;
  std::size_t evaluations = 0;
  const unsigned workers = kind == search::StrategyKind::exhaustive ? std::max(1u, opts.workers) : 1u;
  auto under_cap = [&] { return opts.max_evaluations == 0 || evaluations < opts.max_evaluations; };

  bool first = true;
  do {
    const std::size_t batch = first ? 1 : workers;
    first = false;
    std::vector<search::SearchPoint> points;
    std::vector<Config> configs;
    for (std::size_t k = 0; k < batch; ++k) {
      auto p = strategy->next(history);
      if (!p) break;
      points.push_back(*p);
      configs.push_back(lattice.decode(*p));
      // Only exhaustive search may run ahead of its scores.
      if (kind != search::StrategyKind::exhaustive) break;
    }
    if (points.empty()) break;

    std::vector<double> scores(points.size());
    std::vector<bool> fresh(points.size(), false);
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(points.size());
    std::set<std::string> in_batch;
    for (std::size_t k = 0; k < points.size(); ++k) {
      const auto key = configs[k].to_text();
      if (auto it = cache.scores.find(key); it != cache.scores.end()) {
        scores[k] = it->second;
      } else if (in_batch.insert(key).second) {
        fresh[k] = true;
      }
    }
    auto work = [&](std::size_t k) {
      try {
        scores[k] = evaluate_config(program, configs[k], trace, seed);
      } catch (...) {
        errors[k] = std::current_exception();
      }
    };
    for (std::size_t k = 0; k < points.size(); ++k) {
      if (!fresh[k]) continue;
      if (points.size() == 1) work(k);
      else pool.emplace_back(work, k);
    }
    for (auto& t : pool) t.join();
    for (auto& e : errors) {
      if (e) std::rethrow_exception(e);
    }
    for (std::size_t k = 0; k < points.size(); ++k) {
      const auto key = configs[k].to_text();
      if (fresh[k]) {
        cache.scores.emplace(key, scores[k]);
        cache.order.push_back(Evaluated{configs[k], scores[k]});
        ++cache.evaluations;
        ++evaluations;
      } else {
        scores[k] = cache.scores.at(key);
      }
      history.add(points[k], scores[k]);
      ++iterations;
    }
  } while (Clock::now() < deadline && under_cap());
  return iterations;
}

}  // namespace detail

/// Preprocess, search under the wall-clock budget, then rank and verify.
/// The budget covers the search phase only. A restart excludes the rejected
/// resource assignments from the compiling space and searches again.
inline OptimizeReport optimize(const SketchProgram& program, const Trace& train, const PipelineModel& pipe,
                               const OptimizeOptions& opts) {
  if (!(opts.budget_secs > 0.0)) throw Error("budget must be positive");
  const CompilingSpace space = enumerate_compiling(program, pipe, Heuristic::greedy);
  const Verifier verifier = opts.verifier ? opts.verifier : layout_verifier(program, pipe);

  OptimizeReport report;
  report.space_size = space.size();
  report.heuristic_calls = space.heuristic_calls;
  report.grid_size = bounded_grid_size(program.params());

  std::set<std::string> excluded;
  for (;;) {
    const CompilingSpace live = detail::without(space, excluded);
    if (live.empty()) throw DomainError(program.name() + ": every compiling configuration was rejected");
    const search::Lattice lattice(live, program.params());

    const auto t0 = detail::Clock::now();
    detail::ScoreCache cache;
    std::size_t iterations = 0;
    std::vector<search::StrategyKind> kinds;
    if (opts.strategy == search::StrategyKind::all) {
      kinds = {search::StrategyKind::exhaustive, search::StrategyKind::simanneal, search::StrategyKind::neldermead,
               search::StrategyKind::bayesian};
    } else {
      kinds = {opts.strategy};
    }
    const auto share = std::chrono::duration<double>(opts.budget_secs / static_cast<double>(kinds.size()));
    for (auto kind : kinds) {
      const auto deadline = detail::Clock::now() + std::chrono::duration_cast<detail::Clock::duration>(share);
      iterations += detail::run_strategy(program, train, lattice, kind, opts.seed, deadline, opts, cache);
    }
    const double used = std::chrono::duration<double>(detail::Clock::now() - t0).count();

    auto ranked = verify_and_rank(cache.order, verifier);
    if (auto* r = std::get_if<RankedResults>(&ranked)) {
      r->budget_used = used;
      r->iterations = iterations;
      r->evaluations = cache.evaluations;
      report.results = std::move(*r);
      return report;
    }
    if (++report.restarts > opts.max_restarts) {
      throw DomainError(program.name() + ": no configuration verified after " + std::to_string(opts.max_restarts) +
                        " restarts");
    }
    for (const auto& c : std::get<RestartDirective>(ranked).exclude) {
      excluded.insert(detail::project(c, space.columns).to_text());
    }
  }
}

inline nlohmann::json config_json(const std::vector<ParamSpec>& specs, const Config& c) {
  nlohmann::json j = nlohmann::json::object();
  for (const auto& [name, v] : c.values) {
    const ParamSpec* s = find_spec(specs, name);
    const auto* ch = s ? std::get_if<Choice>(&s->domain) : nullptr;
    if (ch) j[name] = ch->branches.at(static_cast<std::size_t>(v));
    else j[name] = v;
  }
  return j;
}

/// Report body. Wall-clock time is left out so identical runs serialize
/// identically.
inline nlohmann::json report_json(const SketchProgram& program, const OptimizeReport& report) {
  nlohmann::json entries = nlohmann::json::array();
  for (const auto& e : report.results.entries) {
    entries.push_back({{"config", config_json(program.params(), e.config)}, {"score", e.score}, {"verified", e.verified}});
  }
  return {
      {"iterations", report.results.iterations},
      {"evaluations", report.results.evaluations},
      {"restarts", report.restarts},
      {"entries", entries},
      {"preprocess",
       {{"space_size", report.space_size},
        {"heuristic_calls", report.heuristic_calls},
        {"grid_size", report.grid_size}}},
  };
}

}  // namespace dpopt
