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

#include <cstdint>
#include <functional>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "dpopt/common.hpp"
#include "dpopt/params.hpp"
#include "dpopt/pipeline.hpp"
#include "dpopt/sim.hpp"

namespace dpopt {

/// Every resource assignment accepted by a layout heuristic, in tree (DFS)
/// order. Each entry assigns the structural and resource parameters only.
struct CompilingSpace {
  std::vector<std::string> columns;
  std::vector<Config> configs;
  Heuristic heuristic = Heuristic::greedy;
  std::size_t heuristic_calls = 0;

  std::size_t size() const { return configs.size(); }
  bool empty() const { return configs.empty(); }
  const Config& operator[](std::size_t i) const { return configs.at(i); }
};

/// Fills every parameter missing from `partial` with its domain minimum.
inline Config complete_with_minimums(const std::vector<ParamSpec>& specs, Config partial) {
  for (const auto& s : specs) {
    if (!partial.has(s.name)) partial.set(s.name, domain_min(s.domain));
  }
  return partial;
}

/// Product of the domain sizes of the structural and resource parameters,
/// counting a resource parameter only under the branches where it is active.
inline std::size_t bounded_grid_size(const std::vector<ParamSpec>& specs);

/// Counts heuristic invocations; the single point where preprocessing asks
/// "does this assignment fit?".
class FitOracle {
 public:
  FitOracle(const SketchProgram& program, const PipelineModel& pipe, Heuristic heuristic)
      : program_(program), pipe_(pipe), heuristic_(heuristic) {}

  bool fits(const Config& partial) {
    ++calls_;
    const Config full = complete_with_minimums(program_.params(), partial);
    return layout(program_.footprint(full), pipe_, heuristic_).fits;
  }

  std::size_t calls() const { return calls_; }
  const SketchProgram& program() const { return program_; }
  const PipelineModel& pipe() const { return pipe_; }
  Heuristic heuristic() const { return heuristic_; }

 private:
  const SketchProgram& program_;
  const PipelineModel& pipe_;
  Heuristic heuristic_;
  std::size_t calls_ = 0;
};

/// Largest value of `target` that fits with the parameters in `fixed` held
/// and every other parameter at its domain minimum; nullopt when even the
/// minimum does not fit.
///
/// The scan starts at default_start(target): if the start fits, every
/// smaller value fits too (demand is monotone) and the scan walks upward;
/// otherwise it walks downward. Power-of-two domains step by doubling.
inline std::optional<std::int64_t> upper_bound_scan(FitOracle& oracle, const Config& fixed, const ParamSpec& target) {
  const auto n = domain_size(target.domain);
  auto fits_at = [&](std::int64_t idx) {
    Config c = fixed;
    c.set(target.name, domain_value(target.domain, idx));
    return oracle.fits(c);
  };
  const std::int64_t start = *domain_index(target.domain, domain_clamp(target.domain, default_start(target, oracle.pipe())));
  if (fits_at(start)) {
    std::int64_t best = start;
    while (best + 1 < n && fits_at(best + 1)) ++best;
    return domain_value(target.domain, best);
  }
  for (std::int64_t i = start - 1; i >= 0; --i) {
    if (fits_at(i)) return domain_value(target.domain, i);
  }
  return std::nullopt;
}

inline std::optional<std::int64_t> upper_bound_scan(const SketchProgram& program, const PipelineModel& pipe,
                                                    const Config& fixed, const ParamSpec& target,
                                                    Heuristic heuristic) {
  FitOracle oracle(program, pipe, heuristic);
  return upper_bound_scan(oracle, fixed, target);
}

namespace detail {

inline void enumerate_branches(const std::vector<const ParamSpec*>& selectors, std::size_t i, Config& prefix,
                               const std::function<void(const Config&)>& visit) {
  if (i == selectors.size()) {
    visit(prefix);
    return;
  }
  const auto& s = *selectors[i];
  for (std::int64_t k = 0; k < domain_size(s.domain); ++k) {
    prefix.set(s.name, domain_value(s.domain, k));
    enumerate_branches(selectors, i + 1, prefix, visit);
  }
  prefix.values.erase(s.name);
}

inline void enumerate_tree(FitOracle& oracle, const std::vector<const ParamSpec*>& order, std::size_t i,
                           Config& prefix, std::vector<Config>& out) {
  if (i == order.size()) {
    out.push_back(prefix);
    return;
  }
  const auto& p = *order[i];
  const auto bound = upper_bound_scan(oracle, prefix, p);
  if (!bound) return;
  const auto last = *domain_index(p.domain, *bound);
  for (std::int64_t k = 0; k <= last; ++k) {
    prefix.set(p.name, domain_value(p.domain, k));
    enumerate_tree(oracle, order, i + 1, prefix, out);
  }
  prefix.values.erase(p.name);
}

}  // namespace detail

/// Builds the compiling space. Structural selectors are enumerated first, one
/// pass per branch; within a branch the active resource parameters are
/// processed in declaration order, each scanned once per valid prefix of the
/// previously processed ones. Inactive resource parameters sit at their
/// domain minimum.
inline CompilingSpace enumerate_compiling(const SketchProgram& program, const PipelineModel& pipe,
                                          Heuristic heuristic) {
  const auto& specs = program.params();
  std::vector<const ParamSpec*> selectors, resources;
  for (const auto& s : specs) {
    if (s.structural) selectors.push_back(&s);
    else if (s.is_resource()) resources.push_back(&s);
  }
  if (resources.empty()) throw Error(program.name() + ": no resource parameters to preprocess");

  CompilingSpace space;
  space.heuristic = heuristic;
  for (const auto* s : selectors) space.columns.push_back(s->name);
  for (const auto* s : resources) space.columns.push_back(s->name);

  FitOracle oracle(program, pipe, heuristic);
  Config prefix;
  detail::enumerate_branches(selectors, 0, prefix, [&](const Config& branch) {
    Config fixed = branch;
    std::vector<const ParamSpec*> active;
    for (const auto* r : resources) {
      if (is_active(*r, branch)) active.push_back(r);
      else fixed.set(r->name, domain_min(r->domain));
    }
    detail::enumerate_tree(oracle, active, 0, fixed, space.configs);
  });
  space.heuristic_calls = oracle.calls();
  if (space.empty()) {
    throw DomainError(program.name() + ": no resource configuration fits the pipeline");
  }
  return space;
}

inline std::size_t bounded_grid_size(const std::vector<ParamSpec>& specs) {
  std::vector<const ParamSpec*> selectors;
  for (const auto& s : specs) {
    if (s.structural) selectors.push_back(&s);
  }
  std::size_t total = 0;
  Config prefix;
  detail::enumerate_branches(selectors, 0, prefix, [&](const Config& branch) {
    std::size_t n = 1;
    for (const auto& s : specs) {
      if (!s.structural && s.is_resource() && is_active(s, branch)) n *= static_cast<std::size_t>(domain_size(s.domain));
    }
    total += n;
  });
  return total;
}

/// CSV with one column per structural/resource parameter; Choice values are
/// written by branch name.
inline void write_space_csv(const CompilingSpace& space, const std::vector<ParamSpec>& specs, std::ostream& out) {
  for (std::size_t i = 0; i < space.columns.size(); ++i) out << (i ? "," : "") << space.columns[i];
  out << '\n';
  for (const auto& c : space.configs) {
    for (std::size_t i = 0; i < space.columns.size(); ++i) {
      const auto& name = space.columns[i];
      const auto v = c.at(name);
      out << (i ? "," : "");
      const ParamSpec* s = find_spec(specs, name);
      const auto* ch = s ? std::get_if<Choice>(&s->domain) : nullptr;
      if (ch) out << ch->branches.at(static_cast<std::size_t>(v));
      else out << v;
    }
    out << '\n';
  }
}

}  // namespace dpopt
