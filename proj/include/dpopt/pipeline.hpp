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
#include <cstdint>
#include <map>
#include <optional>
#include <queue>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "dpopt/common.hpp"
#include "dpopt/pipeline_model.hpp"

namespace dpopt {

struct ArrayUse {
  std::string id;
  std::int64_t words = 1;

  friend bool operator==(const ArrayUse&, const ArrayUse&) = default;
};

/// One unit of placement. Actions touching the same array must share a stage.
struct Action {
  std::string id;
  std::set<std::string> deps;
  std::optional<ArrayUse> array;
  std::int64_t hash_units = 0;
  std::int64_t alu_slots = 0;

  friend bool operator==(const Action&, const Action&) = default;
};

struct DataflowGraph {
  std::vector<Action> actions;

  std::int64_t total_sram_words() const {
    std::map<std::string, std::int64_t> arrays;
    for (const auto& a : actions) {
      if (a.array) arrays[a.array->id] = a.array->words;
    }
    std::int64_t total = 0;
    for (const auto& [id, w] : arrays) total += w;
    return total;
  }
  std::int64_t total_hash_units() const {
    std::int64_t t = 0;
    for (const auto& a : actions) t += a.hash_units;
    return t;
  }
  std::int64_t total_alu_slots() const {
    std::int64_t t = 0;
    for (const auto& a : actions) t += a.alu_slots;
    return t;
  }

  /// Topological order with lexicographic tie-breaking. Throws on duplicate
  /// ids, dangling dependencies, cycles and inconsistent array widths.
  std::vector<std::size_t> topological_order() const {
    std::map<std::string, std::size_t> index;
    for (std::size_t i = 0; i < actions.size(); ++i) {
      if (actions[i].array && actions[i].array->words < 1) {
        throw Error("action '" + actions[i].id + "': array width must be >= 1");
      }
      if (actions[i].hash_units < 0 || actions[i].alu_slots < 0) {
        throw Error("action '" + actions[i].id + "': negative resource demand");
      }
      if (!index.emplace(actions[i].id, i).second) {
        throw Error("duplicate action id '" + actions[i].id + "'");
      }
    }
    std::map<std::string, std::int64_t> widths;
    for (const auto& a : actions) {
      if (!a.array) continue;
      auto [it, fresh] = widths.emplace(a.array->id, a.array->words);
      if (!fresh && it->second != a.array->words) {
        throw Error("array '" + a.array->id + "' accessed with inconsistent widths");
      }
    }
    std::vector<std::size_t> indegree(actions.size(), 0);
    std::vector<std::vector<std::size_t>> users(actions.size());
    for (std::size_t i = 0; i < actions.size(); ++i) {
      for (const auto& d : actions[i].deps) {
        auto it = index.find(d);
        if (it == index.end()) {
          throw Error("action '" + actions[i].id + "' depends on unknown action '" + d + "'");
        }
        users[it->second].push_back(i);
        ++indegree[i];
      }
    }
    using Item = std::pair<std::string, std::size_t>;
    std::priority_queue<Item, std::vector<Item>, std::greater<>> ready;
    for (std::size_t i = 0; i < actions.size(); ++i) {
      if (indegree[i] == 0) ready.emplace(actions[i].id, i);
    }
    std::vector<std::size_t> order;
    order.reserve(actions.size());
    while (!ready.empty()) {
      const std::size_t i = ready.top().second;
      ready.pop();
      order.push_back(i);
      for (std::size_t u : users[i]) {
        if (--indegree[u] == 0) ready.emplace(actions[u].id, u);
      }
    }
    if (order.size() != actions.size()) throw Error("dataflow graph has a dependency cycle");
    return order;
  }

  /// Number of actions on the longest dependency chain.
  std::int64_t longest_path() const {
    const auto order = topological_order();
    std::map<std::string, std::int64_t> depth;
    std::int64_t best = 0;
    for (std::size_t i : order) {
      std::int64_t d = 1;
      for (const auto& dep : actions[i].deps) d = std::max(d, depth[dep] + 1);
      depth[actions[i].id] = d;
      best = std::max(best, d);
    }
    return best;
  }

  // Line form: `action <id> deps=<csv> array=<id>:<words> hash=<n> alu=<n>`,
  // with `array=-` when the action touches no array.
  std::string to_text() const {
    std::ostringstream os;
    for (const auto& a : actions) {
      os << "action " << a.id << " deps=";
      bool first = true;
      for (const auto& d : a.deps) {
        if (!first) os << ',';
        os << d;
        first = false;
      }
      os << " array=";
      if (a.array) os << a.array->id << ':' << a.array->words;
      else os << '-';
      os << " hash=" << a.hash_units << " alu=" << a.alu_slots << '\n';
    }
    return os.str();
  }

  static DataflowGraph parse(std::istream& in) {
    DataflowGraph g;
    std::string line;
    int lineno = 0;
    auto fail = [&](const std::string& why) {
      throw Error("dataflow graph line " + std::to_string(lineno) + ": " + why);
    };
    auto to_int = [&](const std::string& s) {
      try {
        std::size_t used = 0;
        auto v = std::stoll(s, &used);
        if (used != s.size()) fail("bad integer '" + s + "'");
        return static_cast<std::int64_t>(v);
      } catch (const std::logic_error&) {
        fail("bad integer '" + s + "'");
      }
      return std::int64_t{0};
    };
    while (std::getline(in, line)) {
      ++lineno;
      std::istringstream ls(line);
      std::string word;
      if (!(ls >> word)) continue;
      if (word != "action") fail("expected 'action'");
      Action a;
      if (!(ls >> a.id)) fail("missing action id");
      bool seen_deps = false, seen_array = false, seen_hash = false, seen_alu = false;
      while (ls >> word) {
        auto eq = word.find('=');
        if (eq == std::string::npos) fail("expected key=value, got '" + word + "'");
        const std::string key = word.substr(0, eq), val = word.substr(eq + 1);
        if (key == "deps") {
          seen_deps = true;
          std::istringstream ds(val);
          std::string d;
          while (std::getline(ds, d, ',')) {
            if (!d.empty()) a.deps.insert(d);
          }
        } else if (key == "array") {
          seen_array = true;
          if (val != "-") {
            auto colon = val.rfind(':');
            if (colon == std::string::npos) fail("array must be <id>:<words>");
            a.array = ArrayUse{val.substr(0, colon), to_int(val.substr(colon + 1))};
          }
        } else if (key == "hash") {
          seen_hash = true;
          a.hash_units = to_int(val);
        } else if (key == "alu") {
          seen_alu = true;
          a.alu_slots = to_int(val);
        } else {
          fail("unknown key '" + key + "'");
        }
      }
      if (!(seen_deps && seen_array && seen_hash && seen_alu)) fail("missing field");
      g.actions.push_back(std::move(a));
    }
    return g;
  }

  friend bool operator==(const DataflowGraph&, const DataflowGraph&) = default;
};

enum class Heuristic { dataflow, greedy };

inline const char* to_string(Heuristic h) { return h == Heuristic::dataflow ? "dataflow" : "greedy"; }

struct FitResult {
  bool fits = false;
  /// Action id -> 1-based stage.
  std::optional<std::map<std::string, std::int64_t>> assignment;
  std::optional<std::string> reason;
};

namespace detail {

inline FitResult layout_dataflow(const DataflowGraph& dfg, const PipelineModel& pipe,
                                 const std::vector<std::size_t>& order) {
  std::map<std::string, std::int64_t> stage;
  for (std::size_t i : order) {
    std::int64_t s = 1;
    for (const auto& d : dfg.actions[i].deps) s = std::max(s, stage.at(d) + 1);
    stage[dfg.actions[i].id] = s;
  }
  std::int64_t used = 0;
  for (const auto& [id, s] : stage) used = std::max(used, s);
  FitResult r;
  if (used <= pipe.stages) {
    r.fits = true;
    r.assignment = std::move(stage);
  } else {
    r.reason = "dependency chain needs " + std::to_string(used) + " stages, pipeline has " +
               std::to_string(pipe.stages);
  }
  return r;
}

inline FitResult layout_greedy(const DataflowGraph& dfg, const PipelineModel& pipe,
                               const std::vector<std::size_t>& order) {
  const auto n = static_cast<std::size_t>(pipe.stages);
  std::vector<std::int64_t> sram(n + 1, pipe.sram_words_per_stage);
  std::vector<std::int64_t> hash(n + 1, pipe.hash_units_per_stage);
  std::vector<std::int64_t> alu(n + 1, pipe.alu_slots_per_stage);
  std::map<std::string, std::int64_t> array_stage;
  std::map<std::string, std::int64_t> stage;
  FitResult r;

  for (std::size_t i : order) {
    const Action& a = dfg.actions[i];
    std::int64_t earliest = 1;
    for (const auto& d : a.deps) earliest = std::max(earliest, stage.at(d) + 1);

    std::optional<std::int64_t> pinned;
    if (a.array) {
      if (auto it = array_stage.find(a.array->id); it != array_stage.end()) pinned = it->second;
    }
    auto fits_at = [&](std::int64_t s) {
      const auto k = static_cast<std::size_t>(s);
      if (a.array && !pinned && sram[k] < a.array->words) return false;
      return hash[k] >= a.hash_units && alu[k] >= a.alu_slots;
    };

    std::optional<std::int64_t> chosen;
    if (pinned) {
      if (*pinned >= earliest && fits_at(*pinned)) chosen = pinned;
    } else {
      for (std::int64_t s = earliest; s <= pipe.stages; ++s) {
        if (fits_at(s)) {
          chosen = s;
          break;
        }
      }
    }
    if (!chosen) {
      r.reason = "no stage can host action '" + a.id + "'";
      return r;
    }
    const auto k = static_cast<std::size_t>(*chosen);
    if (a.array && !pinned) {
      sram[k] -= a.array->words;
      array_stage[a.array->id] = *chosen;
    }
    hash[k] -= a.hash_units;
    alu[k] -= a.alu_slots;
    stage[a.id] = *chosen;
  }
  r.fits = true;
  r.assignment = std::move(stage);
  return r;
}

}  // namespace detail

/// Decides whether a program's resource demand fits the pipeline.
///
/// `dataflow` only checks that the longest dependency chain fits in the
/// stage count. `greedy` places actions first-fit in topological order
/// (lexicographic id ties) and additionally enforces per-stage SRAM, hash
/// units and ALU slots; an array lives in exactly one stage and is charged
/// once. Anything greedy accepts, dataflow accepts too.
inline FitResult layout(const DataflowGraph& dfg, const PipelineModel& pipe, Heuristic heuristic) {
  pipe.validate();
  const auto order = dfg.topological_order();
  return heuristic == Heuristic::dataflow ? detail::layout_dataflow(dfg, pipe, order)
                                          : detail::layout_greedy(dfg, pipe, order);
}

}  // namespace dpopt
