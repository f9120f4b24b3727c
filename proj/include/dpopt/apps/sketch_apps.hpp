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

#include <map>
#include <memory>
#include <set>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "dpopt/objective.hpp"
#include "dpopt/params.hpp"
#include "dpopt/pipeline.hpp"
#include "dpopt/sim.hpp"
#include "dpopt/structures.hpp"

// Thin bindings of the data-plane structures. Each handler drives one
// structure and records its estimate next to an exact oracle record.

namespace dpopt::apps {

struct CmsOptions {
  IntRange rows{1, 8};
  PowerOfTwo cols{4, 12};
};

/// Count-min frequency estimator over `request{key}` events.
class CmsApp final : public SketchProgram {
 public:
  explicit CmsApp(CmsOptions opts = {}) {
    specs_.push_back(count_param("rows", opts.rows));
    specs_.push_back(memory_param("cols", opts.cols));
  }

  std::string name() const override { return "cms"; }
  const std::vector<ParamSpec>& params() const override { return specs_; }

  /// One independent action per row.
  DataflowGraph footprint(const Config& c) const override {
    DataflowGraph g;
    for (std::int64_t r = 0; r < c.at("rows"); ++r) {
      g.actions.push_back(Action{"row_" + std::to_string(r), {}, ArrayUse{"cms_row_" + std::to_string(r), c.at("cols")}, 1, 1});
    }
    return g;
  }

  std::unique_ptr<ProgramInstance> instantiate(const Config& c, std::uint64_t seed) const override {
    return std::make_unique<Instance>(c.at("rows"), c.at("cols"), seed);
  }

  double objective(const MeasurementSink& sink, const Config&) const override { return mean_estimate_error(sink); }

 private:
  class Instance final : public ProgramInstance {
   public:
    Instance(std::int64_t rows, std::int64_t cols, std::uint64_t seed) : cms_(rows, cols, derive_seed(seed, "cms")) {}

    void handle(const Event& e, Context& ctx) override {
      if (e.name != "request") return;
      const auto key = e.get("key");
      cms_.update(key);
      ctx.record(hooks::kCmsEstimate, {key, static_cast<std::int64_t>(cms_.query(key))});
      ctx.record(hooks::kTrueCount, {key, ++exact_[key]});
    }
    std::uint64_t digest() const override { return cms_.digest(); }

   private:
    Cms cms_;
    std::unordered_map<std::int64_t, std::int64_t> exact_;  // oracle, not data-plane state
  };

  std::vector<ParamSpec> specs_;
};

struct MhtOptions {
  IntRange ways{1, 4};
  PowerOfTwo slots{4, 11};
  PowerOfTwo timeout{13, 18};
};

/// Flow table on a multi-hash table. A key whose entry was reclaimed after
/// going stale has lost its state, so its next access counts as a collision
/// just like an access that finds no free slot.
class MhtApp final : public SketchProgram {
 public:
  explicit MhtApp(MhtOptions opts = {}) {
    specs_.push_back(count_param("ways", opts.ways));
    specs_.push_back(memory_param("slots", opts.slots));
    specs_.push_back(nonresource_param("timeout", opts.timeout));
  }

  std::string name() const override { return "mht"; }
  const std::vector<ParamSpec>& params() const override { return specs_; }

  /// Ways are probed in sequence.
  DataflowGraph footprint(const Config& c) const override {
    DataflowGraph g;
    for (std::int64_t w = 0; w < c.at("ways"); ++w) {
      Action a{"way_" + std::to_string(w), {}, ArrayUse{"mht_" + std::to_string(w), c.at("slots")}, 1, 2};
      if (w > 0) a.deps.insert("way_" + std::to_string(w - 1));
      g.actions.push_back(std::move(a));
    }
    return g;
  }

  std::unique_ptr<ProgramInstance> instantiate(const Config& c, std::uint64_t seed) const override {
    return std::make_unique<Instance>(c.at("ways"), c.at("slots"), c.at("timeout"), seed);
  }

  double objective(const MeasurementSink& sink, const Config&) const override { return collision_ratio(sink); }

 private:
  class Instance final : public ProgramInstance {
   public:
    Instance(std::int64_t ways, std::int64_t slots, std::int64_t timeout, std::uint64_t seed)
        : mht_(ways, slots, derive_seed(seed, "mht"), timeout) {}

    void handle(const Event& e, Context& ctx) override {
      if (e.name != "request") return;
      const auto key = e.get("key");
      const auto now = ctx.now();
      if (!mht_.find(key)) {
        if (auto w = mht_.first_free(key, now)) {
          const auto& victim = mht_.cell(*w, key);
          if (victim.occupied) lost_.insert(victim.key);
        }
      }
      auto outcome = mht_access(mht_, key, now);
      if (outcome == MhtOutcome::inserted && lost_.erase(key) != 0) outcome = MhtOutcome::collision;
      ctx.record(hooks::kMht, {static_cast<std::int64_t>(outcome)});
    }
    std::uint64_t digest() const override { return mht_.digest(); }

   private:
    MultiHashTable mht_;
    std::unordered_set<std::int64_t> lost_;  // oracle
  };

  std::vector<ParamSpec> specs_;
};

struct PrecisionOptions {
  IntRange ways{1, 4};
  PowerOfTwo slots{4, 11};
};

/// Heavy-hitter detection with a Precision table. Replacements recirculate.
/// At the end of the run the table contents are read out through `table`.
class PrecisionApp final : public SketchProgram {
 public:
  explicit PrecisionApp(PrecisionOptions opts = {}) {
    specs_.push_back(count_param("ways", opts.ways));
    specs_.push_back(memory_param("slots", opts.slots));
  }

  std::string name() const override { return "precision"; }
  const std::vector<ParamSpec>& params() const override { return specs_; }

  DataflowGraph footprint(const Config& c) const override {
    DataflowGraph g;
    std::string prev;
    for (std::int64_t w = 0; w < c.at("ways"); ++w) {
      Action a{"way_" + std::to_string(w), {}, ArrayUse{"prec_" + std::to_string(w), c.at("slots")}, 1, 2};
      if (!prev.empty()) a.deps.insert(prev);
      prev = a.id;
      g.actions.push_back(std::move(a));
    }
    g.actions.push_back(Action{"min", {prev}, std::nullopt, 0, 1});
    g.actions.push_back(Action{"decide", {"min"}, std::nullopt, 0, 1});
    return g;
  }

  std::unique_ptr<ProgramInstance> instantiate(const Config& c, std::uint64_t seed) const override {
    return std::make_unique<Instance>(c.at("ways"), c.at("slots"), seed);
  }

  double objective(const MeasurementSink& sink, const Config&) const override { return topk_error(sink); }

 private:
  class Instance final : public ProgramInstance {
   public:
    Instance(std::int64_t ways, std::int64_t slots, std::uint64_t seed)
        : table_(ways, slots, derive_seed(seed, "precision")) {}

    void handle(const Event& e, Context& ctx) override {
      if (e.name == "recirc") {
        ctx.record(hooks::kRecirc, {1});
        return;
      }
      if (e.name != "request") return;
      const auto key = e.get("key");
      ctx.record(hooks::kPacket, {key});
      if (precision_access(table_, key, ctx.rng()) == PrecisionOutcome::replaced) {
        ctx.recirculate(Event{"recirc", 0, {Field{"key", key}}});
      }
    }

    void finish(Context& ctx) override {
      for (const auto& c : table_.cells()) {
        if (c.occupied) ctx.record(hooks::kTable, {c.key, static_cast<std::int64_t>(c.count)});
      }
    }

    std::uint64_t digest() const override { return table_.digest(); }

   private:
    PrecisionTable table_;
  };

  std::vector<ParamSpec> specs_;
};

struct FridgeOptions {
  PowerOfTwo size{12, 12};
  /// Reciprocal of the insertion probability.
  PowerOfTwo inv_p{0, 12};
};

/// RTT sampling with a Fridge over `request{key}` / `response{key}` pairs.
/// An unbounded exact matcher records the ground-truth RTTs.
class FridgeApp final : public SketchProgram {
 public:
  explicit FridgeApp(FridgeOptions opts = {}) {
    specs_.push_back(memory_param("size", opts.size));
    specs_.push_back(nonresource_param("inv_p", opts.inv_p));
  }

  std::string name() const override { return "fridge"; }
  const std::vector<ParamSpec>& params() const override { return specs_; }

  DataflowGraph footprint(const Config& c) const override {
    DataflowGraph g;
    g.actions.push_back(Action{"fridge", {}, ArrayUse{"fridge", c.at("size")}, 1, 2});
    return g;
  }

  std::unique_ptr<ProgramInstance> instantiate(const Config& c, std::uint64_t seed) const override {
    const auto inv_p = c.at("inv_p");
    int k = 0;
    while ((std::int64_t{1} << k) < inv_p) ++k;
    return std::make_unique<Instance>(c.at("size"), k, seed);
  }

  double objective(const MeasurementSink& sink, const Config&) const override { return max_percentile_error(sink); }

 private:
  class Instance final : public ProgramInstance {
   public:
    Instance(std::int64_t size, int p_exp, std::uint64_t seed) : fridge_(size, p_exp, derive_seed(seed, "fridge")) {}

    void handle(const Event& e, Context& ctx) override {
      const auto key = e.get("key");
      if (e.name == "request") {
        open_[key] = ctx.now();
        fridge_.request(key, ctx.now(), ctx.rng());
      } else if (e.name == "response") {
        if (auto it = open_.find(key); it != open_.end()) {
          ctx.record(hooks::kRttTrue, {ctx.now() - it->second});
          open_.erase(it);
        }
        if (auto rtt = fridge_.response(key, ctx.now())) ctx.record(hooks::kRttSample, {*rtt});
      }
    }
    std::uint64_t digest() const override { return fridge_.digest(); }

   private:
    Fridge fridge_;
    std::unordered_map<std::int64_t, std::int64_t> open_;  // oracle
  };

  std::vector<ParamSpec> specs_;
};

}  // namespace dpopt::apps
