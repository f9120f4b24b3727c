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

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "dpopt/objective.hpp"
#include "dpopt/params.hpp"
#include "dpopt/pipeline.hpp"
#include "dpopt/sim.hpp"
#include "dpopt/structures.hpp"

namespace dpopt::apps {

enum class CacheVariant { cms, precision, plain };

inline const char* to_string(CacheVariant v) {
  switch (v) {
    case CacheVariant::cms: return "cms";
    case CacheVariant::precision: return "precision";
    case CacheVariant::plain: return "plain";
  }
  return "?";
}

inline CacheVariant parse_cache_variant(const std::string& s) {
  if (s == "cms") return CacheVariant::cms;
  if (s == "precision") return CacheVariant::precision;
  if (s == "plain") return CacheVariant::plain;
  throw Error("unknown cache variant '" + s + "'");
}

enum class CacheOutcome { hit, miss_forwarded };

/// Parameter names of the cache program.
namespace cache_params {
inline constexpr const char* kTracker = "tracker";        // key-tracker selector
inline constexpr const char* kTables = "tables";          // hash tables in the cache
inline constexpr const char* kEntries = "entries";        // slots per table
inline constexpr const char* kCmsRows = "cms_rows";
inline constexpr const char* kCmsCols = "cms_cols";
inline constexpr const char* kTimeout = "timeout";        // ns of inactivity before a slot expires
inline constexpr const char* kThreshold = "threshold";    // cms count needed to displace a live entry
}  // namespace cache_params

struct CacheOptions {
  std::vector<CacheVariant> variants{CacheVariant::cms, CacheVariant::precision, CacheVariant::plain};
  ObjectiveKind objective = ObjectiveKind::miss_rate;
  IntRange tables{1, 4};
  PowerOfTwo entries{4, 11};
  IntRange cms_rows{1, 4};
  PowerOfTwo cms_cols{4, 12};
  PowerOfTwo timeout{10, 30};
  IntRange threshold{0, 31};
};

/// Concrete cache settings decoded from a Config.
struct CacheConfig {
  CacheVariant tracker = CacheVariant::plain;
  std::int64_t tables = 1;
  std::int64_t entries = 1;
  std::int64_t cms_rows = 1;
  std::int64_t cms_cols = 1;
  std::int64_t timeout = 0;
  std::int64_t threshold = 0;
};

/// Runtime state of the cache: a multi-way hash table of (key, last access,
/// count) cells plus the key tracker selected by the configuration.
class CacheState {
 public:
  CacheState(const CacheConfig& cfg, std::uint64_t seed)
      : cfg_(cfg),
        table_(cfg.tables, cfg.entries, derive_seed(seed, "cache.table"), cfg.timeout),
        precision_(cfg.tables, cfg.entries, derive_seed(seed, "cache.table")) {
    if (cfg.tracker == CacheVariant::cms) cms_.emplace(cfg.cms_rows, cfg.cms_cols, derive_seed(seed, "cache.cms"));
    last_access_.assign(static_cast<std::size_t>(cfg.tables * cfg.entries), 0);
  }

  struct Result {
    CacheOutcome outcome;
    bool recirculate = false;
  };

  /// Request handler body. A hit refreshes the entry. A miss inserts into an
  /// empty or expired candidate slot when one exists; otherwise the tracker
  /// decides whether the key displaces an entry.
  Result request(std::int64_t key, std::int64_t now, Rng& rng) {
    return cfg_.tracker == CacheVariant::precision ? request_precision(key, now, rng) : request_hashed(key, now);
  }

  std::uint64_t digest() const {
    std::uint64_t h = cfg_.tracker == CacheVariant::precision ? precision_.digest() : table_.digest();
    for (auto t : last_access_) h = splitmix64(h ^ static_cast<std::uint64_t>(t));
    if (cms_) h = splitmix64(h ^ cms_->digest());
    return h;
  }

  const CacheConfig& config() const { return cfg_; }

 private:
  Result request_hashed(std::int64_t key, std::int64_t now) {
    if (auto w = table_.find(key)) {
      table_.cell(*w, key).last_access = now;
      return {CacheOutcome::hit};
    }
    Result r{CacheOutcome::miss_forwarded};
    if (cms_) {
      // Counting a miss takes a second pass through the pipeline.
      cms_->update(key);
      r.recirculate = true;
    }
    if (auto w = table_.first_free(key, now)) {
      table_.write(*w, key, now);
      return r;
    }
    if (cfg_.tracker == CacheVariant::plain ||
        cms_->query(key) > static_cast<std::uint64_t>(cfg_.threshold)) {
      table_.write(table_.oldest_way(key), key, now);
    }
    return r;
  }

  bool expired(std::size_t cell, std::int64_t now) const {
    return now - last_access_[cell] > cfg_.timeout;
  }

  Result request_precision(std::int64_t key, std::int64_t now, Rng& rng) {
    if (auto w = precision_.find(key)) {
      const auto idx = precision_.slot(*w, key);
      ++precision_.at(idx).count;
      last_access_[idx] = now;
      return {CacheOutcome::hit};
    }
    for (std::int64_t w = 0; w < cfg_.tables; ++w) {
      const auto idx = precision_.slot(w, key);
      auto& cell = precision_.at(idx);
      if (!cell.occupied || expired(idx, now)) {
        cell = PrecisionTable::Cell{key, 1, true};
        last_access_[idx] = now;
        return {CacheOutcome::miss_forwarded};
      }
    }
    const auto outcome = precision_access(precision_, key, rng);
    if (outcome == PrecisionOutcome::replaced) {
      last_access_[precision_.slot(*precision_.find(key), key)] = now;
      return {CacheOutcome::miss_forwarded, true};
    }
    return {CacheOutcome::miss_forwarded};
  }

  CacheConfig cfg_;
  MultiHashTable table_;
  PrecisionTable precision_;
  std::optional<Cms> cms_;
  std::vector<std::int64_t> last_access_;
};

/// In-network key/value cache with a selectable key tracker (count-min
/// sketch, Precision, or none). Handles `request{key}` events and records
/// `logHits(found)` per request and `recirc(1)` per recirculated packet.
class CacheApp final : public SketchProgram {
 public:
  explicit CacheApp(CacheOptions opts = {}) : opts_(std::move(opts)) {
    using namespace cache_params;
    if (opts_.variants.empty()) throw Error("cache: at least one tracker variant is required");
    std::vector<std::string> names;
    std::vector<std::int64_t> cms_branches;
    for (std::size_t i = 0; i < opts_.variants.size(); ++i) {
      names.emplace_back(to_string(opts_.variants[i]));
      if (opts_.variants[i] == CacheVariant::cms) cms_branches.push_back(static_cast<std::int64_t>(i));
    }
    specs_.push_back(selector_param(kTracker, names));
    specs_.push_back(count_param(kTables, opts_.tables));
    specs_.push_back(memory_param(kEntries, opts_.entries));
    auto rows = count_param(kCmsRows, opts_.cms_rows);
    auto cols = memory_param(kCmsCols, opts_.cms_cols);
    auto threshold = nonresource_param(kThreshold, opts_.threshold);
    for (auto* p : {&rows, &cols, &threshold}) p->active_when = Activation{kTracker, cms_branches};
    specs_.push_back(rows);
    specs_.push_back(cols);
    specs_.push_back(nonresource_param(kTimeout, opts_.timeout));
    specs_.push_back(threshold);
  }

  std::string name() const override { return "cache"; }
  const std::vector<ParamSpec>& params() const override { return specs_; }
  const CacheOptions& options() const { return opts_; }

  CacheConfig decode(const Config& c) const {
    using namespace cache_params;
    const auto branch = c.at(kTracker);
    if (branch < 0 || branch >= static_cast<std::int64_t>(opts_.variants.size())) {
      throw Error("cache: tracker selects undeclared branch " + std::to_string(branch));
    }
    CacheConfig cc;
    cc.tracker = opts_.variants[static_cast<std::size_t>(branch)];
    cc.tables = c.at(kTables);
    cc.entries = c.at(kEntries);
    cc.cms_rows = c.at(kCmsRows);
    cc.cms_cols = c.at(kCmsCols);
    cc.timeout = c.at(kTimeout);
    cc.threshold = c.at(kThreshold);
    return cc;
  }

  /// Lookups chain through the tables (table i is consulted after table i-1
  /// misses); the tracker's actions follow the last lookup.
  DataflowGraph footprint(const Config& config) const override {
    const auto cc = decode(config);
    DataflowGraph g;
    std::string prev;
    for (std::int64_t i = 0; i < cc.tables; ++i) {
      Action a{"cache_lookup_" + std::to_string(i), {}, ArrayUse{"cache_" + std::to_string(i), cc.entries}, 1, 2};
      if (!prev.empty()) a.deps.insert(prev);
      prev = a.id;
      g.actions.push_back(std::move(a));
    }
    switch (cc.tracker) {
      case CacheVariant::cms: {
        std::set<std::string> rows;
        for (std::int64_t j = 0; j < cc.cms_rows; ++j) {
          Action a{"cms_row_" + std::to_string(j), {prev}, ArrayUse{"cms_" + std::to_string(j), cc.cms_cols}, 1, 1};
          rows.insert(a.id);
          g.actions.push_back(std::move(a));
        }
        g.actions.push_back(Action{"cms_min", rows, std::nullopt, 0, 1});
        g.actions.push_back(Action{"cms_decide", {"cms_min"}, std::nullopt, 0, 1});
        break;
      }
      case CacheVariant::precision:
        g.actions.push_back(Action{"precision_min", {prev}, std::nullopt, 0, 1});
        g.actions.push_back(Action{"precision_decide", {"precision_min"}, std::nullopt, 0, 1});
        break;
      case CacheVariant::plain:
        g.actions.push_back(Action{"evict", {prev}, std::nullopt, 0, 1});
        break;
    }
    return g;
  }

  std::unique_ptr<ProgramInstance> instantiate(const Config& config, std::uint64_t seed) const override {
    return std::make_unique<Instance>(decode(config), seed);
  }

  double objective(const MeasurementSink& sink, const Config&) const override {
    return objective_score(opts_.objective, sink);
  }

 private:
  class Instance final : public ProgramInstance {
   public:
    Instance(const CacheConfig& cfg, std::uint64_t seed) : state_(cfg, seed) {}

    void handle(const Event& e, Context& ctx) override {
      if (e.name == "recirc") {
        ctx.record(hooks::kRecirc, {1});
        return;
      }
      if (e.name != "request") return;
      const auto r = state_.request(e.get("key"), ctx.now(), ctx.rng());
      ctx.record(hooks::kLogHits, {r.outcome == CacheOutcome::hit ? 1 : 0});
      if (r.recirculate) ctx.recirculate(Event{"recirc", 0, {Field{"key", e.get("key")}}});
    }

    std::uint64_t digest() const override { return state_.digest(); }

   private:
    CacheState state_;
  };

  CacheOptions opts_;
  std::vector<ParamSpec> specs_;
};

}  // namespace dpopt::apps
