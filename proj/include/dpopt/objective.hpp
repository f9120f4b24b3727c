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
#include <cmath>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "dpopt/common.hpp"
#include "dpopt/sim.hpp"

namespace dpopt {

enum class ObjectiveKind {
  miss_rate,
  network_cost,
  max_percentile_error,
  mean_estimate_error,
  collision_ratio,
  topk_error,
};

inline const char* to_string(ObjectiveKind k) {
  switch (k) {
    case ObjectiveKind::miss_rate: return "miss_rate";
    case ObjectiveKind::network_cost: return "network_cost";
    case ObjectiveKind::max_percentile_error: return "max_percentile_error";
    case ObjectiveKind::mean_estimate_error: return "mean_estimate_error";
    case ObjectiveKind::collision_ratio: return "collision_ratio";
    case ObjectiveKind::topk_error: return "topk_error";
  }
  return "?";
}

/// Hook names shared by the bundled applications and their objectives.
namespace hooks {
inline constexpr const char* kLogHits = "logHits";        // (found)
inline constexpr const char* kRecirc = "recirc";          // (1) per recirculated packet
inline constexpr const char* kRttSample = "rtt_sample";   // (rtt) from the data-plane sampler
inline constexpr const char* kRttTrue = "rtt_true";       // (rtt) from the exact matcher
inline constexpr const char* kCmsEstimate = "cms_est";    // (key, estimate after update)
inline constexpr const char* kTrueCount = "true_count";   // (key, exact count so far)
inline constexpr const char* kMht = "mht";                // (outcome: 0 hit, 1 inserted, 2 collision)
inline constexpr const char* kPacket = "pkt";             // (key) exact packet stream
inline constexpr const char* kTable = "table";            // (key, count) end-of-run readout
}  // namespace hooks

inline constexpr std::size_t kTopK = 128;

struct HitCounts {
  std::int64_t hits = 0;
  std::int64_t misses = 0;
  std::int64_t recirculations = 0;
};

inline HitCounts hit_counts(const MeasurementSink& sink) {
  HitCounts c;
  if (const auto* h = sink.find(hooks::kLogHits)) {
    for (std::size_t i = 0; i < h->size(); ++i) (h->at(i, 0) != 0 ? c.hits : c.misses)++;
  }
  c.recirculations = static_cast<std::int64_t>(sink.count(hooks::kRecirc));
  return c;
}

/// misses / (hits + misses)
inline double miss_rate(const MeasurementSink& sink) {
  const auto c = hit_counts(sink);
  if (c.hits + c.misses == 0) throw DomainError("miss_rate: no cache accesses recorded");
  return static_cast<double>(c.misses) / static_cast<double>(c.hits + c.misses);
}

/// 2m + h + 0.5r with m, h, r the miss, hit and recirculation fractions per request.
inline double network_cost(double m, double h, double r) { return 2.0 * m + h + 0.5 * r; }

inline double network_cost(const MeasurementSink& sink) {
  const auto c = hit_counts(sink);
  const auto n = static_cast<double>(c.hits + c.misses);
  if (n == 0) throw DomainError("network_cost: no cache accesses recorded");
  return network_cost(static_cast<double>(c.misses) / n, static_cast<double>(c.hits) / n,
                      static_cast<double>(c.recirculations) / n);
}

/// Linear interpolation between order statistics; `sorted` must be ascending
/// and non-empty, q in [0, 100].
inline double percentile(const std::vector<double>& sorted, double q) {
  const double pos = q / 100.0 * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return sorted[lo] + (sorted[hi] - sorted[lo]) * frac;
}

/// max over integer q in [5, 95] of |sampled_q - true_q| / true_q.
inline double max_percentile_error(std::vector<double> sampled, std::vector<double> truth) {
  if (sampled.empty()) throw DomainError("max_percentile_error: no sampled values");
  if (truth.empty()) throw DomainError("max_percentile_error: no ground-truth values");
  std::sort(sampled.begin(), sampled.end());
  std::sort(truth.begin(), truth.end());
  double worst = 0;
  for (int q = 5; q <= 95; ++q) {
    const double t = percentile(truth, q);
    if (t <= 0) throw DomainError("max_percentile_error: non-positive ground-truth percentile");
    worst = std::max(worst, std::abs(percentile(sampled, q) - t) / t);
  }
  return worst;
}

inline std::vector<double> hook_column(const MeasurementSink& sink, const char* hook, std::size_t col = 0) {
  std::vector<double> out;
  if (const auto* h = sink.find(hook)) {
    out.reserve(h->size());
    for (std::size_t i = 0; i < h->size(); ++i) out.push_back(static_cast<double>(h->at(i, col)));
  }
  return out;
}

inline double max_percentile_error(const MeasurementSink& sink) {
  return max_percentile_error(hook_column(sink, hooks::kRttSample), hook_column(sink, hooks::kRttTrue));
}

/// Mean over distinct keys of |estimate - exact| / max(1, exact), using each
/// key's last recorded pair.
inline double mean_estimate_error(const MeasurementSink& sink) {
  const auto* est = sink.find(hooks::kCmsEstimate);
  const auto* exact = sink.find(hooks::kTrueCount);
  if (!est || !exact || est->size() == 0) throw DomainError("mean_estimate_error: no updates recorded");
  if (est->size() != exact->size()) throw Error("mean_estimate_error: estimate and oracle hooks disagree in length");
  std::map<std::int64_t, std::pair<double, double>> last;
  for (std::size_t i = 0; i < est->size(); ++i) {
    last[est->at(i, 0)] = {static_cast<double>(est->at(i, 1)), static_cast<double>(exact->at(i, 1))};
  }
  double sum = 0;
  for (const auto& [key, p] : last) sum += std::abs(p.first - p.second) / std::max(1.0, p.second);
  return sum / static_cast<double>(last.size());
}

/// collisions / accesses
inline double collision_ratio(const MeasurementSink& sink) {
  const auto* h = sink.find(hooks::kMht);
  if (!h || h->size() == 0) throw DomainError("collision_ratio: no accesses recorded");
  std::int64_t collisions = 0;
  for (std::size_t i = 0; i < h->size(); ++i) collisions += h->at(i, 0) == 2 ? 1 : 0;
  return static_cast<double>(collisions) / static_cast<double>(h->size());
}

/// Mean relative count error over the true top-k keys (ties broken by key).
/// A key missing from the table readout has estimate 0.
inline double topk_error(const MeasurementSink& sink, std::size_t k = kTopK) {
  const auto* pkts = sink.find(hooks::kPacket);
  if (!pkts || pkts->size() == 0) throw DomainError("topk_error: no packets recorded");
  std::map<std::int64_t, std::int64_t> exact;
  for (std::size_t i = 0; i < pkts->size(); ++i) ++exact[pkts->at(i, 0)];
  std::map<std::int64_t, std::int64_t> table;
  if (const auto* t = sink.find(hooks::kTable)) {
    for (std::size_t i = 0; i < t->size(); ++i) table[t->at(i, 0)] = t->at(i, 1);
  }
  std::vector<std::pair<std::int64_t, std::int64_t>> ranked(exact.begin(), exact.end());
  std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
    return a.second != b.second ? a.second > b.second : a.first < b.first;
  });
  ranked.resize(std::min(k, ranked.size()));
  double sum = 0;
  for (const auto& [key, n] : ranked) {
    auto it = table.find(key);
    const double e = it == table.end() ? 0.0 : static_cast<double>(it->second);
    sum += std::abs(e - static_cast<double>(n)) / static_cast<double>(n);
  }
  return sum / static_cast<double>(ranked.size());
}

inline double objective_score(ObjectiveKind kind, const MeasurementSink& sink) {
  switch (kind) {
    case ObjectiveKind::miss_rate: return miss_rate(sink);
    case ObjectiveKind::network_cost: return network_cost(sink);
    case ObjectiveKind::max_percentile_error: return max_percentile_error(sink);
    case ObjectiveKind::mean_estimate_error: return mean_estimate_error(sink);
    case ObjectiveKind::collision_ratio: return collision_ratio(sink);
    case ObjectiveKind::topk_error: return topk_error(sink);
  }
  throw Error("unknown objective");
}

}  // namespace dpopt
