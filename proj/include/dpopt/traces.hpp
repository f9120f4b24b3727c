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
#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <numeric>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "dpopt/common.hpp"
#include "dpopt/sim.hpp"

namespace dpopt {

enum class WorkloadKind { zipf_requests, request_response };
enum class SkewPreset { high, moderate, uniform };

inline const char* to_string(SkewPreset p) {
  switch (p) {
    case SkewPreset::high: return "high";
    case SkewPreset::moderate: return "moderate";
    case SkewPreset::uniform: return "uniform";
  }
  return "?";
}

/// Expected share of requests that go to the ten most popular keys.
inline double preset_top10_target(SkewPreset p) {
  switch (p) {
    case SkewPreset::high: return 0.58;
    case SkewPreset::moderate: return 0.15;
    case SkewPreset::uniform: return 0.0;
  }
  return 0.0;
}

struct WorkloadSpec {
  WorkloadKind kind = WorkloadKind::zipf_requests;
  std::int64_t n_keys = 100000;
  std::int64_t n_events = 100000;
  SkewPreset preset = SkewPreset::high;
  /// Gap between consecutive requests.
  std::int64_t spacing_ns = 100;
  /// Request/response delay ~ exp(N(mu, sigma)) nanoseconds.
  double delay_mu = 10.8;
  double delay_sigma = 1.0;
  std::uint64_t seed = 1;

  void validate() const {
    if (n_keys < 1 || n_events < 1) throw Error("workload: keys and events must be >= 1");
    if (spacing_ns < 0) throw Error("workload: spacing must be >= 0");
    if (delay_sigma < 0) throw Error("workload: delay sigma must be >= 0");
  }
};

/// Expected top-10 share of a zipf(s) law over n keys.
inline double zipf_top10_share(double s, std::int64_t n) {
  double top = 0, all = 0;
  for (std::int64_t r = 1; r <= n; ++r) {
    const double w = std::pow(static_cast<double>(r), -s);
    all += w;
    if (r <= 10) top += w;
  }
  return top / all;
}

/// Exponent whose expected top-10 share equals `target` over n keys.
/// Returns 0 (uniform) when the target is at or below the uniform share.
inline double solve_zipf_exponent(double target, std::int64_t n) {
  if (n <= 10 || target <= zipf_top10_share(0.0, n)) return 0.0;
  double lo = 0.0, hi = 8.0;
  for (int i = 0; i < 45; ++i) {
    const double mid = 0.5 * (lo + hi);
    (zipf_top10_share(mid, n) < target ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

namespace detail {

inline Trace gen_zipf(const WorkloadSpec& spec) {
  Rng rng(derive_seed(spec.seed, "trace.zipf"));
  const auto n = static_cast<std::size_t>(spec.n_keys);
  const double s = solve_zipf_exponent(preset_top10_target(spec.preset), spec.n_keys);
  std::vector<double> cdf(n);
  double acc = 0;
  for (std::size_t r = 0; r < n; ++r) {
    acc += std::pow(static_cast<double>(r + 1), -s);
    cdf[r] = acc;
  }
  for (auto& c : cdf) c /= acc;
  // Popularity rank -> key id, so that hot keys are not numerically adjacent.
  std::vector<std::int64_t> key_of(n);
  std::iota(key_of.begin(), key_of.end(), std::int64_t{1});
  for (std::size_t i = n; i > 1; --i) std::swap(key_of[i - 1], key_of[rng.below(i)]);

  Trace t;
  t.events.reserve(static_cast<std::size_t>(spec.n_events));
  for (std::int64_t i = 0; i < spec.n_events; ++i) {
    const double u = rng.uniform();
    auto rank = static_cast<std::size_t>(std::upper_bound(cdf.begin(), cdf.end(), u) - cdf.begin());
    rank = std::min(rank, n - 1);
    t.events.push_back(Event{"request", i * spec.spacing_ns, {Field{"key", key_of[rank]}}});
  }
  return t;
}

inline Trace gen_request_response(const WorkloadSpec& spec) {
  Rng rng(derive_seed(spec.seed, "trace.reqresp"));
  struct Item {
    std::int64_t time;
    std::int64_t order;
    bool response;
    std::int64_t key;
  };
  std::vector<Item> items;
  items.reserve(static_cast<std::size_t>(2 * spec.n_events));
  for (std::int64_t i = 0; i < spec.n_events; ++i) {
    const std::int64_t t = i * spec.spacing_ns;
    const double d = std::exp(spec.delay_mu + spec.delay_sigma * rng.normal());
    const auto delay = std::max<std::int64_t>(1, std::llround(d));
    items.push_back({t, 2 * i, false, i + 1});
    items.push_back({t + delay, 2 * i + 1, true, i + 1});
  }
  std::sort(items.begin(), items.end(),
            [](const Item& a, const Item& b) { return a.time != b.time ? a.time < b.time : a.order < b.order; });
  items.resize(static_cast<std::size_t>(spec.n_events));
  Trace t;
  t.events.reserve(items.size());
  for (const auto& it : items) {
    t.events.push_back(Event{it.response ? "response" : "request", it.time, {Field{"key", it.key}}});
  }
  return t;
}

}  // namespace detail

/// Synthetic workload. zipf_requests: i.i.d. zipf key draws at uniform
/// spacing. request_response: uniquely keyed request/response pairs with
/// log-normal delays, merged in time order and truncated to n_events.
inline Trace gen_trace(const WorkloadSpec& spec) {
  spec.validate();
  return spec.kind == WorkloadKind::zipf_requests ? detail::gen_zipf(spec) : detail::gen_request_response(spec);
}

/// Time-ordered prefix of floor(fraction * n) events, and the rest.
inline std::pair<Trace, Trace> split_trace(const Trace& trace, double fraction) {
  if (!(fraction > 0.0 && fraction < 1.0)) throw Error("split fraction must lie in (0, 1)");
  const auto cut = static_cast<std::size_t>(std::floor(fraction * static_cast<double>(trace.size())));
  Trace train, test;
  train.events.assign(trace.events.begin(), trace.events.begin() + static_cast<std::ptrdiff_t>(cut));
  test.events.assign(trace.events.begin() + static_cast<std::ptrdiff_t>(cut), trace.events.end());
  return {std::move(train), std::move(test)};
}

/// Share of events carrying the k most frequent `key` values.
inline double top_k_share(const Trace& trace, std::size_t k) {
  std::unordered_map<std::int64_t, std::int64_t> counts;
  for (const auto& e : trace.events) ++counts[e.get("key")];
  std::vector<std::int64_t> c;
  c.reserve(counts.size());
  for (const auto& [key, n] : counts) c.push_back(n);
  std::sort(c.rbegin(), c.rend());
  const auto top = std::accumulate(c.begin(), c.begin() + static_cast<std::ptrdiff_t>(std::min(k, c.size())),
                                   std::int64_t{0});
  return trace.empty() ? 0.0 : static_cast<double>(top) / static_cast<double>(trace.size());
}

/// Largest number of requests arriving strictly between a request and its
/// response; the `span` input of formula_p.
inline std::int64_t max_request_span(const Trace& trace) {
  std::vector<std::int64_t> request_times;
  std::unordered_map<std::int64_t, std::int64_t> open;
  std::vector<std::pair<std::int64_t, std::int64_t>> pairs;
  for (const auto& e : trace.events) {
    if (e.name == "request") {
      request_times.push_back(e.time);
      open[e.get("key")] = e.time;
    } else if (e.name == "response") {
      auto it = open.find(e.get("key"));
      if (it != open.end()) {
        pairs.emplace_back(it->second, e.time);
        open.erase(it);
      }
    }
  }
  std::int64_t best = 1;
  for (const auto& [t0, t1] : pairs) {
    auto lo = std::upper_bound(request_times.begin(), request_times.end(), t0);
    auto hi = std::lower_bound(request_times.begin(), request_times.end(), t1);
    best = std::max<std::int64_t>(best, hi > lo ? hi - lo : 0);
  }
  return best;
}

// CSV: `time,event_name,field=value[,field=value...]`, no header, integer
// field values only.

inline void write_trace_csv(const Trace& trace, std::ostream& out) {
  std::string buf;
  buf.reserve(1 << 16);
  for (const auto& e : trace.events) {
    buf += std::to_string(e.time);
    buf += ',';
    buf += e.name;
    for (const auto& f : e.payload) {
      buf += ',';
      buf += f.name;
      buf += '=';
      buf += std::to_string(f.value);
    }
    buf += '\n';
    if (buf.size() > (1 << 16) - 256) {
      out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
      buf.clear();
    }
  }
  out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
}

inline void write_trace_csv(const Trace& trace, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write trace: " + path);
  write_trace_csv(trace, out);
  if (!out) throw Error("write failed: " + path);
}

inline Trace parse_trace_csv(std::istream& in) {
  Trace t;
  std::string line;
  std::int64_t lineno = 0;
  auto fail = [&](const std::string& why) -> void {
    throw Error("trace line " + std::to_string(lineno) + ": " + why);
  };
  auto to_int = [&](std::string_view s, const char* what) {
    std::int64_t v = 0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || p != s.data() + s.size()) fail(std::string("bad ") + what + " '" + std::string(s) + "'");
    return v;
  };
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) fail("empty line");
    std::string_view rest(line);
    std::vector<std::string_view> cols;
    while (true) {
      auto comma = rest.find(',');
      cols.push_back(rest.substr(0, comma));
      if (comma == std::string_view::npos) break;
      rest.remove_prefix(comma + 1);
    }
    if (cols.size() < 2) fail("expected time,event_name[,field=value...]");
    Event e;
    e.time = to_int(cols[0], "time");
    if (e.time < 0) fail("negative time");
    if (cols[1].empty()) fail("empty event name");
    e.name = std::string(cols[1]);
    for (std::size_t i = 2; i < cols.size(); ++i) {
      auto eq = cols[i].find('=');
      if (eq == std::string_view::npos || eq == 0) fail("expected field=value, got '" + std::string(cols[i]) + "'");
      e.payload.push_back(Field{std::string(cols[i].substr(0, eq)), to_int(cols[i].substr(eq + 1), "value")});
    }
    if (!t.events.empty() && e.time < t.events.back().time) fail("timestamp decreases");
    t.events.push_back(std::move(e));
  }
  return t;
}

inline Trace parse_trace_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open trace: " + path);
  return parse_trace_csv(in);
}

}  // namespace dpopt
