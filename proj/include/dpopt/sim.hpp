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
#include <initializer_list>
#include <map>
#include <memory>
#include <queue>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "dpopt/common.hpp"
#include "dpopt/params.hpp"
#include "dpopt/pipeline.hpp"

namespace dpopt {

struct Field {
  std::string name;
  std::int64_t value = 0;

  friend bool operator==(const Field&, const Field&) = default;
};

/// A packet or generated event. Time is integer nanoseconds.
struct Event {
  std::string name;
  std::int64_t time = 0;
  std::vector<Field> payload;

  std::int64_t get(std::string_view field) const {
    for (const auto& f : payload) {
      if (f.name == field) return f.value;
    }
    throw Error("event '" + name + "' has no field '" + std::string(field) + "'");
  }

  friend bool operator==(const Event&, const Event&) = default;
};

/// Time-ordered event list.
struct Trace {
  std::vector<Event> events;

  std::size_t size() const { return events.size(); }
  bool empty() const { return events.empty(); }

  void check_order() const {
    for (std::size_t i = 1; i < events.size(); ++i) {
      if (events[i].time < events[i - 1].time) {
        throw Error("trace timestamps decrease at event " + std::to_string(i));
      }
    }
    if (!events.empty() && events.front().time < 0) throw Error("trace has a negative timestamp");
  }

  friend bool operator==(const Trace&, const Trace&) = default;
};

/// Append-only store for extern calls. Each hook keeps a fixed-arity list
/// of integer tuples. Program handlers can write to it but never read it.
class MeasurementSink {
 public:
  struct Hook {
    std::size_t arity = 0;
    std::vector<std::int64_t> data;

    std::size_t size() const { return arity == 0 ? 0 : data.size() / arity; }
    std::span<const std::int64_t> row(std::size_t i) const { return {data.data() + i * arity, arity}; }
    std::int64_t at(std::size_t i, std::size_t col) const { return data[i * arity + col]; }
  };

  MeasurementSink() = default;

  /// A sink that drops every record.
  static MeasurementSink disabled() {
    MeasurementSink s;
    s.enabled_ = false;
    return s;
  }

  bool enabled() const { return enabled_; }

  void record(std::string_view hook, std::span<const std::int64_t> values) {
    if (!enabled_) return;
    auto it = hooks_.find(hook);
    if (it == hooks_.end()) {
      if (values.empty()) throw Error("extern '" + std::string(hook) + "' recorded an empty tuple");
      it = hooks_.emplace(std::string(hook), Hook{values.size(), {}}).first;
    } else if (it->second.arity != values.size()) {
      throw Error("extern '" + std::string(hook) + "' recorded with inconsistent arity");
    }
    it->second.data.insert(it->second.data.end(), values.begin(), values.end());
  }

  void record(std::string_view hook, std::initializer_list<std::int64_t> values) {
    record(hook, std::span<const std::int64_t>(values.begin(), values.size()));
  }

  const Hook* find(std::string_view hook) const {
    auto it = hooks_.find(hook);
    return it == hooks_.end() ? nullptr : &it->second;
  }

  std::size_t count(std::string_view hook) const {
    const Hook* h = find(hook);
    return h ? h->size() : 0;
  }

  const std::map<std::string, Hook, std::less<>>& hooks() const { return hooks_; }

  nlohmann::json to_json() const {
    nlohmann::json j = nlohmann::json::object();
    for (const auto& [name, hook] : hooks_) {
      nlohmann::json rows = nlohmann::json::array();
      for (std::size_t i = 0; i < hook.size(); ++i) {
        auto r = hook.row(i);
        rows.push_back(std::vector<std::int64_t>(r.begin(), r.end()));
      }
      j[name] = std::move(rows);
    }
    return j;
  }

  static MeasurementSink from_json(const nlohmann::json& j) {
    MeasurementSink s;
    for (const auto& [name, rows] : j.items()) {
      for (const auto& row : rows) s.record(name, row.get<std::vector<std::int64_t>>());
    }
    return s;
  }

 private:
  bool enabled_ = true;
  std::map<std::string, Hook, std::less<>> hooks_;
};

inline void record_extern(MeasurementSink& sink, std::string_view hook, std::initializer_list<std::int64_t> values) {
  sink.record(hook, values);
}

/// Everything a handler may touch besides its own state.
class Context {
 public:
  Context(MeasurementSink& sink, Rng& rng, std::int64_t recirculation_delay)
      : sink_(sink), rng_(rng), recirc_delay_(recirculation_delay) {}

  std::int64_t now() const { return now_; }
  Rng& rng() { return rng_; }
  std::int64_t recirculation_delay() const { return recirc_delay_; }

  /// Schedules `e` at now + delay.
  void emit(Event e, std::int64_t delay) {
    if (delay < 0) throw Error("event '" + e.name + "' generated in the past (delay " + std::to_string(delay) + ")");
    e.time = now_ + delay;
    emitted_.push_back(std::move(e));
  }

  /// Re-injects `e` through the pipeline after the recirculation delay.
  void recirculate(Event e) { emit(std::move(e), recirc_delay_); }

  void record(std::string_view hook, std::initializer_list<std::int64_t> values) { sink_.record(hook, values); }
  void record(std::string_view hook, std::span<const std::int64_t> values) { sink_.record(hook, values); }

 private:
  friend class SimRun;
  MeasurementSink& sink_;
  Rng& rng_;
  std::int64_t recirc_delay_;
  std::int64_t now_ = 0;
  std::vector<Event> emitted_;
};

/// Mutable program state for one simulation.
class ProgramInstance {
 public:
  virtual ~ProgramInstance() = default;
  virtual void handle(const Event& e, Context& ctx) = 0;
  /// Called once after the last event; may record externs (a control-plane
  /// readout) but must not emit events.
  virtual void finish(Context&) {}
  /// Hash of all handler-visible state.
  virtual std::uint64_t digest() const = 0;
};

/// A parameterized program: declared parameters, a resource footprint per
/// configuration, runtime handlers, and an objective over the measurements
/// (lower is better).
class SketchProgram {
 public:
  virtual ~SketchProgram() = default;
  virtual std::string name() const = 0;
  virtual const std::vector<ParamSpec>& params() const = 0;
  virtual DataflowGraph footprint(const Config& config) const = 0;
  virtual std::unique_ptr<ProgramInstance> instantiate(const Config& config, std::uint64_t seed) const = 0;
  virtual double objective(const MeasurementSink& sink, const Config& config) const = 0;
};

struct SimStats {
  std::size_t trace_events = 0;
  std::size_t emitted_events = 0;
  std::size_t dispatched = 0;
};

struct SimOptions {
  std::int64_t recirculation_delay = 1000;
  bool record = true;
  /// Called after each dispatch with the event and the program digest.
  std::function<void(const Event&, std::uint64_t)> observer;
  SimStats* stats = nullptr;
};

/// One single-threaded run of a program over a trace. Events are dispatched
/// in (time, insertion) order; trace events are inserted before any
/// generated event.
class SimRun {
 public:
  SimRun(const SketchProgram& program, const Config& config, std::uint64_t seed, SimOptions options = {})
      : program_(program),
        config_(config),
        options_(std::move(options)),
        sink_(options_.record ? MeasurementSink{} : MeasurementSink::disabled()),
        rng_(derive_seed(seed, "sim.rng")),
        ctx_(sink_, rng_, options_.recirculation_delay) {
    if (auto v = validate_config(program.params(), config); !v.empty()) {
      throw DomainError("invalid config for " + program.name() + ":\n" + describe(v));
    }
    instance_ = program.instantiate(config, derive_seed(seed, "sim.structures"));
  }

  std::int64_t clock() const { return ctx_.now_; }

  /// Schedules an event from outside a handler at clock + delay.
  void emit_event(Event e, std::int64_t delay) {
    ctx_.emit(std::move(e), delay);
    flush_emitted();
  }

  MeasurementSink run(const Trace& trace) {
    std::size_t next = 0;
    const auto n = trace.events.size();
    stats_.trace_events = n;
    std::int64_t last_time = 0;
    while (next < n || !pending_.empty()) {
      bool from_trace;
      if (next >= n) from_trace = false;
      else if (pending_.empty()) from_trace = true;
      else from_trace = trace.events[next].time <= pending_.top().time;  // trace seq is always lower
      if (from_trace) {
        const Event& e = trace.events[next];
        if (e.time < last_time || e.time < 0) {
          throw Error("trace timestamps decrease at event " + std::to_string(next));
        }
        ++next;
        dispatch(e);
      } else {
        Event e = pending_.top().event;
        pending_.pop();
        dispatch(e);
      }
      last_time = ctx_.now_;
    }
    instance_->finish(ctx_);
    if (!ctx_.emitted_.empty()) throw Error(program_.name() + ": finish() must not generate events");
    stats_.dispatched = dispatched_;
    if (options_.stats) *options_.stats = stats_;
    return std::move(sink_);
  }

 private:
  struct Pending {
    std::int64_t time;
    std::uint64_t seq;
    Event event;
  };
  struct Later {
    bool operator()(const Pending& a, const Pending& b) const {
      return a.time != b.time ? a.time > b.time : a.seq > b.seq;
    }
  };

  void dispatch(const Event& e) {
    ctx_.now_ = e.time;
    instance_->handle(e, ctx_);
    ++dispatched_;
    flush_emitted();
    if (options_.observer) options_.observer(e, instance_->digest());
  }

  void flush_emitted() {
    for (auto& e : ctx_.emitted_) {
      const auto t = e.time;
      pending_.push(Pending{t, seq_++, std::move(e)});
      ++stats_.emitted_events;
    }
    ctx_.emitted_.clear();
  }

  const SketchProgram& program_;
  Config config_;
  SimOptions options_;
  MeasurementSink sink_;
  Rng rng_;
  Context ctx_;
  std::unique_ptr<ProgramInstance> instance_;
  std::priority_queue<Pending, std::vector<Pending>, Later> pending_;
  std::uint64_t seq_ = 0;
  std::size_t dispatched_ = 0;
  SimStats stats_;
};

/// Runs `program` under `config` over `trace`. Pure in (program, config,
/// trace, seed).
inline MeasurementSink simulate_trace(const SketchProgram& program, const Config& config, const Trace& trace,
                                      std::uint64_t seed, SimOptions options = {}) {
  SimRun run(program, config, seed, std::move(options));
  return run.run(trace);
}

}  // namespace dpopt
