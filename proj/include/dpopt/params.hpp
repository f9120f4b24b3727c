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
#include <set>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include "dpopt/common.hpp"
#include "dpopt/pipeline_model.hpp"

namespace dpopt {

enum class ParamKind { memory, count, nonresource };

inline const char* to_string(ParamKind k) {
  switch (k) {
    case ParamKind::memory: return "memory";
    case ParamKind::count: return "count";
    case ParamKind::nonresource: return "nonresource";
  }
  return "?";
}

/// Integers lo..hi inclusive.
struct IntRange {
  std::int64_t lo = 0;
  std::int64_t hi = 0;
};

/// The set {2^lo_exp, ..., 2^hi_exp}.
struct PowerOfTwo {
  int lo_exp = 0;
  int hi_exp = 0;
};

/// 0 (false) or 1 (true).
struct Boolean {};

/// Named alternatives; the stored value is the branch index.
struct Choice {
  std::vector<std::string> branches;
};

using Domain = std::variant<IntRange, PowerOfTwo, Boolean, Choice>;

// Every domain is an ordered finite list of values. The helpers below expose
// it through a dense index 0..size-1; search strategies and scans step in
// index space, which is exponent space for PowerOfTwo.

inline std::int64_t domain_size(const Domain& d) {
  return std::visit(
      [](const auto& x) -> std::int64_t {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, IntRange>) return x.hi - x.lo + 1;
        else if constexpr (std::is_same_v<T, PowerOfTwo>) return x.hi_exp - x.lo_exp + 1;
        else if constexpr (std::is_same_v<T, Boolean>) return 2;
        else return static_cast<std::int64_t>(x.branches.size());
      },
      d);
}

inline std::int64_t domain_value(const Domain& d, std::int64_t index) {
  return std::visit(
      [index](const auto& x) -> std::int64_t {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, IntRange>) return x.lo + index;
        else if constexpr (std::is_same_v<T, PowerOfTwo>) return std::int64_t{1} << (x.lo_exp + index);
        else return index;
      },
      d);
}

/// Index of `value`, or nullopt when the value is not in the domain.
inline std::optional<std::int64_t> domain_index(const Domain& d, std::int64_t value) {
  return std::visit(
      [value](const auto& x) -> std::optional<std::int64_t> {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, IntRange>) {
          if (value < x.lo || value > x.hi) return std::nullopt;
          return value - x.lo;
        } else if constexpr (std::is_same_v<T, PowerOfTwo>) {
          if (value <= 0 || (value & (value - 1)) != 0) return std::nullopt;
          int e = 0;
          while ((std::int64_t{1} << e) < value) ++e;
          if (e < x.lo_exp || e > x.hi_exp) return std::nullopt;
          return e - x.lo_exp;
        } else if constexpr (std::is_same_v<T, Boolean>) {
          if (value != 0 && value != 1) return std::nullopt;
          return value;
        } else {
          if (value < 0 || value >= static_cast<std::int64_t>(x.branches.size())) return std::nullopt;
          return value;
        }
      },
      d);
}

inline bool domain_contains(const Domain& d, std::int64_t value) {
  return domain_index(d, value).has_value();
}

inline std::int64_t domain_min(const Domain& d) { return domain_value(d, 0); }
inline std::int64_t domain_max(const Domain& d) { return domain_value(d, domain_size(d) - 1); }

/// Largest domain value <= target, or the domain minimum when none is.
inline std::int64_t domain_clamp(const Domain& d, std::int64_t target) {
  std::int64_t lo = 0, hi = domain_size(d) - 1, best = 0;
  while (lo <= hi) {
    const std::int64_t mid = lo + (hi - lo) / 2;
    if (domain_value(d, mid) <= target) {
      best = mid;
      lo = mid + 1;
    } else {
      hi = mid - 1;
    }
  }
  return domain_value(d, best);
}

/// Restricts a parameter to configurations where another (structural)
/// parameter takes one of the listed branches. Outside those branches the
/// parameter is pinned to its domain minimum.
struct Activation {
  std::string selector;
  std::vector<std::int64_t> branches;
};

struct ParamSpec {
  std::string name;
  ParamKind kind = ParamKind::nonresource;
  Domain domain = IntRange{0, 0};
  std::optional<std::int64_t> start;
  /// Selects between data-structure implementations. Structural parameters
  /// are enumerated by preprocessing (one pass per branch) instead of being
  /// searched as free coordinates.
  bool structural = false;
  std::optional<Activation> active_when;

  bool is_resource() const { return kind != ParamKind::nonresource; }
};

inline ParamSpec memory_param(std::string name, Domain d) {
  return ParamSpec{std::move(name), ParamKind::memory, std::move(d), std::nullopt, false, std::nullopt};
}
inline ParamSpec count_param(std::string name, Domain d) {
  return ParamSpec{std::move(name), ParamKind::count, std::move(d), std::nullopt, false, std::nullopt};
}
inline ParamSpec nonresource_param(std::string name, Domain d) {
  return ParamSpec{std::move(name), ParamKind::nonresource, std::move(d), std::nullopt, false, std::nullopt};
}
inline ParamSpec selector_param(std::string name, std::vector<std::string> branches) {
  return ParamSpec{std::move(name), ParamKind::nonresource, Choice{std::move(branches)}, std::nullopt,
                   true, std::nullopt};
}

/// A concrete value for every declared parameter.
struct Config {
  std::map<std::string, std::int64_t> values;

  std::int64_t at(const std::string& name) const {
    auto it = values.find(name);
    if (it == values.end()) throw Error("config has no value for '" + name + "'");
    return it->second;
  }
  void set(const std::string& name, std::int64_t v) { values[name] = v; }
  bool has(const std::string& name) const { return values.count(name) != 0; }

  /// Canonical `name=value` lines, names sorted. Used as the score-cache key.
  std::string to_text() const {
    std::string out;
    for (const auto& [k, v] : values) {
      out += k;
      out += '=';
      out += std::to_string(v);
      out += '\n';
    }
    return out;
  }

  friend bool operator==(const Config&, const Config&) = default;
  friend auto operator<=>(const Config& a, const Config& b) { return a.values <=> b.values; }
};

inline const ParamSpec* find_spec(const std::vector<ParamSpec>& specs, const std::string& name) {
  for (const auto& s : specs) {
    if (s.name == name) return &s;
  }
  return nullptr;
}

inline bool is_active(const ParamSpec& spec, const Config& config) {
  if (!spec.active_when) return true;
  auto it = config.values.find(spec.active_when->selector);
  if (it == config.values.end()) return true;
  const auto& b = spec.active_when->branches;
  return std::find(b.begin(), b.end(), it->second) != b.end();
}

/// Renders a config with branch names for Choice domains.
inline std::string format_config(const std::vector<ParamSpec>& specs, const Config& config) {
  std::string out;
  for (const auto& [k, v] : config.values) {
    out += k;
    out += '=';
    const ParamSpec* s = find_spec(specs, k);
    const auto* choice = s ? std::get_if<Choice>(&s->domain) : nullptr;
    if (choice && v >= 0 && v < static_cast<std::int64_t>(choice->branches.size())) {
      out += choice->branches[static_cast<std::size_t>(v)];
    } else {
      out += std::to_string(v);
    }
    out += '\n';
  }
  return out;
}

/// Parses `name=value` lines. Choice parameters accept a branch name or index;
/// booleans accept true/false. Blank lines and `#` comments are skipped.
inline Config parse_config(const std::vector<ParamSpec>& specs, std::istream& in) {
  Config c;
  std::string line;
  int lineno = 0;
  auto trim = [](const std::string& s) {
    auto b = s.find_first_not_of(" \t\r");
    auto e = s.find_last_not_of(" \t\r");
    return b == std::string::npos ? std::string{} : s.substr(b, e - b + 1);
  };
  while (std::getline(in, line)) {
    ++lineno;
    if (auto h = line.find('#'); h != std::string::npos) line.erase(h);
    if (trim(line).empty()) continue;
    auto eq = line.find('=');
    if (eq == std::string::npos) throw Error("config line " + std::to_string(lineno) + ": expected name=value");
    const std::string name = trim(line.substr(0, eq));
    const std::string text = trim(line.substr(eq + 1));
    const ParamSpec* s = find_spec(specs, name);
    std::optional<std::int64_t> v;
    if (s) {
      if (const auto* ch = std::get_if<Choice>(&s->domain)) {
        for (std::size_t i = 0; i < ch->branches.size(); ++i) {
          if (ch->branches[i] == text) v = static_cast<std::int64_t>(i);
        }
      } else if (std::holds_alternative<Boolean>(s->domain)) {
        if (text == "true") v = 1;
        if (text == "false") v = 0;
      }
    }
    if (!v) {
      try {
        std::size_t used = 0;
        v = std::stoll(text, &used);
        if (used != text.size()) throw std::invalid_argument(text);
      } catch (const std::exception&) {
        throw Error("config line " + std::to_string(lineno) + ": bad value '" + text + "' for " + name);
      }
    }
    if (c.has(name)) throw Error("config line " + std::to_string(lineno) + ": duplicate '" + name + "'");
    c.set(name, *v);
  }
  return c;
}

struct Violation {
  enum class Reason { missing, out_of_domain, undeclared, duplicate_spec };
  std::string name;
  Reason reason;

  friend bool operator==(const Violation&, const Violation&) = default;
};

inline const char* to_string(Violation::Reason r) {
  switch (r) {
    case Violation::Reason::missing: return "missing";
    case Violation::Reason::out_of_domain: return "out-of-domain";
    case Violation::Reason::undeclared: return "undeclared";
    case Violation::Reason::duplicate_spec: return "duplicate-spec";
  }
  return "?";
}

/// Empty result means the config is complete and every value is in domain.
inline std::vector<Violation> validate_config(const std::vector<ParamSpec>& specs, const Config& config) {
  std::vector<Violation> out;
  std::set<std::string> seen;
  for (const auto& s : specs) {
    if (!seen.insert(s.name).second) {
      out.push_back({s.name, Violation::Reason::duplicate_spec});
      continue;
    }
    auto it = config.values.find(s.name);
    if (it == config.values.end()) {
      out.push_back({s.name, Violation::Reason::missing});
    } else if (!domain_contains(s.domain, it->second)) {
      out.push_back({s.name, Violation::Reason::out_of_domain});
    }
  }
  for (const auto& [k, v] : config.values) {
    if (!seen.count(k)) out.push_back({k, Violation::Reason::undeclared});
  }
  return out;
}

inline std::string describe(const std::vector<Violation>& vs) {
  std::string out;
  for (const auto& v : vs) {
    out += v.name;
    out += ": ";
    out += to_string(v.reason);
    out += '\n';
  }
  return out;
}

/// Scan seed for a resource parameter: an explicit start wins; memory starts
/// at one stage's SRAM, other resources at 4, both clamped into the domain.
inline std::int64_t default_start(const ParamSpec& spec, const PipelineModel& pipe) {
  if (spec.kind == ParamKind::nonresource) {
    throw Error("parameter '" + spec.name + "' is nonresource and has no preprocessing start");
  }
  if (spec.start) return *spec.start;
  const std::int64_t target = spec.kind == ParamKind::memory ? pipe.sram_words_per_stage : 4;
  return domain_clamp(spec.domain, target);
}

}  // namespace dpopt
