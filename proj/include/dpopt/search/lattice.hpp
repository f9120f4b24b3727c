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
#include <limits>
#include <optional>
#include <string>
#include <unordered_set>
#include <vector>

#include "dpopt/params.hpp"
#include "dpopt/preprocess.hpp"

namespace dpopt::search {

/// One search coordinate per point: the compiling-space index followed by
/// the domain index of each searched nonresource parameter (exponent offset
/// for power-of-two domains).
struct SearchPoint {
  std::int64_t index = 0;
  std::vector<std::int64_t> nr;

  std::vector<std::int64_t> coords() const {
    std::vector<std::int64_t> c{index};
    c.insert(c.end(), nr.begin(), nr.end());
    return c;
  }
  static SearchPoint from_coords(const std::vector<std::int64_t>& c) {
    return SearchPoint{c.at(0), std::vector<std::int64_t>(c.begin() + 1, c.end())};
  }

  friend bool operator==(const SearchPoint&, const SearchPoint&) = default;
};

/// Box of integer coordinates [lo, hi] per dimension, enumerated
/// lexicographically (index first).
class Lattice {
 public:
  Lattice(const CompilingSpace& space, const std::vector<ParamSpec>& specs) : space_(&space), specs_(&specs) {
    if (space.empty()) throw Error("search lattice over an empty compiling space");
    lo_.push_back(0);
    hi_.push_back(static_cast<std::int64_t>(space.size()) - 1);
    for (const auto& s : specs) {
      if (s.is_resource() || s.structural) continue;
      bool active_somewhere = false;
      for (const auto& c : space.configs) active_somewhere = active_somewhere || is_active(s, c);
      if (!active_somewhere) continue;
      nr_.push_back(&s);
      lo_.push_back(0);
      hi_.push_back(domain_size(s.domain) - 1);
    }
  }

  /// Bare box with no space to decode against; used to search synthetic
  /// functions.
  static Lattice box(std::vector<std::int64_t> lo, std::vector<std::int64_t> hi) {
    if (lo.empty() || lo.size() != hi.size()) throw Error("lattice box needs matching non-empty bounds");
    Lattice l;
    l.lo_ = std::move(lo);
    l.hi_ = std::move(hi);
    return l;
  }

  std::size_t dims() const { return lo_.size(); }
  const std::vector<std::int64_t>& lo() const { return lo_; }
  const std::vector<std::int64_t>& hi() const { return hi_; }
  const std::vector<const ParamSpec*>& nr_specs() const { return nr_; }

  /// Number of points; saturates at uint64 max.
  std::uint64_t total() const {
    std::uint64_t t = 1;
    for (std::size_t d = 0; d < dims(); ++d) {
      const auto n = static_cast<std::uint64_t>(hi_[d] - lo_[d] + 1);
      if (t > std::numeric_limits<std::uint64_t>::max() / n) return std::numeric_limits<std::uint64_t>::max();
      t *= n;
    }
    return t;
  }

  std::uint64_t to_linear(const SearchPoint& p) const {
    const auto c = p.coords();
    std::uint64_t x = 0;
    for (std::size_t d = 0; d < dims(); ++d) {
      x = x * static_cast<std::uint64_t>(hi_[d] - lo_[d] + 1) + static_cast<std::uint64_t>(c[d] - lo_[d]);
    }
    return x;
  }

  SearchPoint from_linear(std::uint64_t x) const {
    std::vector<std::int64_t> c(dims());
    for (std::size_t d = dims(); d-- > 0;) {
      const auto n = static_cast<std::uint64_t>(hi_[d] - lo_[d] + 1);
      c[d] = lo_[d] + static_cast<std::int64_t>(x % n);
      x /= n;
    }
    return SearchPoint::from_coords(c);
  }

  bool contains(const SearchPoint& p) const {
    const auto c = p.coords();
    if (c.size() != dims()) return false;
    for (std::size_t d = 0; d < dims(); ++d) {
      if (c[d] < lo_[d] || c[d] > hi_[d]) return false;
    }
    return true;
  }

  /// Full configuration: the space entry at `index`, plus searched
  /// nonresource values; inactive or unsearched parameters take their
  /// domain minimum.
  Config decode(const SearchPoint& p) const {
    if (!space_) throw Error("lattice has no compiling space to decode against");
    if (!contains(p)) throw Error("search point outside the lattice");
    Config c = (*space_)[static_cast<std::size_t>(p.index)];
    for (std::size_t k = 0; k < nr_.size(); ++k) {
      c.set(nr_[k]->name, domain_value(nr_[k]->domain, p.nr[k]));
    }
    for (const auto& s : *specs_) {
      if (!c.has(s.name)) c.set(s.name, domain_min(s.domain));
    }
    for (const auto& s : *specs_) {
      if (!s.is_resource() && !s.structural && !is_active(s, c)) c.set(s.name, domain_min(s.domain));
    }
    return c;
  }

 private:
  Lattice() = default;

  const CompilingSpace* space_ = nullptr;
  const std::vector<ParamSpec>* specs_ = nullptr;
  std::vector<const ParamSpec*> nr_;
  std::vector<std::int64_t> lo_, hi_;
};

/// Evaluation log in proposal order.
class History {
 public:
  struct Entry {
    SearchPoint point;
    double score;
  };

  void add(SearchPoint p, double score) {
    if (entries_.empty() || score < best_) {
      best_ = score;
      best_index_ = entries_.size();
    }
    entries_.push_back(Entry{std::move(p), score});
  }

  const std::vector<Entry>& entries() const { return entries_; }
  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }
  double best() const { return best_; }
  const Entry& best_entry() const { return entries_.at(best_index_); }

 private:
  std::vector<Entry> entries_;
  double best_ = std::numeric_limits<double>::infinity();
  std::size_t best_index_ = 0;
};

}  // namespace dpopt::search
