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
#include <limits>
#include <optional>
#include <vector>

#include "dpopt/common.hpp"

namespace dpopt {

/// Count-min sketch: rows x cols counters, one hash seed per row.
class Cms {
 public:
  Cms(std::int64_t rows, std::int64_t cols, std::uint64_t seed) : rows_(rows), cols_(cols) {
    if (rows < 1 || cols < 1) throw Error("cms: rows and cols must be >= 1");
    counters_.assign(static_cast<std::size_t>(rows * cols), 0);
    for (std::int64_t r = 0; r < rows; ++r) {
      seeds_.push_back(splitmix64(seed + static_cast<std::uint64_t>(r)));
    }
  }

  void update(std::int64_t key) {
    for (std::int64_t r = 0; r < rows_; ++r) ++counters_[cell(r, key)];
  }

  std::uint64_t query(std::int64_t key) const {
    std::uint64_t m = std::numeric_limits<std::uint64_t>::max();
    for (std::int64_t r = 0; r < rows_; ++r) m = std::min(m, counters_[cell(r, key)]);
    return m;
  }

  std::int64_t rows() const { return rows_; }
  std::int64_t cols() const { return cols_; }

  std::uint64_t digest() const {
    std::uint64_t h = 0;
    for (auto c : counters_) h = splitmix64(h ^ c);
    return h;
  }

 private:
  std::size_t cell(std::int64_t row, std::int64_t key) const {
    const auto col = hash_key(seeds_[static_cast<std::size_t>(row)], key) % static_cast<std::uint64_t>(cols_);
    return static_cast<std::size_t>(row * cols_) + static_cast<std::size_t>(col);
  }

  std::int64_t rows_;
  std::int64_t cols_;
  std::vector<std::uint64_t> counters_;
  std::vector<std::uint64_t> seeds_;
};

enum class MhtOutcome { hit, inserted, collision };

/// Multi-hash table: `ways` arrays of `slots_per_way` cells, one hash per way.
/// Cells remember the last access time; a cell idle for longer than the
/// configured timeout counts as free.
class MultiHashTable {
 public:
  static constexpr std::int64_t kNoTimeout = std::numeric_limits<std::int64_t>::max();

  struct Cell {
    std::int64_t key = 0;
    std::int64_t last_access = 0;
    bool occupied = false;
  };

  MultiHashTable(std::int64_t ways, std::int64_t slots_per_way, std::uint64_t seed,
                 std::int64_t timeout = kNoTimeout)
      : ways_(ways), slots_(slots_per_way), timeout_(timeout) {
    if (ways < 1 || slots_per_way < 1) throw Error("mht: ways and slots must be >= 1");
    cells_.resize(static_cast<std::size_t>(ways * slots_per_way));
    for (std::int64_t w = 0; w < ways; ++w) seeds_.push_back(splitmix64(seed + static_cast<std::uint64_t>(w)));
  }

  /// Cell index of `key` in way `w`.
  std::size_t slot(std::int64_t w, std::int64_t key) const {
    const auto s = hash_key(seeds_[static_cast<std::size_t>(w)], key) % static_cast<std::uint64_t>(slots_);
    return static_cast<std::size_t>(w * slots_) + static_cast<std::size_t>(s);
  }

  bool stale(const Cell& c, std::int64_t now) const {
    return c.occupied && timeout_ != kNoTimeout && now - c.last_access > timeout_;
  }
  bool free(const Cell& c, std::int64_t now) const { return !c.occupied || stale(c, now); }

  /// Way holding `key`, if any.
  std::optional<std::int64_t> find(std::int64_t key) const {
    for (std::int64_t w = 0; w < ways_; ++w) {
      const Cell& c = cells_[slot(w, key)];
      if (c.occupied && c.key == key) return w;
    }
    return std::nullopt;
  }

  /// First way whose candidate cell is empty or stale.
  std::optional<std::int64_t> first_free(std::int64_t key, std::int64_t now) const {
    for (std::int64_t w = 0; w < ways_; ++w) {
      if (free(cells_[slot(w, key)], now)) return w;
    }
    return std::nullopt;
  }

  /// Way whose candidate cell was accessed least recently (lowest way on ties).
  std::int64_t oldest_way(std::int64_t key) const {
    std::int64_t best = 0;
    for (std::int64_t w = 1; w < ways_; ++w) {
      if (cells_[slot(w, key)].last_access < cells_[slot(best, key)].last_access) best = w;
    }
    return best;
  }

  Cell& cell(std::int64_t w, std::int64_t key) { return cells_[slot(w, key)]; }
  const Cell& cell(std::int64_t w, std::int64_t key) const { return cells_[slot(w, key)]; }

  void write(std::int64_t w, std::int64_t key, std::int64_t now) {
    Cell& c = cells_[slot(w, key)];
    c.key = key;
    c.last_access = now;
    c.occupied = true;
  }

  /// Hit when stored; inserted into the first free candidate; otherwise a
  /// collision that leaves the table untouched.
  MhtOutcome access(std::int64_t key, std::int64_t now) {
    if (auto w = find(key)) {
      cells_[slot(*w, key)].last_access = now;
      return MhtOutcome::hit;
    }
    if (auto w = first_free(key, now)) {
      write(*w, key, now);
      return MhtOutcome::inserted;
    }
    return MhtOutcome::collision;
  }

  std::int64_t ways() const { return ways_; }
  std::int64_t slots_per_way() const { return slots_; }
  const std::vector<Cell>& cells() const { return cells_; }

  std::uint64_t digest() const {
    std::uint64_t h = 0;
    for (const auto& c : cells_) {
      h = splitmix64(h ^ static_cast<std::uint64_t>(c.key));
      h = splitmix64(h ^ static_cast<std::uint64_t>(c.last_access) ^ (c.occupied ? 1u : 0u));
    }
    return h;
  }

 private:
  std::int64_t ways_;
  std::int64_t slots_;
  std::int64_t timeout_;
  std::vector<Cell> cells_;
  std::vector<std::uint64_t> seeds_;
};

inline MhtOutcome mht_access(MultiHashTable& mht, std::int64_t key, std::int64_t now) {
  return mht.access(key, now);
}

enum class PrecisionOutcome { hit, inserted, replaced, kept };

/// Probability that a colliding key displaces a cell whose count is `c`.
inline double precision_replace_probability(std::uint64_t c) { return 1.0 / (static_cast<double>(c) + 1.0); }

/// Heavy-hitter table: `ways` arrays of (key, count) cells. On a miss with no
/// free candidate, the minimum-count candidate is replaced with probability
/// 1/(c+1).
class PrecisionTable {
 public:
  struct Cell {
    std::int64_t key = 0;
    std::uint64_t count = 0;
    bool occupied = false;
  };

  PrecisionTable(std::int64_t ways, std::int64_t slots_per_way, std::uint64_t seed)
      : ways_(ways), slots_(slots_per_way) {
    if (ways < 1 || slots_per_way < 1) throw Error("precision: ways and slots must be >= 1");
    cells_.resize(static_cast<std::size_t>(ways * slots_per_way));
    for (std::int64_t w = 0; w < ways; ++w) seeds_.push_back(splitmix64(seed + static_cast<std::uint64_t>(w)));
  }

  std::size_t slot(std::int64_t w, std::int64_t key) const {
    const auto s = hash_key(seeds_[static_cast<std::size_t>(w)], key) % static_cast<std::uint64_t>(slots_);
    return static_cast<std::size_t>(w * slots_) + static_cast<std::size_t>(s);
  }

  std::optional<std::int64_t> find(std::int64_t key) const {
    for (std::int64_t w = 0; w < ways_; ++w) {
      const Cell& c = cells_[slot(w, key)];
      if (c.occupied && c.key == key) return w;
    }
    return std::nullopt;
  }

  /// Way with the smallest count among the key's candidates (lowest way on ties).
  std::int64_t min_way(std::int64_t key) const {
    std::int64_t best = 0;
    for (std::int64_t w = 1; w < ways_; ++w) {
      if (cells_[slot(w, key)].count < cells_[slot(best, key)].count) best = w;
    }
    return best;
  }

  PrecisionOutcome access(std::int64_t key, Rng& rng) {
    if (auto w = find(key)) {
      ++cells_[slot(*w, key)].count;
      return PrecisionOutcome::hit;
    }
    for (std::int64_t w = 0; w < ways_; ++w) {
      Cell& c = cells_[slot(w, key)];
      if (!c.occupied) {
        c = Cell{key, 1, true};
        return PrecisionOutcome::inserted;
      }
    }
    Cell& victim = cells_[slot(min_way(key), key)];
    if (rng.bernoulli(precision_replace_probability(victim.count))) {
      victim = Cell{key, 1, true};
      return PrecisionOutcome::replaced;
    }
    return PrecisionOutcome::kept;
  }

  /// Stored count for `key`, 0 when absent.
  std::uint64_t estimate(std::int64_t key) const {
    auto w = find(key);
    return w ? cells_[slot(*w, key)].count : 0;
  }

  Cell& at(std::size_t index) { return cells_[index]; }
  std::int64_t ways() const { return ways_; }
  std::int64_t slots_per_way() const { return slots_; }
  const std::vector<Cell>& cells() const { return cells_; }

  std::uint64_t digest() const {
    std::uint64_t h = 0;
    for (const auto& c : cells_) {
      h = splitmix64(h ^ static_cast<std::uint64_t>(c.key));
      h = splitmix64(h ^ c.count ^ (c.occupied ? 1u : 0u));
    }
    return h;
  }

 private:
  std::int64_t ways_;
  std::int64_t slots_;
  std::vector<Cell> cells_;
  std::vector<std::uint64_t> seeds_;
};

inline PrecisionOutcome precision_access(PrecisionTable& tbl, std::int64_t key, Rng& rng) {
  return tbl.access(key, rng);
}

/// RTT sampler: requests are admitted with probability p = 2^-p_exp into
/// slot hash(key) mod M, overwriting any occupant; a matching response
/// yields a sample and frees the slot.
class Fridge {
 public:
  Fridge(std::int64_t size, int p_exp, std::uint64_t seed) : size_(size), p_exp_(p_exp), seed_(splitmix64(seed)) {
    if (size < 1) throw Error("fridge: size must be >= 1");
    if (p_exp < 0 || p_exp > 62) throw Error("fridge: insertion probability must be 2^-k with 0 <= k <= 62");
    slots_.resize(static_cast<std::size_t>(size));
  }

  double insert_probability() const { return std::ldexp(1.0, -p_exp_); }

  /// Returns true when the request was stored.
  bool request(std::int64_t key, std::int64_t t, Rng& rng) {
    const std::uint64_t mask = (std::uint64_t{1} << p_exp_) - 1;
    if ((rng.next() & mask) != 0) return false;
    slots_[index(key)] = Slot{key, t, true};
    return true;
  }

  std::optional<std::int64_t> response(std::int64_t key, std::int64_t t) {
    Slot& s = slots_[index(key)];
    if (!s.occupied || s.key != key) return std::nullopt;
    s.occupied = false;
    return t - s.time;
  }

  std::int64_t occupied() const {
    return std::count_if(slots_.begin(), slots_.end(), [](const Slot& s) { return s.occupied; });
  }
  std::int64_t size() const { return size_; }

  std::uint64_t digest() const {
    std::uint64_t h = 0;
    for (const auto& s : slots_) {
      h = splitmix64(h ^ static_cast<std::uint64_t>(s.key));
      h = splitmix64(h ^ static_cast<std::uint64_t>(s.time) ^ (s.occupied ? 1u : 0u));
    }
    return h;
  }

 private:
  struct Slot {
    std::int64_t key = 0;
    std::int64_t time = 0;
    bool occupied = false;
  };
  std::size_t index(std::int64_t key) const {
    return static_cast<std::size_t>(hash_key(seed_, key) % static_cast<std::uint64_t>(size_));
  }

  std::int64_t size_;
  int p_exp_;
  std::uint64_t seed_;
  std::vector<Slot> slots_;
};

/// Exponent k of the largest p = 2^-k with p <= min(1, M/span).
inline int formula_p_exponent(std::int64_t size, std::int64_t span) {
  if (size < 1 || span < 1) throw Error("formula_p: size and span must be >= 1");
  int k = 0;
  // smallest k with span <= size * 2^k
  while (k < 62 && (static_cast<double>(size) * std::ldexp(1.0, k)) < static_cast<double>(span)) ++k;
  return k;
}

/// Closed-form Fridge tuning: M/p equals the number of requests seen between
/// the request and response with the largest delay.
inline double formula_p(std::int64_t size, std::int64_t span) { return std::ldexp(1.0, -formula_p_exponent(size, span)); }

}  // namespace dpopt
