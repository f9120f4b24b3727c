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
#include <limits>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Dense>

#include "dpopt/common.hpp"
#include "dpopt/search/lattice.hpp"

namespace dpopt::search {

inline double sa_accept_prob(double delta, double temp) {
  if (!(temp > 0.0)) throw Error("annealing temperature must be positive");
  if (delta <= 0.0) return 1.0;
  return std::exp(-delta / temp);
}

inline double ei_value(double mean, double sd, double best) {
  if (sd < 0.0) throw Error("negative predictive standard deviation");
  const double gain = best - mean;
  if (sd == 0.0) return std::max(0.0, gain);
  const double z = gain / sd;
  const double cdf = 0.5 * std::erfc(-z / std::sqrt(2.0));
  const double pdf = std::exp(-0.5 * z * z) / std::sqrt(2.0 * 3.14159265358979323846);
  return gain * cdf + sd * pdf;
}

using Vec = std::vector<double>;

inline std::vector<std::int64_t> round_clamp(const Vec& x, const std::vector<std::int64_t>& lo,
                                             const std::vector<std::int64_t>& hi) {
  std::vector<std::int64_t> out(x.size());
  for (std::size_t d = 0; d < x.size(); ++d) {
    out[d] = std::clamp(static_cast<std::int64_t>(std::llround(x[d])), lo[d], hi[d]);
  }
  return out;
}

/// Centroid of every vertex except `skip`.
inline Vec nm_centroid(const std::vector<Vec>& simplex, std::size_t skip) {
  Vec c(simplex.at(0).size(), 0.0);
  for (std::size_t i = 0; i < simplex.size(); ++i) {
    if (i == skip) continue;
    for (std::size_t d = 0; d < c.size(); ++d) c[d] += simplex[i][d];
  }
  for (auto& v : c) v /= static_cast<double>(simplex.size() - 1);
  return c;
}

/// c + t (x - c).
inline Vec nm_towards(const Vec& c, const Vec& x, double t) {
  Vec out(c.size());
  for (std::size_t d = 0; d < c.size(); ++d) out[d] = c[d] + t * (x[d] - c[d]);
  return out;
}

inline constexpr double kNmReflect = 1.0;
inline constexpr double kNmExpand = 2.0;
inline constexpr double kNmContract = 0.5;
inline constexpr double kNmShrink = 0.5;

/// One reflection step: reflects the worst vertex through the centroid of
/// the others and snaps the result to the lattice.
inline std::vector<std::int64_t> nm_step(const std::vector<Vec>& simplex, const std::vector<double>& scores,
                                         const std::vector<std::int64_t>& lo, const std::vector<std::int64_t>& hi) {
  if (simplex.size() < 2 || simplex.size() != scores.size()) throw Error("simplex needs n+1 scored vertices");
  const auto worst = static_cast<std::size_t>(std::max_element(scores.begin(), scores.end()) - scores.begin());
  const Vec c = nm_centroid(simplex, worst);
  return round_clamp(nm_towards(c, simplex[worst], -kNmReflect), lo, hi);
}

enum class StrategyKind { exhaustive, simanneal, neldermead, bayesian, all };

inline std::string_view to_string(StrategyKind k) {
  switch (k) {
    case StrategyKind::exhaustive: return "exhaustive";
    case StrategyKind::simanneal: return "simanneal";
    case StrategyKind::neldermead: return "neldermead";
    case StrategyKind::bayesian: return "bayesian";
    case StrategyKind::all: return "all";
  }
  return "?";
}

inline StrategyKind parse_strategy(std::string_view s) {
  for (auto k : {StrategyKind::exhaustive, StrategyKind::simanneal, StrategyKind::neldermead, StrategyKind::bayesian,
                 StrategyKind::all}) {
    if (to_string(k) == s) return k;
  }
  throw Error("unknown strategy '" + std::string(s) + "'");
}

/// A sequential proposal machine. `next` is called with the history after
/// the previous proposal has been scored (its entry is last); nullopt means
/// the strategy is done.
class Strategy {
 public:
  virtual ~Strategy() = default;
  virtual std::optional<SearchPoint> next(const History& history) = 0;
};

class Exhaustive final : public Strategy {
 public:
  explicit Exhaustive(const Lattice& lattice) : lattice_(lattice) {}

  std::optional<SearchPoint> next(const History&) override {
    if (cursor_ >= lattice_.total()) return std::nullopt;
    return lattice_.from_linear(cursor_++);
  }

 private:
  const Lattice& lattice_;
  std::uint64_t cursor_ = 0;
};

class SimulatedAnnealing final : public Strategy {
 public:
  static constexpr double kT0 = 1.0;
  static constexpr double kAlpha = 0.95;
  static constexpr double kFrozen = 1e-3;
  static constexpr int kMaxRestarts = 8;

  SimulatedAnnealing(const Lattice& lattice, std::uint64_t seed) : lattice_(lattice), rng_(seed) {
    for (std::size_t d = 0; d < lattice.dims(); ++d) {
      if (lattice.hi()[d] > lattice.lo()[d]) free_.push_back(d);
    }
  }

  std::optional<SearchPoint> next(const History& history) override {
    if (!started_) {
      started_ = true;
      return lattice_.from_linear(rng_.below(lattice_.total()));
    }
    const auto& last = history.entries().back();
    if (!current_) {
      current_ = last.point;
      current_score_ = last.score;
    } else if (rng_.bernoulli(sa_accept_prob(relative_delta(last.score), temperature()))) {
      current_ = last.point;
      current_score_ = last.score;
    }
    ++k_;
    if (free_.empty()) return std::nullopt;
    if (temperature() < kFrozen) {
      if (restarts_ >= kMaxRestarts) return std::nullopt;
      ++restarts_;
      k_ = 0;
      current_.reset();
      return lattice_.from_linear(rng_.below(lattice_.total()));
    }
    return neighbor(*current_);
  }

  int restarts() const { return restarts_; }

  double temperature() const { return kT0 * std::pow(kAlpha, static_cast<double>(k_)); }

 private:
  SearchPoint neighbor(const SearchPoint& p) {
    auto c = p.coords();
    const auto d = free_[rng_.below(free_.size())];
    const std::int64_t step = rng_.bernoulli(0.5) ? 1 : -1;
    std::int64_t v = c[d] + step;
    if (v < lattice_.lo()[d] || v > lattice_.hi()[d]) v = c[d] - step;
    c[d] = v;
    return SearchPoint::from_coords(c);
  }

  // Score change relative to the incumbent, so the schedule behaves the same
  // whatever units the objective uses.
  double relative_delta(double score) const {
    const double delta = score - current_score_;
    if (delta <= 0.0) return delta;
    const double scale = std::abs(current_score_);
    return scale > 0.0 ? delta / scale : std::numeric_limits<double>::infinity();
  }

  const Lattice& lattice_;
  Rng rng_;
  std::vector<std::size_t> free_;
  bool started_ = false;
  std::optional<SearchPoint> current_;
  double current_score_ = 0.0;
  std::uint64_t k_ = 0;
  int restarts_ = 0;
};

/// Nelder-Mead on the continuous relaxation of the lattice. Vertices are kept
/// snapped to lattice points; dimensions with a single value are held fixed.
/// A collapsed simplex (all vertices equal, or a shrink that moves nothing)
/// restarts from a fresh random point, up to kMaxRestarts times.
class NelderMead final : public Strategy {
 public:
  static constexpr int kMaxRestarts = 8;

  NelderMead(const Lattice& lattice, std::uint64_t seed) : lattice_(lattice), rng_(seed) {
    for (std::size_t d = 0; d < lattice.dims(); ++d) {
      if (lattice.hi()[d] > lattice.lo()[d]) free_.push_back(d);
    }
    for (auto d : free_) {
      lo_.push_back(lattice.lo()[d]);
      hi_.push_back(lattice.hi()[d]);
    }
  }

  std::optional<SearchPoint> next(const History& history) override {
    if (phase_ == Phase::start) return begin();
    const double f = history.entries().back().score;
    switch (phase_) {
      case Phase::init:
      case Phase::shrink:
        verts_.push_back(pending_[pos_]);
        scores_.push_back(f);
        if (++pos_ < pending_.size()) return propose(pending_[pos_]);
        if (phase_ == Phase::shrink && shrink_static_) return restart();
        return iterate();
      case Phase::reflect: {
        fr_ = f;
        xr_ = trial_;
        if (fr_ < scores_[0]) {
          phase_ = Phase::expand;
          return propose(snap(nm_towards(centroid_, xr_, kNmExpand)));
        }
        if (fr_ < scores_[scores_.size() - 2]) {
          replace_worst(xr_, fr_);
          return iterate();
        }
        outside_ = fr_ < scores_.back();
        phase_ = Phase::contract;
        return propose(snap(nm_towards(centroid_, outside_ ? xr_ : verts_.back(), kNmContract)));
      }
      case Phase::expand:
        if (f < fr_) replace_worst(trial_, f);
        else replace_worst(xr_, fr_);
        return iterate();
      case Phase::contract:
        if (outside_ ? f <= fr_ : f < scores_.back()) {
          replace_worst(trial_, f);
          return iterate();
        }
        return shrink();
      case Phase::start:
      case Phase::done:
        break;
    }
    return std::nullopt;
  }

  int restarts() const { return restarts_; }

 private:
  enum class Phase { start, init, reflect, expand, contract, shrink, done };

  Vec snap(const Vec& x) const {
    const auto r = round_clamp(x, lo_, hi_);
    return Vec(r.begin(), r.end());
  }

  std::optional<SearchPoint> propose(const Vec& x) {
    trial_ = x;
    auto c = lattice_.lo();
    for (std::size_t k = 0; k < free_.size(); ++k) c[free_[k]] = static_cast<std::int64_t>(x[k]);
    return SearchPoint::from_coords(c);
  }

  std::optional<SearchPoint> begin() {
    verts_.clear();
    scores_.clear();
    pending_.clear();
    pos_ = 0;
    Vec x0(free_.size());
    for (std::size_t k = 0; k < free_.size(); ++k) x0[k] = static_cast<double>(lo_[k] + static_cast<std::int64_t>(rng_.below(static_cast<std::uint64_t>(hi_[k] - lo_[k] + 1))));
    pending_.push_back(x0);
    for (std::size_t k = 0; k < free_.size(); ++k) {
      const double step = std::max(1.0, std::round(0.25 * static_cast<double>(hi_[k] - lo_[k])));
      Vec x = x0;
      x[k] = x0[k] + step <= static_cast<double>(hi_[k]) ? x0[k] + step : x0[k] - step;
      pending_.push_back(snap(x));
    }
    phase_ = Phase::init;
    return propose(pending_[0]);
  }

  std::optional<SearchPoint> restart() {
    if (++restarts_ > kMaxRestarts || free_.empty()) {
      phase_ = Phase::done;
      return std::nullopt;
    }
    return begin();
  }

  void sort_simplex() {
    std::vector<std::size_t> idx(verts_.size());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    std::stable_sort(idx.begin(), idx.end(), [&](auto a, auto b) { return scores_[a] < scores_[b]; });
    std::vector<Vec> v;
    std::vector<double> s;
    for (auto i : idx) {
      v.push_back(verts_[i]);
      s.push_back(scores_[i]);
    }
    verts_ = std::move(v);
    scores_ = std::move(s);
  }

  std::optional<SearchPoint> iterate() {
    if (free_.empty()) {
      phase_ = Phase::done;
      return std::nullopt;
    }
    sort_simplex();
    if (std::all_of(verts_.begin(), verts_.end(), [&](const Vec& v) { return v == verts_[0]; })) return restart();
    centroid_ = nm_centroid(verts_, verts_.size() - 1);
    phase_ = Phase::reflect;
    return propose(snap(nm_towards(centroid_, verts_.back(), -kNmReflect)));
  }

  std::optional<SearchPoint> shrink() {
    const Vec best = verts_[0];
    const double fbest = scores_[0];
    pending_.clear();
    shrink_static_ = true;
    for (std::size_t i = 1; i < verts_.size(); ++i) {
      const Vec x = snap(nm_towards(best, verts_[i], kNmShrink));
      shrink_static_ = shrink_static_ && x == verts_[i];
      pending_.push_back(x);
    }
    verts_ = {best};
    scores_ = {fbest};
    pos_ = 0;
    phase_ = Phase::shrink;
    return propose(pending_[0]);
  }

  void replace_worst(const Vec& x, double f) {
    verts_.back() = x;
    scores_.back() = f;
  }

  const Lattice& lattice_;
  Rng rng_;
  std::vector<std::size_t> free_;
  std::vector<std::int64_t> lo_, hi_;
  Phase phase_ = Phase::start;
  std::vector<Vec> verts_;
  std::vector<double> scores_;
  std::vector<Vec> pending_;
  std::size_t pos_ = 0;
  Vec trial_, xr_, centroid_;
  double fr_ = 0.0;
  bool outside_ = false;
  bool shrink_static_ = false;
  int restarts_ = 0;
};

/// Gaussian-process expected-improvement search.
class Bayesian final : public Strategy {
 public:
  static constexpr std::size_t kInitial = 5;
  static constexpr double kLengthScale = 0.2;
  static constexpr double kNoise = 1e-4;
  static constexpr std::uint64_t kScanLimit = 10000;
  static constexpr std::size_t kCandidates = 1024;
  static constexpr double kMinEi = 1e-9;

  Bayesian(const Lattice& lattice, std::uint64_t seed) : lattice_(lattice), rng_(seed) {}

  std::optional<SearchPoint> next(const History& history) override {
    std::unordered_set<std::uint64_t> seen;
    std::vector<std::pair<std::uint64_t, double>> data;
    for (const auto& e : history.entries()) {
      const auto x = lattice_.to_linear(e.point);
      if (seen.insert(x).second) data.emplace_back(x, e.score);
    }
    const auto total = lattice_.total();
    if (seen.size() >= total) return std::nullopt;
    if (data.size() < kInitial) return lattice_.from_linear(random_unseen(seen));

    const auto n = static_cast<Eigen::Index>(data.size());
    Eigen::MatrixXd X(n, static_cast<Eigen::Index>(lattice_.dims()));
    Eigen::VectorXd y(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      X.row(i) = normalized(data[static_cast<std::size_t>(i)].first);
      y(i) = data[static_cast<std::size_t>(i)].second;
    }
    const double mu = y.mean();
    const double sd = std::sqrt((y.array() - mu).square().sum() / static_cast<double>(n));
    const double scale = sd > 0.0 ? sd : 1.0;
    const Eigen::VectorXd ys = (y.array() - mu) / scale;
    Eigen::MatrixXd K(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
      for (Eigen::Index j = 0; j < n; ++j) K(i, j) = kernel(X.row(i), X.row(j));
      K(i, i) += kNoise;
    }
    const Eigen::LLT<Eigen::MatrixXd> llt(K);
    if (llt.info() != Eigen::Success) throw Error("surrogate covariance is not positive definite");
    const Eigen::VectorXd alpha = llt.solve(ys);
    const double best = ys.minCoeff();

    std::vector<std::uint64_t> candidates;
    if (total <= kScanLimit) {
      for (std::uint64_t x = 0; x < total; ++x) {
        if (!seen.count(x)) candidates.push_back(x);
      }
    } else {
      for (std::size_t k = 0; k < kCandidates; ++k) candidates.push_back(random_unseen(seen));
    }

    double best_ei = -1.0;
    std::uint64_t pick = candidates.front();
    Eigen::VectorXd kstar(n);
    for (auto x : candidates) {
      const Eigen::RowVectorXd z = normalized(x);
      for (Eigen::Index i = 0; i < n; ++i) kstar(i) = kernel(z, X.row(i));
      const double mean = kstar.dot(alpha);
      const Eigen::VectorXd v = llt.matrixL().solve(kstar);
      const double var = std::max(0.0, 1.0 - v.squaredNorm());
      const double ei = ei_value(mean, std::sqrt(var), best);
      if (ei > best_ei) {
        best_ei = ei;
        pick = x;
      }
    }
    if (best_ei < kMinEi) return std::nullopt;
    return lattice_.from_linear(pick);
  }

 private:
  static double kernel(const Eigen::RowVectorXd& a, const Eigen::RowVectorXd& b) {
    return std::exp(-0.5 * (a - b).squaredNorm() / (kLengthScale * kLengthScale));
  }

  Eigen::RowVectorXd normalized(std::uint64_t linear) const {
    const auto c = lattice_.from_linear(linear).coords();
    Eigen::RowVectorXd z(static_cast<Eigen::Index>(c.size()));
    for (std::size_t d = 0; d < c.size(); ++d) {
      const auto span = lattice_.hi()[d] - lattice_.lo()[d];
      z(static_cast<Eigen::Index>(d)) = span > 0 ? static_cast<double>(c[d] - lattice_.lo()[d]) / static_cast<double>(span) : 0.0;
    }
    return z;
  }

  std::uint64_t random_unseen(const std::unordered_set<std::uint64_t>& seen) {
    const auto total = lattice_.total();
    std::uint64_t x = rng_.below(total);
    while (seen.count(x)) x = (x + 1) % total;
    return x;
  }

  const Lattice& lattice_;
  Rng rng_;
};

inline std::unique_ptr<Strategy> make_strategy(StrategyKind kind, const Lattice& lattice, std::uint64_t seed) {
  switch (kind) {
    case StrategyKind::exhaustive: return std::make_unique<Exhaustive>(lattice);
    case StrategyKind::simanneal: return std::make_unique<SimulatedAnnealing>(lattice, seed);
    case StrategyKind::neldermead: return std::make_unique<NelderMead>(lattice, seed);
    case StrategyKind::bayesian: return std::make_unique<Bayesian>(lattice, seed);
    case StrategyKind::all: break;
  }
  throw Error("'all' is not a single strategy");
}

}  // namespace dpopt::search
