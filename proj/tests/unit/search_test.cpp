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

#include <cmath>
#include <functional>
#include <set>

#include <gtest/gtest.h>

#include "dpopt/dpopt.hpp"

namespace dpopt::search {
namespace {

using Fn = std::function<double(const SearchPoint&)>;

/// Runs a strategy to completion or `limit` proposals.
History drive(Strategy& s, const Fn& f, std::size_t limit = 1000) {
  History h;
  while (h.size() < limit) {
    auto p = s.next(h);
    if (!p) break;
    h.add(*p, f(*p));
  }
  return h;
}

/// Distinct points proposed before the first score of 0, or SIZE_MAX.
std::size_t evals_to_zero(const History& h) {
  std::set<std::vector<std::int64_t>> seen;
  for (const auto& e : h.entries()) {
    seen.insert(e.point.coords());
    if (e.score == 0.0) return seen.size();
  }
  return SIZE_MAX;
}

const Fn kAbs7 = [](const SearchPoint& p) { return std::abs(static_cast<double>(p.index - 7)); };

TEST(SaAcceptProb, Rule) {
  EXPECT_DOUBLE_EQ(sa_accept_prob(-0.1, 1.0), 1.0);
  EXPECT_DOUBLE_EQ(sa_accept_prob(0.0, 1.0), 1.0);
  EXPECT_NEAR(sa_accept_prob(0.5, 0.5), 0.3679, 1e-4);
  EXPECT_THROW(sa_accept_prob(1.0, 0.0), Error);
}

TEST(EiValue, Rule) {
  EXPECT_DOUBLE_EQ(ei_value(1.0, 0.0, 1.0), 0.0);
  EXPECT_DOUBLE_EQ(ei_value(0.0, 0.0, 1.0), 1.0);
  EXPECT_NEAR(ei_value(2.0, 1.0, 2.0), 0.3989, 1e-4);
  EXPECT_GT(ei_value(0.0, 1.0, 1.0), ei_value(0.0, 0.5, 1.0) - 1e-12);
}

TEST(NmStep, ReflectionIsClamped) {
  const std::vector<Vec> simplex{{0, 0}, {1, 0}, {0, 1}};
  EXPECT_EQ(nm_step(simplex, {0.0, 5.0, 1.0}, {0, 0}, {10, 10}), (std::vector<std::int64_t>{0, 1}));
  EXPECT_EQ(nm_step(simplex, {0.0, 5.0, 1.0}, {-5, -5}, {10, 10}), (std::vector<std::int64_t>{-1, 1}));
}

TEST(NmStep, OneDimensional) {
  EXPECT_EQ(nm_step({{2}, {4}}, {0.0, 1.0}, {0}, {15}), (std::vector<std::int64_t>{0}));
}

TEST(Lattice, LinearRoundTripIsLexicographic) {
  const auto lat = Lattice::box({0, 0, 0}, {2, 1, 3});
  EXPECT_EQ(lat.total(), 24u);
  std::vector<std::int64_t> prev;
  for (std::uint64_t x = 0; x < lat.total(); ++x) {
    const auto p = lat.from_linear(x);
    EXPECT_EQ(lat.to_linear(p), x);
    if (x > 0) EXPECT_LT(prev, p.coords());
    prev = p.coords();
  }
}

TEST(Exhaustive, VisitsIndicesInOrderThenStops) {
  const auto lat = Lattice::box({0}, {2});
  Exhaustive s(lat);
  const auto h = drive(s, kAbs7);
  ASSERT_EQ(h.size(), 3u);
  for (std::int64_t i = 0; i < 3; ++i) EXPECT_EQ(h.entries()[static_cast<std::size_t>(i)].point.index, i);
}

TEST(History, BestIsRunningMinimum) {
  History h;
  h.add(SearchPoint{0, {}}, 3.0);
  h.add(SearchPoint{1, {}}, 1.0);
  h.add(SearchPoint{2, {}}, 2.0);
  EXPECT_EQ(h.best(), 1.0);
  EXPECT_EQ(h.best_entry().point.index, 1);
}

TEST(NelderMead, FindsSevenWithinThirtyEvaluations) {
  const auto lat = Lattice::box({0}, {15});
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    NelderMead s(lat, seed);
    EXPECT_LE(evals_to_zero(drive(s, kAbs7, 200)), 30u) << seed;
  }
}

TEST(SimulatedAnnealing, FindsSevenWithinFortyEvaluations) {
  const auto lat = Lattice::box({0}, {15});
  SimulatedAnnealing s(lat, 1);
  EXPECT_LE(evals_to_zero(drive(s, kAbs7)), 40u);
}

TEST(Bayesian, FindsSevenWithinFortyEvaluations) {
  const auto lat = Lattice::box({0}, {15});
  Bayesian s(lat, 1);
  EXPECT_LE(evals_to_zero(drive(s, kAbs7)), 40u);
}

TEST(SimulatedAnnealing, StopsWhenFrozen) {
  const auto lat = Lattice::box({0}, {15});
  SimulatedAnnealing s(lat, 2);
  const auto h = drive(s, kAbs7, 10000);
  // T_k = 0.95^k drops below 1e-3 at k = 135; each restart reruns the schedule.
  EXPECT_EQ(h.size(), 135u * (SimulatedAnnealing::kMaxRestarts + 1));
  EXPECT_EQ(s.restarts(), SimulatedAnnealing::kMaxRestarts);
}

TEST(SimulatedAnnealing, IgnoresObjectiveScale) {
  const auto lat = Lattice::box({0, 0}, {20, 5});
  const Fn f = [](const SearchPoint& p) {
    return 1.0 + std::pow(static_cast<double>(p.index) - 13.0, 2) + std::abs(static_cast<double>(p.nr[0]) - 2.0);
  };
  const Fn scaled = [&](const SearchPoint& p) { return 1000.0 * f(p); };
  SimulatedAnnealing a(lat, 4), b(lat, 4);
  const auto ha = drive(a, f, 300);
  const auto hb = drive(b, scaled, 300);
  ASSERT_EQ(ha.size(), hb.size());
  for (std::size_t i = 0; i < ha.size(); ++i) EXPECT_EQ(ha.entries()[i].point, hb.entries()[i].point) << i;
}

TEST(Strategies, DeterministicPerSeed) {
  const auto lat = Lattice::box({0, 0}, {20, 5});
  const Fn f = [](const SearchPoint& p) {
    return std::pow(static_cast<double>(p.index) - 13.0, 2) + std::abs(static_cast<double>(p.nr[0]) - 2.0);
  };
  for (auto kind : {StrategyKind::exhaustive, StrategyKind::simanneal, StrategyKind::neldermead,
                    StrategyKind::bayesian}) {
    auto a = make_strategy(kind, lat, 42);
    auto b = make_strategy(kind, lat, 42);
    const auto ha = drive(*a, f, 60);
    const auto hb = drive(*b, f, 60);
    ASSERT_EQ(ha.size(), hb.size());
    for (std::size_t i = 0; i < ha.size(); ++i) EXPECT_EQ(ha.entries()[i].point, hb.entries()[i].point);
  }
}

TEST(Strategies, ProposalsStayInDomain) {
  const auto lat = Lattice::box({0, 0, 0}, {9, 3, 6});
  const Fn f = [](const SearchPoint& p) { return static_cast<double>(p.index * 3 + p.nr[0] - p.nr[1]); };
  for (auto kind : {StrategyKind::exhaustive, StrategyKind::simanneal, StrategyKind::neldermead,
                    StrategyKind::bayesian}) {
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
      auto s = make_strategy(kind, lat, seed);
      const auto h = drive(*s, f, 150);
      for (const auto& e : h.entries()) EXPECT_TRUE(lat.contains(e.point));
    }
  }
}

TEST(Strategies, ExhaustiveAndBayesianNeverRepeat) {
  const auto lat = Lattice::box({0, 0}, {7, 3});
  const Fn f = [](const SearchPoint& p) { return std::sin(static_cast<double>(p.index)) + 0.1 * static_cast<double>(p.nr[0]); };
  for (auto kind : {StrategyKind::exhaustive, StrategyKind::bayesian}) {
    auto s = make_strategy(kind, lat, 3);
    std::set<std::uint64_t> seen;
    const auto h = drive(*s, f, 100);
    for (const auto& e : h.entries()) EXPECT_TRUE(seen.insert(lat.to_linear(e.point)).second);
  }
}

TEST(Strategies, ExhaustiveMinimumIsTheOracle) {
  const auto lat = Lattice::box({0, 0}, {11, 4});
  const Fn f = [](const SearchPoint& p) { return std::abs(static_cast<double>(p.index) - 4.5) * (1 + p.nr[0]); };
  Exhaustive s(lat);
  const auto h = drive(s, f);
  EXPECT_EQ(h.size(), lat.total());
  double min = 1e9;
  for (std::uint64_t x = 0; x < lat.total(); ++x) min = std::min(min, f(lat.from_linear(x)));
  EXPECT_EQ(h.best(), min);
}

TEST(Strategies, SinglePointLattice) {
  const auto lat = Lattice::box({0}, {0});
  for (auto kind : {StrategyKind::exhaustive, StrategyKind::simanneal, StrategyKind::neldermead,
                    StrategyKind::bayesian}) {
    auto s = make_strategy(kind, lat, 1);
    const auto h = drive(*s, kAbs7, 50);
    EXPECT_GE(h.size(), 1u);
    EXPECT_LE(h.size(), 50u);
  }
}

TEST(Strategies, ParseNames) {
  EXPECT_EQ(parse_strategy("neldermead"), StrategyKind::neldermead);
  EXPECT_EQ(parse_strategy("all"), StrategyKind::all);
  EXPECT_THROW(parse_strategy("genetic"), Error);
}

}  // namespace
}  // namespace dpopt::search
