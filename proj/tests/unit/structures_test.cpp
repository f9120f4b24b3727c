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

#include <map>

#include <gtest/gtest.h>

#include "dpopt/dpopt.hpp"
#include "oracles.hpp"

namespace dpopt {
namespace {

TEST(Cms, CountsWithoutCollisions) {
  Cms cms(3, 64, 1);
  for (int i = 0; i < 3; ++i) cms.update(42);
  EXPECT_EQ(cms.query(42), 3u);
}

TEST(Cms, EmptyQueriesZero) { EXPECT_EQ(Cms(4, 128, 7).query(999), 0u); }

TEST(Cms, SingleCellForcesCollision) {
  Cms cms(1, 1, 3);
  cms.update(1);
  cms.update(2);
  EXPECT_EQ(cms.query(1), 2u);
}

TEST(CmsProperty, NeverUnderestimates) {
  Rng rng(11);
  for (int run = 0; run < 20; ++run) {
    Cms cms(rng.between(1, 4), std::int64_t{1} << rng.between(1, 8), rng.next());
    std::map<std::int64_t, std::uint64_t> exact;
    for (int i = 0; i < 2000; ++i) {
      const auto k = rng.between(0, 500);
      cms.update(k);
      ++exact[k];
    }
    for (std::int64_t k = 0; k <= 520; ++k) EXPECT_GE(cms.query(k), exact.count(k) ? exact[k] : 0u);
  }
}

TEST(Mht, InsertThenHit) {
  MultiHashTable t(2, 16, 1);
  EXPECT_EQ(mht_access(t, 7, 0), MhtOutcome::inserted);
  EXPECT_EQ(mht_access(t, 7, 1), MhtOutcome::hit);
}

TEST(Mht, CapacityOneCollides) {
  MultiHashTable t(1, 1, 1);
  EXPECT_EQ(mht_access(t, 1, 0), MhtOutcome::inserted);
  EXPECT_EQ(mht_access(t, 2, 1), MhtOutcome::collision);
  EXPECT_EQ(mht_access(t, 1, 2), MhtOutcome::hit);  // a collision does not mutate
}

TEST(Mht, StaleCellsAreReclaimed) {
  MultiHashTable t(1, 1, 1, 100);
  EXPECT_EQ(mht_access(t, 1, 0), MhtOutcome::inserted);
  EXPECT_EQ(mht_access(t, 2, 50), MhtOutcome::collision);
  EXPECT_EQ(mht_access(t, 2, 201), MhtOutcome::inserted);
}

TEST(MhtProperty, OneSlotPerKeyAndOutcomesCoverAccesses) {
  Rng rng(3);
  MultiHashTable t(3, 8, 99);
  std::size_t counts[3] = {0, 0, 0};
  const int n = 5000;
  for (int i = 0; i < n; ++i) {
    const auto k = rng.between(0, 60);
    ++counts[static_cast<int>(mht_access(t, k, i))];
    std::map<std::int64_t, int> seen;
    for (const auto& c : t.cells()) {
      if (c.occupied) ++seen[c.key];
    }
    for (const auto& [key, times] : seen) ASSERT_LE(times, 1) << key;
  }
  EXPECT_EQ(counts[0] + counts[1] + counts[2], static_cast<std::size_t>(n));
}

TEST(MhtProperty, CollisionsNonIncreasingInSlots) {
  WorkloadSpec ws;
  ws.n_keys = 2000;
  ws.n_events = 20000;
  ws.preset = SkewPreset::moderate;
  ws.seed = 4;
  const Trace t = gen_trace(ws);
  double prev = 2.0;
  for (int e = 4; e <= 11; ++e) {
    MultiHashTable m(2, std::int64_t{1} << e, 77);
    std::size_t coll = 0;
    for (const auto& ev : t.events) coll += mht_access(m, ev.get("key"), ev.time) == MhtOutcome::collision;
    const double ratio = static_cast<double>(coll) / static_cast<double>(t.events.size());
    EXPECT_LE(ratio, prev) << e;
    prev = ratio;
  }
}

TEST(Precision, ReplaceProbabilityRule) {
  EXPECT_DOUBLE_EQ(precision_replace_probability(0), 1.0);
  EXPECT_DOUBLE_EQ(precision_replace_probability(3), 0.25);
}

TEST(Precision, HitIncrementsAndEmptyInserts) {
  PrecisionTable t(2, 8, 1);
  Rng rng(1);
  EXPECT_EQ(precision_access(t, 5, rng), PrecisionOutcome::inserted);
  EXPECT_EQ(precision_access(t, 5, rng), PrecisionOutcome::hit);
  EXPECT_EQ(t.estimate(5), 2u);
}

TEST(Precision, MonteCarloReplaceFractionAtCountThree) {
  // One cell holding a key with count 3; each trial rebuilds it.
  std::size_t replaced = 0;
  const int trials = 100000;
  Rng rng(12345);
  for (int i = 0; i < trials; ++i) {
    PrecisionTable t(1, 1, 0);
    Rng fill(0);
    precision_access(t, 1, fill);
    precision_access(t, 1, fill);
    precision_access(t, 1, fill);
    const auto o = precision_access(t, 2, rng);
    ASSERT_TRUE(o == PrecisionOutcome::replaced || o == PrecisionOutcome::kept);
    replaced += o == PrecisionOutcome::replaced;
  }
  EXPECT_NEAR(static_cast<double>(replaced) / trials, 0.25, 0.01);
}

TEST(Precision, ReplacementResetsCountToOne) {
  PrecisionTable t(1, 1, 0);
  Rng rng(8);
  precision_access(t, 1, rng);
  PrecisionOutcome o;
  do {
    o = precision_access(t, 2, rng);
  } while (o != PrecisionOutcome::replaced);
  EXPECT_EQ(t.estimate(2), 1u);
  EXPECT_EQ(t.estimate(1), 0u);
}

TEST(Fridge, MatchedPairGivesRtt) {
  Fridge f(1024, 0, 1);
  Rng rng(1);
  EXPECT_TRUE(f.request(9, 10, rng));
  EXPECT_EQ(f.response(9, 25), std::optional<std::int64_t>(15));
  EXPECT_EQ(f.occupied(), 0);
}

TEST(Fridge, OverwrittenRequestGivesNothing) {
  Fridge f(1, 0, 1);
  Rng rng(1);
  f.request(1, 0, rng);
  f.request(2, 1, rng);
  EXPECT_FALSE(f.response(1, 5).has_value());
}

TEST(Fridge, MonteCarloHalfProbability) {
  Fridge f(1, 1, 1);
  Rng rng(2718);
  std::size_t stored = 0;
  const int n = 100000;
  for (int i = 0; i < n; ++i) stored += f.request(i, i, rng);
  EXPECT_NEAR(static_cast<double>(stored) / n, 0.5, 0.01);
}

TEST(FridgeProperty, FullProbabilityLargeTableIsExact) {
  WorkloadSpec ws;
  ws.kind = WorkloadKind::request_response;
  ws.n_keys = 2000;
  ws.n_events = 4000;
  ws.delay_mu = 4.0;  // few requests in flight, so no slot is shared
  ws.seed = 5;
  const Trace t = gen_trace(ws);
  Fridge f(std::int64_t{1} << 20, 0, 3);
  Rng rng(0);
  std::vector<std::int64_t> got;
  for (const auto& e : t.events) {
    if (e.name == "request") f.request(e.get("key"), e.time, rng);
    else if (auto r = f.response(e.get("key"), e.time)) got.push_back(*r);
  }
  auto want = oracle::exact_rtts(t);
  std::sort(got.begin(), got.end());
  std::sort(want.begin(), want.end());
  EXPECT_EQ(got, want);
}

TEST(FormulaP, HalfWhenSpanIsTwiceTheSize) { EXPECT_DOUBLE_EQ(formula_p(std::int64_t{1} << 17, std::int64_t{1} << 18), 0.5); }

TEST(FormulaP, ClampsAtOne) {
  EXPECT_DOUBLE_EQ(formula_p(64, 64), 1.0);
  EXPECT_DOUBLE_EQ(formula_p(64, 3), 1.0);
}

TEST(FormulaP, ExactPowerOfTwoRatio) { EXPECT_DOUBLE_EQ(formula_p(4, 32), 0.125); }

TEST(FormulaP, RoundsDownToPowerOfTwo) { EXPECT_DOUBLE_EQ(formula_p(4, 33), 0.0625); }

TEST(StructureDeterminism, SameSeedSameState) {
  auto run = [](std::uint64_t seed) {
    PrecisionTable t(2, 16, seed);
    Rng rng(seed);
    for (int i = 0; i < 1000; ++i) precision_access(t, (i * 7919) % 101, rng);
    return t.digest();
  };
  EXPECT_EQ(run(3), run(3));
  EXPECT_NE(run(3), run(4));
}

}  // namespace
}  // namespace dpopt
