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

#include <filesystem>
#include <sstream>

#include <gtest/gtest.h>

#include "dpopt/dpopt.hpp"
#include "oracles.hpp"

namespace dpopt {
namespace {

WorkloadSpec zipf(SkewPreset p, std::int64_t keys, std::int64_t events, std::uint64_t seed = 1) {
  WorkloadSpec ws;
  ws.preset = p;
  ws.n_keys = keys;
  ws.n_events = events;
  ws.seed = seed;
  return ws;
}

TEST(GenTrace, UniformTopTenShare) {
  const double s = top_k_share(gen_trace(zipf(SkewPreset::uniform, 10000, 1000000)), 10);
  EXPECT_GE(s, 0.0006);
  EXPECT_LE(s, 0.002);
}

TEST(GenTrace, HighSkewTopTenShare) {
  EXPECT_NEAR(top_k_share(gen_trace(zipf(SkewPreset::high, 10000, 1000000)), 10), 0.58, 0.02);
}

TEST(GenTrace, ModerateSkewTopTenShare) {
  EXPECT_NEAR(top_k_share(gen_trace(zipf(SkewPreset::moderate, 10000, 1000000)), 10), 0.15, 0.02);
}

TEST(GenTrace, CalibrationHoldsAtLargerKeySpaces) {
  for (auto p : {SkewPreset::high, SkewPreset::moderate}) {
    const double s = solve_zipf_exponent(preset_top10_target(p), 200000);
    EXPECT_NEAR(zipf_top10_share(s, 200000), preset_top10_target(p), 1e-6);
    EXPECT_NEAR(top_k_share(gen_trace(zipf(p, 200000, 200000, 3)), 10), preset_top10_target(p), 0.02);
  }
}

TEST(GenTrace, SingleEvent) {
  EXPECT_EQ(gen_trace(zipf(SkewPreset::high, 10, 1)).size(), 1u);
  WorkloadSpec rr;
  rr.kind = WorkloadKind::request_response;
  rr.n_events = 1;
  const auto t = gen_trace(rr);
  ASSERT_EQ(t.size(), 1u);
  EXPECT_EQ(t.events[0].name, "request");
}

TEST(GenTrace, PureFunctionOfWorkload) {
  EXPECT_EQ(gen_trace(zipf(SkewPreset::high, 1000, 5000, 9)), gen_trace(zipf(SkewPreset::high, 1000, 5000, 9)));
  EXPECT_NE(gen_trace(zipf(SkewPreset::high, 1000, 5000, 9)), gen_trace(zipf(SkewPreset::high, 1000, 5000, 10)));
}

TEST(GenTrace, ZipfKeysAndSpacing) {
  const auto t = gen_trace(zipf(SkewPreset::moderate, 50, 1000));
  for (std::size_t i = 0; i < t.size(); ++i) {
    EXPECT_EQ(t.events[i].time, static_cast<std::int64_t>(i) * 100);
    EXPECT_GE(t.events[i].get("key"), 1);
    EXPECT_LE(t.events[i].get("key"), 50);
  }
}

TEST(GenTrace, RequestResponsePairsAreMatchedAndOrdered) {
  WorkloadSpec ws;
  ws.kind = WorkloadKind::request_response;
  ws.n_keys = 5000;
  ws.n_events = 10000;
  const auto t = gen_trace(ws);
  EXPECT_EQ(t.size(), 10000u);
  EXPECT_NO_THROW(t.check_order());
  std::map<std::int64_t, int> state;
  for (const auto& e : t.events) {
    auto& s = state[e.get("key")];
    if (e.name == "request") {
      EXPECT_EQ(s, 0);
      s = 1;
    } else {
      EXPECT_EQ(s, 1);
      s = 2;
    }
  }
  EXPECT_GT(oracle::exact_rtts(t).size(), 4000u);
}

TEST(MaxRequestSpan, CountsRequestsStrictlyInside) {
  Trace t;
  t.events = {Event{"request", 0, {Field{"key", 1}}}, Event{"request", 10, {Field{"key", 2}}},
              Event{"request", 20, {Field{"key", 3}}}, Event{"response", 25, {Field{"key", 2}}},
              Event{"response", 30, {Field{"key", 1}}}, Event{"response", 40, {Field{"key", 3}}}};
  EXPECT_EQ(max_request_span(t), 2);
}

TEST(SplitTrace, HalfAndFloor) {
  const auto t = gen_trace(zipf(SkewPreset::high, 10, 10));
  auto [a, b] = split_trace(t, 0.5);
  EXPECT_EQ(a.size(), 5u);
  EXPECT_EQ(b.size(), 5u);
  auto [c, d] = split_trace(t, 0.999);
  EXPECT_EQ(c.size(), 9u);
  EXPECT_EQ(d.size(), 1u);
  Trace joined = c;
  joined.events.insert(joined.events.end(), d.events.begin(), d.events.end());
  EXPECT_EQ(joined, t);
  EXPECT_THROW(split_trace(t, 1.0), Error);
  EXPECT_THROW(split_trace(t, 0.0), Error);
}

TEST(TraceCsv, ParsesOneLine) {
  std::istringstream in("1000,request,key=42\n");
  const auto t = parse_trace_csv(in);
  ASSERT_EQ(t.size(), 1u);
  EXPECT_EQ(t.events[0], (Event{"request", 1000, {Field{"key", 42}}}));
}

TEST(TraceCsv, RoundTripThroughFile) {
  WorkloadSpec ws;
  ws.kind = WorkloadKind::request_response;
  ws.n_events = 3000;
  const auto t = gen_trace(ws);
  const auto path = (std::filesystem::temp_directory_path() / "dpopt_roundtrip.csv").string();
  write_trace_csv(t, path);
  EXPECT_EQ(parse_trace_csv(path), t);
  std::filesystem::remove(path);
}

TEST(TraceCsv, DecreasingTimeReportsLine) {
  std::istringstream in("5,request,key=1\n7,request,key=2\n6,request,key=3\n");
  try {
    parse_trace_csv(in);
    FAIL() << "expected an error";
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("line 3"), std::string::npos) << e.what();
  }
}

TEST(TraceCsv, MalformedLinesReportLine) {
  for (const char* bad : {"x,request,key=1\n", "1\n", "1,request,key\n", "1,request,key=z\n", "1,,key=1\n"}) {
    std::istringstream in(std::string("0,request,key=0\n") + bad);
    try {
      parse_trace_csv(in);
      FAIL() << bad;
    } catch (const Error& e) {
      EXPECT_NE(std::string(e.what()).find("line 2"), std::string::npos) << e.what();
    }
  }
}

TEST(TraceCsv, MissingFileIsAnError) { EXPECT_THROW(parse_trace_csv(std::string("/nonexistent/trace.csv")), Error); }

}  // namespace
}  // namespace dpopt
