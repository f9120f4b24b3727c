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

#include <sstream>

#include <gtest/gtest.h>

#include "dpopt/params.hpp"

namespace dpopt {
namespace {

using R = Violation::Reason;

TEST(ValidateConfig, InRangeIsOk) {
  const std::vector<ParamSpec> specs{count_param("rows", IntRange{1, 5})};
  Config c;
  c.set("rows", 3);
  EXPECT_TRUE(validate_config(specs, c).empty());
}

TEST(ValidateConfig, OutOfDomain) {
  const std::vector<ParamSpec> specs{count_param("rows", IntRange{1, 5})};
  Config c;
  c.set("rows", 9);
  const auto v = validate_config(specs, c);
  ASSERT_EQ(v.size(), 1u);
  EXPECT_EQ(v[0], (Violation{"rows", R::out_of_domain}));
}

TEST(ValidateConfig, Missing) {
  const std::vector<ParamSpec> specs{count_param("rows", IntRange{1, 5}), memory_param("cols", PowerOfTwo{2, 8})};
  Config c;
  c.set("rows", 3);
  const auto v = validate_config(specs, c);
  ASSERT_EQ(v.size(), 1u);
  EXPECT_EQ(v[0], (Violation{"cols", R::missing}));
}

TEST(ValidateConfig, UndeclaredAndDuplicate) {
  const std::vector<ParamSpec> specs{count_param("rows", IntRange{1, 5}), count_param("rows", IntRange{1, 5})};
  Config c;
  c.set("rows", 1);
  c.set("extra", 1);
  const auto v = validate_config(specs, c);
  EXPECT_NE(std::find(v.begin(), v.end(), Violation{"rows", R::duplicate_spec}), v.end());
  EXPECT_NE(std::find(v.begin(), v.end(), Violation{"extra", R::undeclared}), v.end());
}

TEST(ValidateConfig, PowerOfTwoRejectsNonPowers) {
  const std::vector<ParamSpec> specs{memory_param("cols", PowerOfTwo{2, 8})};
  for (std::int64_t v : {3, 2, 512, 0, -4}) {
    Config c;
    c.set("cols", v);
    EXPECT_FALSE(validate_config(specs, c).empty()) << v;
  }
  Config ok;
  ok.set("cols", 64);
  EXPECT_TRUE(validate_config(specs, ok).empty());
}

TEST(DefaultStart, MemoryStartsAtStageSram) {
  PipelineModel pipe;
  pipe.sram_words_per_stage = 4096;
  EXPECT_EQ(default_start(memory_param("cols", IntRange{1, 65536}), pipe), 4096);
}

TEST(DefaultStart, CountStartsAtFour) {
  EXPECT_EQ(default_start(count_param("rows", IntRange{1, 8}), PipelineModel{}), 4);
}

TEST(DefaultStart, ClampsIntoDomain) {
  EXPECT_EQ(default_start(count_param("rows", IntRange{1, 2}), PipelineModel{}), 2);
  PipelineModel pipe;
  pipe.sram_words_per_stage = 100;
  EXPECT_EQ(default_start(memory_param("cols", PowerOfTwo{2, 12}), pipe), 64);
}

TEST(DefaultStart, ExplicitStartIsVerbatim) {
  auto p = count_param("rows", IntRange{1, 8});
  p.start = 7;
  EXPECT_EQ(default_start(p, PipelineModel{}), 7);
}

TEST(DefaultStart, NonresourceIsAnError) {
  EXPECT_THROW(default_start(nonresource_param("t", IntRange{0, 3}), PipelineModel{}), Error);
}

TEST(DefaultStart, IndependentOfEverythingButSpecAndPipe) {
  const auto p = memory_param("cols", PowerOfTwo{4, 12});
  EXPECT_EQ(default_start(p, PipelineModel{}), default_start(p, PipelineModel{}));
}

TEST(Domain, IndexRoundTrip) {
  const std::vector<Domain> ds{IntRange{-3, 4}, PowerOfTwo{0, 10}, Boolean{}, Choice{{"a", "b", "c"}}};
  for (const auto& d : ds) {
    for (std::int64_t i = 0; i < domain_size(d); ++i) {
      EXPECT_EQ(domain_index(d, domain_value(d, i)), i);
    }
  }
}

TEST(Config, TextIsSortedKeyValueLines) {
  Config c;
  c.set("zeta", 1);
  c.set("alpha", 22);
  EXPECT_EQ(c.to_text(), "alpha=22\nzeta=1\n");
}

TEST(Config, ParseAcceptsBranchNamesAndComments) {
  const std::vector<ParamSpec> specs{selector_param("tracker", {"cms", "precision"}), count_param("rows", IntRange{1, 4}),
                                     nonresource_param("flag", Boolean{})};
  std::istringstream in("# comment\ntracker = precision\nrows=3\n\nflag=true\n");
  const Config c = parse_config(specs, in);
  EXPECT_EQ(c.at("tracker"), 1);
  EXPECT_EQ(c.at("rows"), 3);
  EXPECT_EQ(c.at("flag"), 1);
  std::istringstream again(format_config(specs, c));
  EXPECT_EQ(parse_config(specs, again), c);
}

TEST(Config, ParseRejectsGarbage) {
  const std::vector<ParamSpec> specs{count_param("rows", IntRange{1, 4})};
  std::istringstream bad("rows=3x\n");
  EXPECT_THROW(parse_config(specs, bad), Error);
  std::istringstream dup("rows=1\nrows=2\n");
  EXPECT_THROW(parse_config(specs, dup), Error);
}

}  // namespace
}  // namespace dpopt
