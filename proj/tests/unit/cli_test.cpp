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

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>

#include "dpopt/cli.hpp"

namespace dpopt {
namespace {

namespace fs = std::filesystem;

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result cli(std::vector<std::string> args) {
  args.insert(args.begin(), "dpopt");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int rc = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  return {rc, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return std::string(std::istreambuf_iterator<char>(in), {});
}

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() / ("dpopt_cli_" + std::to_string(::testing::UnitTest::GetInstance()->random_seed()) +
                                        "_" + ::testing::UnitTest::GetInstance()->current_test_info()->name());
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }
  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  void make_traces() {
    ASSERT_EQ(cli({"gen", "--kind", "zipf", "--preset", "moderate", "--keys", "500", "--events", "6000", "--seed",
                   "7", "-o", path("tr.csv"), "--train-fraction", "0.5", "--test-out", path("te.csv")})
                  .code,
              0);
  }

  fs::path dir_;
};

TEST_F(Cli, GenWritesTrace) {
  const auto r = cli({"gen", "--kind", "zipf", "--preset", "high", "--keys", "10000", "--events", "1000000", "--seed",
                      "7", "-o", path("t.csv")});
  EXPECT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(parse_trace_csv(path("t.csv")).size(), 1000000u);
}

TEST_F(Cli, GenSplitsTrainAndTest) {
  make_traces();
  EXPECT_EQ(parse_trace_csv(path("tr.csv")).size(), 3000u);
  EXPECT_EQ(parse_trace_csv(path("te.csv")).size(), 3000u);
}

TEST_F(Cli, OptimizeWritesVerifiedReport) {
  make_traces();
  const auto r = cli({"optimize", "--app", "mht", "--strategy", "exhaustive", "--budget", "600", "--seed", "7",
                      "--train", path("tr.csv"), "--test", path("te.csv"), "-o", path("out.json")});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto j = nlohmann::json::parse(slurp(path("out.json")));
  EXPECT_EQ(j["app"], "mht");
  EXPECT_EQ(j["strategy"], "exhaustive");
  EXPECT_EQ(j["seed"], 7);
  EXPECT_TRUE(j["entries"][0]["verified"].get<bool>());
  EXPECT_EQ(j["test"]["config"], j["entries"][0]["config"]);
  EXPECT_TRUE(j.contains("pipeline_hash"));
  EXPECT_EQ(j["manifest"]["train"], path("tr.csv"));
  EXPECT_GT(j["preprocess"]["space_size"].get<int>(), 0);
}

TEST_F(Cli, OptimizeIsByteIdentical) {
  make_traces();
  const std::vector<std::string> args{"optimize", "--app", "precision", "--strategy", "bayesian", "--budget", "600",
                                      "--max-evals", "12", "--seed", "3", "--train", path("tr.csv"), "-o",
                                      path("a.json")};
  ASSERT_EQ(cli(args).code, 0);
  const auto first = slurp(path("a.json"));
  ASSERT_EQ(cli(args).code, 0);
  EXPECT_EQ(slurp(path("a.json")), first);
}

TEST_F(Cli, VerifyCommandRejectionFallsBack) {
  make_traces();
  const auto r = cli({"optimize", "--app", "mht", "--budget", "600", "--train", path("tr.csv"), "--verify-cmd",
                      "! grep -q '^ways=4$'", "-o", path("out.json")});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto j = nlohmann::json::parse(slurp(path("out.json")));
  for (const auto& e : j["entries"]) {
    if (e["verified"].get<bool>()) {
      EXPECT_NE(e["config"]["ways"], 4);
      break;
    }
  }
}

TEST_F(Cli, VerifyCommandRejectingAllIsDomainError) {
  make_traces();
  const auto r = cli({"optimize", "--app", "mht", "--budget", "600", "--max-evals", "3", "--train", path("tr.csv"),
                      "--verify-cmd", "false"});
  EXPECT_EQ(r.code, 2);
}

TEST_F(Cli, SimulateOutOfDomainConfigExitsTwo) {
  make_traces();
  std::ofstream(path("bad.cfg")) << "tracker=plain\ntables=9\nentries=64\ncms_rows=1\ncms_cols=16\ntimeout=1024\nthreshold=0\n";
  const auto r = cli({"simulate", "--app", "cache", "--config", path("bad.cfg"), "--trace", path("tr.csv")});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("tables: out-of-domain"), std::string::npos) << r.err;
}

TEST_F(Cli, SimulatePrintsScoreAndSink) {
  make_traces();
  std::ofstream(path("ok.cfg")) << "tracker=plain\ntables=2\nentries=64\ncms_rows=1\ncms_cols=16\ntimeout=1024\nthreshold=0\n";
  const auto r = cli({"simulate", "--app", "cache", "--config", path("ok.cfg"), "--trace", path("tr.csv"), "-o",
                      path("sink.json")});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto j = nlohmann::json::parse(r.out);
  EXPECT_GT(j["score"].get<double>(), 0.0);
  EXPECT_EQ(nlohmann::json::parse(slurp(path("sink.json")))["logHits"].size(), 3000u);
}

TEST_F(Cli, SimulateEmptyTraceExitsTwo) {
  std::ofstream(path("empty.csv")).flush();
  std::ofstream(path("ok.cfg")) << "tracker=plain\ntables=2\nentries=64\ncms_rows=1\ncms_cols=16\ntimeout=1024\nthreshold=0\n";
  EXPECT_EQ(cli({"simulate", "--app", "cache", "--config", path("ok.cfg"), "--trace", path("empty.csv")}).code, 2);
}

TEST_F(Cli, PreprocessWritesSpaceCsv) {
  std::ofstream(path("pipe.cfg")) << "stages=4\nsram_words_per_stage=64\n";
  const auto r = cli({"preprocess", "--app", "cms", "--pipeline", path("pipe.cfg"), "-o", path("space.csv")});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto stats = nlohmann::json::parse(r.out);
  const auto csv = slurp(path("space.csv"));
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "rows,cols");
  EXPECT_EQ(static_cast<std::size_t>(std::count(csv.begin(), csv.end(), '\n')), stats["space_size"].get<std::size_t>() + 1);
}

TEST_F(Cli, PreprocessOverLargeProgramExitsTwo) {
  std::ofstream(path("pipe.cfg")) << "stages=1\nsram_words_per_stage=8\n";
  EXPECT_EQ(cli({"preprocess", "--app", "cms", "--pipeline", path("pipe.cfg")}).code, 2);
}

TEST_F(Cli, UsageErrorsExitOne) {
  EXPECT_EQ(cli({}).code, 1);
  EXPECT_EQ(cli({"optimize", "--app", "nope", "--train", "x"}).code, 1);
  EXPECT_EQ(cli({"optimize", "--app", "mht", "--train", path("missing.csv")}).code, 1);
  EXPECT_EQ(cli({"gen", "--bogus"}).code, 1);
  EXPECT_EQ(cli({"--help"}).code, 0);
}

TEST_F(Cli, BinaryRunsEndToEnd) {
  const std::string cmd = std::string(DPOPT_CLI_PATH) + " gen --kind reqresp --events 100 -o " + path("rr.csv");
  EXPECT_EQ(std::system(cmd.c_str()), 0);
  EXPECT_EQ(parse_trace_csv(path("rr.csv")).size(), 100u);
  const std::string bad = std::string(DPOPT_CLI_PATH) + " simulate --app mht 2>/dev/null";
  const int rc = std::system(bad.c_str());
  EXPECT_EQ(WEXITSTATUS(rc), 1);
}

}  // namespace
}  // namespace dpopt
