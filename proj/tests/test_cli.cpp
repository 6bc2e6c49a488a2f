// Copyright 2026 The tabsem Authors.
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

#include <gtest/gtest.h>

#include <sys/wait.h>

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "json.hpp"
#include "test_util.hpp"

#ifndef TABSEM_CLI
#error "TABSEM_CLI must be defined"
#endif

namespace tabsem {
namespace {

struct RunResult {
  int code = -1;
  std::string out;
};

RunResult RunCli(const std::string& args) {
  const std::string cmd = std::string(TABSEM_CLI) + " " + args + " 2>/dev/null";
  RunResult r;
  FILE* pipe = popen(cmd.c_str(), "r");
  if (pipe == nullptr) return r;
  std::array<char, 4096> buf;
  std::size_t n;
  while ((n = std::fread(buf.data(), 1, buf.size(), pipe)) > 0) r.out.append(buf.data(), n);
  const int status = pclose(pipe);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

std::string Slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::size_t Lines(const std::string& s) {
  return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n'));
}

class Cli : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    dir_ = testing::TempDir("cli").string();
    std::ofstream(dir_ + "/config.json") << R"({"max_epochs": 15, "patience": 4})";
    std::ofstream(dir_ + "/errors.csv")
        << "Region,Amount\nnorth,120.50\nsouth,#REF!\neast,98.10\nwest,143.00\n"
           "north,77.25\nsouth,#REF!\neast,102.40\nwest,88.80\nnorth,131.05\n";
    std::ofstream(dir_ + "/text.csv") << "a,b\nx,y\nz,w\n";
    std::ofstream(dir_ + "/spec.json")
        << R"({"n_tables": 20, "pattern_mix": {"IsError": 1}, "chart_fraction": 0})";
    errors_ = RunCli("synth --spec " + dir_ + "/spec.json -o " + dir_ + "/e.jsonl");
    synth_ = RunCli("synth --n 400 --seed 7 -o " + dir_ + "/c.jsonl");
    train_ = RunCli("train -i " + dir_ + "/c.jsonl -m " + dir_ + "/m.json --config " + dir_ +
                 "/config.json");
  }

  static std::string dir_;
  static RunResult synth_;
  static RunResult errors_;
  static RunResult train_;
};

std::string Cli::dir_;
RunResult Cli::synth_;
RunResult Cli::errors_;
RunResult Cli::train_;

TEST_F(Cli, UsageErrors) {
  EXPECT_EQ(RunCli("").code, 1);
  EXPECT_EQ(RunCli("bogus").code, 1);
  EXPECT_EQ(RunCli("train").code, 1);
  EXPECT_EQ(RunCli("synth --n 0 -o " + dir_ + "/z.jsonl").code, 2);
  EXPECT_EQ(RunCli("recommend -m " + dir_ + "/m.json -t " + dir_ + "/errors.csv").code, 1);
  EXPECT_EQ(RunCli("--help").code, 0);
}

TEST_F(Cli, DataErrors) {
  EXPECT_EQ(RunCli("eval -i " + dir_ + "/missing.jsonl -m " + dir_ + "/m.json").code, 2);
  EXPECT_EQ(RunCli("recommend -m " + dir_ + "/missing.json -t " + dir_ + "/errors.csv -f 1").code, 2);
  EXPECT_EQ(RunCli("recommend -m " + dir_ + "/m.json -t " + dir_ + "/errors.csv -f 7").code, 2);
  EXPECT_EQ(RunCli("recommend -m " + dir_ + "/m.json -t " + dir_ + "/text.csv --chart").code, 2);
  std::ofstream(dir_ + "/bad.json") << "{";
  EXPECT_EQ(RunCli("synth --spec " + dir_ + "/bad.json -o " + dir_ + "/z.jsonl").code, 2);
}

TEST_F(Cli, SynthIsDeterministic) {
  ASSERT_EQ(synth_.code, 0);
  ASSERT_EQ(RunCli("synth --n 400 --seed 7 -o " + dir_ + "/c2.jsonl.gz").code, 0);
  EXPECT_EQ(RunCli("synth --n 400 --seed 7 -o " + dir_ + "/c3.jsonl").code, 0);
  EXPECT_EQ(Slurp(dir_ + "/c.jsonl"), Slurp(dir_ + "/c3.jsonl"));
  EXPECT_GT(Slurp(dir_ + "/c.jsonl").size(), Slurp(dir_ + "/c2.jsonl.gz").size());
  ASSERT_EQ(errors_.code, 0);
  const std::string e = Slurp(dir_ + "/e.jsonl");
  EXPECT_NE(e.find("IsError"), std::string::npos);
  EXPECT_EQ(e.find("ColorScale"), std::string::npos);
}

TEST_F(Cli, PrepFeaturizeLabel) {
  ASSERT_EQ(synth_.code, 0);
  ASSERT_EQ(errors_.code, 0);
  ASSERT_EQ(RunCli("prep -i " + dir_ + "/c.jsonl -o " + dir_ + "/p.jsonl").code, 0);
  EXPECT_GT(Lines(Slurp(dir_ + "/p.jsonl")), 400u);
  const RunResult f = RunCli("featurize -i " + dir_ + "/e.jsonl");
  ASSERT_EQ(f.code, 0);
  ASSERT_GT(Lines(f.out), 1u);
  const std::size_t eol = f.out.find('\n');
  EXPECT_EQ(nlohmann::json::parse(f.out.substr(0, eol))["doc"], "header");
  const nlohmann::json first =
      nlohmann::json::parse(f.out.substr(eol + 1, f.out.find('\n', eol + 1) - eol - 1));
  EXPECT_TRUE(first.contains("field_signature"));
  EXPECT_TRUE(first.contains("cell_signatures"));
  const RunResult l = RunCli("label -i " + dir_ + "/e.jsonl");
  ASSERT_EQ(l.code, 0);
  EXPECT_NE(l.out.find("Err"), std::string::npos);
}

TEST_F(Cli, TrainEvalRecommend) {
  ASSERT_EQ(train_.code, 0);
  const nlohmann::json model = nlohmann::json::parse(Slurp(dir_ + "/m.json"));
  EXPECT_EQ(model["config"]["max_epochs"], 15);

  const RunResult e = RunCli("eval -i " + dir_ + "/c.jsonl -m " + dir_ + "/m.json -o " + dir_ +
                          "/met.json --report " + dir_ + "/met.txt");
  ASSERT_EQ(e.code, 0);
  const nlohmann::json met = nlohmann::json::parse(Slurp(dir_ + "/met.json"));
  EXPECT_EQ(met["evaluated_split"], "test");
  EXPECT_EQ(met["split"]["test"], 80);
  EXPECT_TRUE(met["cf"]["overall"].contains("R@1"));
  EXPECT_TRUE(met["chart"]["overall"].contains("R@3"));
  EXPECT_NE(Slurp(dir_ + "/met.txt").find("Conditional formatting"), std::string::npos);
  ASSERT_EQ(RunCli("eval -i " + dir_ + "/c.jsonl -m " + dir_ + "/m.json -o " + dir_ + "/met2.json")
                .code,
            0);
  EXPECT_EQ(Slurp(dir_ + "/met.json"), Slurp(dir_ + "/met2.json"));

  const RunResult r = RunCli("recommend -m " + dir_ + "/m.json -t " + dir_ +
                          "/errors.csv -f 1 --k 3 --explain");
  ASSERT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("IsError"), std::string::npos) << r.out;
  EXPECT_NE(r.out.find("error cells"), std::string::npos) << r.out;

  const RunResult j = RunCli("recommend -m " + dir_ + "/m.json -t " + dir_ + "/errors.csv -f 1 --json");
  ASSERT_EQ(j.code, 0);
  EXPECT_GE(Lines(j.out), 1u);
  EXPECT_LE(Lines(j.out), 3u);
  EXPECT_EQ(nlohmann::json::parse(j.out.substr(0, j.out.find('\n')))["field_index"], 1);

  const RunResult c = RunCli("recommend -m " + dir_ + "/m.json -t " + dir_ +
                          "/errors.csv --chart --k 2 --json --explain");
  ASSERT_EQ(c.code, 0);
  ASSERT_EQ(Lines(c.out), 2u);
  const nlohmann::json top = nlohmann::json::parse(c.out.substr(0, c.out.find('\n')));
  EXPECT_EQ(top["y_fields"], nlohmann::json::array({1}));
  EXPECT_TRUE(top.contains("explanation"));
}

}  // namespace
}  // namespace tabsem
