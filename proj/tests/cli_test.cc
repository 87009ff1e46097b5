/*
 * Copyright 2026 The rhd Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "commands.h"
#include "gtest/gtest.h"
#include "rhd/episode_io.h"

namespace rhd::cli {
namespace {

namespace fs = std::filesystem;

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("rhd_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  fs::path write(const std::string& name, const std::string& text) {
    std::ofstream(dir_ / name) << text;
    return dir_ / name;
  }

  int rhd(std::vector<std::string> args) {
    args.insert(args.begin(), "rhd");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    out_.str("");
    err_.str("");
    return run(static_cast<int>(argv.size()), argv.data(), out_, err_);
  }

  std::string p(const std::string& name) const { return (dir_ / name).string(); }

  // Reference, validation and test logs plus a fitted bundle.
  void pipeline() {
    write("ref.cfg", "schema = 1\nepisodes = 150\nseed = 3\ninjection_rate = 0\nmax_steps = 60\n");
    write("val.cfg", "schema = 1\nepisodes = 200\nseed = 4\ninjection_rate = 0.3\nmax_steps = 60\n");
    write("test.cfg", "schema = 1\nepisodes = 120\nseed = 5\ninjection_rate = 0.3\nmax_steps = 60\n");
    for (const char* s : {"ref", "val", "test"}) {
      ASSERT_EQ(rhd({"generate", "--config", p(std::string(s) + ".cfg"), "--out",
                     p(std::string(s) + ".jsonl")}),
                kExitOk)
          << err_.str();
    }
    ASSERT_EQ(rhd({"fit", "--log", p("ref.jsonl"), "--validation", p("val.jsonl"), "--out",
                   p("model.bundle"), "--folds", "3"}),
              kExitOk)
        << err_.str();
  }

  fs::path dir_;
  std::ostringstream out_, err_;
};

TEST_F(CliTest, UsageErrorsExitWithConfigCode) {
  EXPECT_EQ(rhd({}), kExitConfig);
  EXPECT_EQ(rhd({"generate", "--config", p("x.cfg")}), kExitConfig);  // --out missing
  EXPECT_EQ(rhd({"detect", "--bogus"}), kExitConfig);
  EXPECT_EQ(rhd({"fit", "--log", "a", "--out", "b", "--jobs", "0"}), kExitConfig);
  write("bad.cfg", "episodes = 10\nfoo = 1\n");
  EXPECT_EQ(rhd({"generate", "--config", p("bad.cfg"), "--out", p("o.jsonl")}), kExitConfig);
  EXPECT_NE(err_.str().find("bad.cfg:2: foo: unknown key"), std::string::npos) << err_.str();
  write("ok.cfg", "episodes = 10\n");
  EXPECT_EQ(rhd({"experiment", "nonsense", "--config", p("ok.cfg"), "--out-dir", p("o")}),
            kExitConfig);
  EXPECT_FALSE(fs::exists(dir_ / "o.jsonl"));
}

TEST_F(CliTest, DataErrorsAndEmptyInput) {
  EXPECT_EQ(rhd({"fit", "--log", p("missing.jsonl"), "--out", p("m.bundle")}), kExitData);
  write("empty.jsonl", "");
  EXPECT_EQ(rhd({"fit", "--log", p("empty.jsonl"), "--out", p("m.bundle")}), kExitEmpty);
  write("junk.jsonl", "{not json\n");
  EXPECT_EQ(rhd({"fit", "--log", p("junk.jsonl"), "--out", p("m.bundle")}), kExitData);
  write("junk.bundle", "hello\n");
  EXPECT_EQ(rhd({"detect", "--model", p("junk.bundle"), "--log", p("junk.jsonl"), "--out",
                 p("a.jsonl")}),
            kExitData);
}

TEST_F(CliTest, GenerateFitDetectReport) {
  pipeline();
  EXPECT_NE(out_.str().find("held-out F1"), std::string::npos);
  ASSERT_EQ(rhd({"detect", "--model", p("model.bundle"), "--log", p("test.jsonl"), "--out",
                 p("assess.jsonl")}),
            kExitOk)
      << err_.str();
  ASSERT_EQ(rhd({"report", "--assessments", p("assess.jsonl"), "--labels", p("test.jsonl"),
                 "--out-dir", p("report")}),
            kExitOk)
      << err_.str();
  const std::string metrics = slurp(dir_ / "report" / "metrics.csv");
  EXPECT_EQ(metrics.rfind("configuration,precision,recall,f1,auc_roc,latency,brier\nensemble,", 0),
            0u);
  EXPECT_NE(metrics.find("consensus_3_of_6,"), std::string::npos);
  EXPECT_EQ(slurp(dir_ / "report" / "roc.svg").rfind("<svg", 0), 0u);

  const auto manifest = nlohmann::json::parse(slurp(dir_ / "assess.manifest.json"));
  EXPECT_EQ(manifest["command"], "detect");
  EXPECT_EQ(manifest["counts"]["episodes"], 120);
  EXPECT_EQ(manifest["inputs"].size(), 2u);
  EXPECT_TRUE(manifest["wall_seconds"].contains("score"));
  EXPECT_TRUE(fs::exists(dir_ / "ref.manifest.json"));
  EXPECT_TRUE(fs::exists(dir_ / "model.manifest.json"));

  // Reports refuse mismatched label logs.
  EXPECT_EQ(rhd({"report", "--assessments", p("assess.jsonl"), "--labels", p("val.jsonl"),
                 "--out-dir", p("report2")}),
            kExitData);
  EXPECT_EQ(rhd({"detect", "--model", p("model.bundle"), "--log", p("test.jsonl"), "--out",
                 p("x.jsonl"), "--risk-threshold", "1.5"}),
            kExitConfig);
}

TEST_F(CliTest, OutputsAreDeterministicAcrossRunsAndJobCounts) {
  pipeline();
  const std::string model = slurp(dir_ / "model.bundle");
  ASSERT_EQ(rhd({"generate", "--config", p("test.cfg"), "--out", p("again.jsonl")}), kExitOk);
  EXPECT_EQ(slurp(dir_ / "again.jsonl"), slurp(dir_ / "test.jsonl"));
  ASSERT_EQ(rhd({"fit", "--log", p("ref.jsonl"), "--validation", p("val.jsonl"), "--out",
                 p("model2.bundle"), "--folds", "3", "--jobs", "4"}),
            kExitOk);
  EXPECT_EQ(slurp(dir_ / "model2.bundle"), model);
  for (const char* sel : {"", "--selective"}) {
    std::vector<std::string> base = {"detect", "--model", p("model.bundle"), "--log",
                                     p("test.jsonl")};
    if (*sel) base.push_back(sel);
    auto one = base, four = base;
    one.insert(one.end(), {"--out", p("a1.jsonl"), "--jobs", "1"});
    four.insert(four.end(), {"--out", p("a4.jsonl"), "--jobs", "4"});
    ASSERT_EQ(rhd(one), kExitOk);
    ASSERT_EQ(rhd(four), kExitOk);
    EXPECT_EQ(slurp(dir_ / "a1.jsonl"), slurp(dir_ / "a4.jsonl")) << sel;
    EXPECT_FALSE(slurp(dir_ / "a1.jsonl").empty());
  }
}

TEST_F(CliTest, ExperimentCsvsMatchAcrossJobCounts) {
  write("f.cfg",
        "schema = 1\nseed = 9\nmax_steps = 40\nfactorial.seeds_per_cell = 2\n"
        "factorial.episodes_per_run = 10\n");
  ASSERT_EQ(rhd({"experiment", "factorial", "--config", p("f.cfg"), "--out-dir", p("f1"),
                 "--jobs", "1"}),
            kExitOk)
      << err_.str();
  ASSERT_EQ(rhd({"experiment", "factorial", "--config", p("f.cfg"), "--out-dir", p("f4"),
                 "--jobs", "4"}),
            kExitOk);
  for (const char* f : {"effects.csv", "cells.csv", "cells.svg"}) {
    EXPECT_EQ(slurp(dir_ / "f1" / f), slurp(dir_ / "f4" / f)) << f;
  }
  const auto manifest = nlohmann::json::parse(slurp(dir_ / "f1" / "manifest.json"));
  EXPECT_EQ(manifest["counts"]["runs"], 2 * 8 * 2);
}

TEST(ManifestPathTest, ReplacesExtension) {
  EXPECT_EQ(manifest_path("out/a.jsonl"), fs::path("out/a.manifest.json"));
  EXPECT_EQ(manifest_path("model.bundle"), fs::path("model.manifest.json"));
  EXPECT_EQ(manifest_path("plain"), fs::path("plain.manifest.json"));
}

TEST(DefaultJobsTest, ReadsEnvironment) {
  ::setenv("RHD_JOBS", "3", 1);
  EXPECT_EQ(default_jobs(), 3u);
  for (const char* bad : {"0", "-2", "x", "4x", ""}) {
    ::setenv("RHD_JOBS", bad, 1);
    EXPECT_EQ(default_jobs(), 1u) << bad;
  }
  ::unsetenv("RHD_JOBS");
  EXPECT_EQ(default_jobs(), 1u);
}

}  // namespace
}  // namespace rhd::cli
