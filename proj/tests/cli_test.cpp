/* Copyright 2026 The layoutplan Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

// Runs the built command-line tool as a subprocess.

#include <gtest/gtest.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>

#include "json.hpp"

namespace {

namespace fs = std::filesystem;
using Json = nlohmann::json;

const std::string kCli = LAYOUTPLAN_CLI;
const std::string kData = LAYOUTPLAN_TEST_DATA;

struct Run {
  int status = -1;
  std::string out;
};

// Runs `args` through the shell; stderr is discarded.
Run run(const std::string& args) {
  Run r;
  FILE* p = ::popen((kCli + " " + args + " 2>/dev/null").c_str(), "r");
  if (!p) return r;
  char buf[4096];
  std::size_t n;
  while ((n = std::fread(buf, 1, sizeof(buf), p)) > 0) r.out.append(buf, n);
  const int w = ::pclose(p);
  r.status = WIFEXITED(w) ? WEXITSTATUS(w) : -1;
  return r;
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("layoutplan_cli_" + std::to_string(::getpid()) + "_" +
            ::testing::UnitTest::GetInstance()->current_test_info()->name());
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  void write(const std::string& name, const std::string& content) const {
    std::ofstream(dir_ / name, std::ios::binary) << content;
  }

  fs::path dir_;
};

const char* kLayout =
    R"({"canvas_w":128,"canvas_h":128,"elements":[{"label":"dog","bbox":[50,50,70,70]},)"
    R"({"label":"cat","bbox":[10,10,30,30]}]})";

TEST_F(Cli, ExitCodes) {
  EXPECT_EQ(run("--help").status, 0);
  EXPECT_EQ(run("").status, 2);
  EXPECT_EQ(run("encode --format svg").status, 2);
  EXPECT_EQ(run("pipeline --workers 0 --coco x").status, 2);
  EXPECT_EQ(run("pipeline").status, 2);
  EXPECT_EQ(run("render -i /nonexistent/layout.json").status, 1);
}

TEST_F(Cli, PipelineMatchesGoldenForAnyWorkerCount) {
  const std::string d = kData + "/pipeline/";
  for (int workers : {1, 3}) {
    const std::string out = path("records" + std::to_string(workers) + ".jsonl");
    const auto r = run("pipeline --coco " + d + "coco.json --crello " + d + "crello.jsonl" +
                       " --visual-text " + d + "visual_text.jsonl --formats int128,css128" +
                       " --seed 7 --workers " + std::to_string(workers) + " -o " + out);
    ASSERT_EQ(r.status, 0);
    EXPECT_EQ(slurp(out), slurp(d + "golden_records.jsonl"));
  }
}

TEST_F(Cli, ConfigFileIsOverriddenByFlags) {
  const std::string d = kData + "/pipeline/";
  write("run.toml", "[pipeline]\ntau-o = 1.0\nseed = 7\nformats = \"int128\"\n");
  const auto loose = run("--config " + path("run.toml") + " pipeline --coco " + d +
                         "coco.json -o " + path("a.jsonl") + " --stats " + path("a.json"));
  ASSERT_EQ(loose.status, 0);
  const auto strict = run("--config " + path("run.toml") + " pipeline --tau-o 0.01 --coco " + d +
                          "coco.json -o " + path("b.jsonl") + " --stats " + path("b.json"));
  ASSERT_EQ(strict.status, 0);
  const Json a = Json::parse(slurp(path("a.json")));
  const Json b = Json::parse(slurp(path("b.json")));
  EXPECT_EQ(a["dropped"]["overlap"], 0);
  EXPECT_GT(b["dropped"]["overlap"], 0);
}

TEST_F(Cli, EncodeDecodeRoundTrip) {
  write("layout.json", kLayout);
  const auto enc = run("-q encode -i " + path("layout.json") + " --format css128 -o " +
                       path("layout.css"));
  ASSERT_EQ(enc.status, 0);
  const auto dec = run("-q decode -i " + path("layout.css") + " --format css128");
  ASSERT_EQ(dec.status, 0);
  const Json j = Json::parse(dec.out);
  EXPECT_EQ(j["status"], "success");
  EXPECT_EQ(j["layout"]["elements"][1]["bbox"], Json::parse("[10.0, 10.0, 30.0, 30.0]"));

  write("bad.txt", "dog: [50, 50, 40, 70]\n");
  const auto bad = run("-q decode -i " + path("bad.txt"));
  EXPECT_EQ(bad.status, 1);
  EXPECT_EQ(Json::parse(bad.out)["failure_reason"], "InvertedBox");
}

TEST_F(Cli, AugmentIsSeeded) {
  write("layout.json", kLayout);
  const auto a = run("-q augment -i " + path("layout.json") + " --seed 5");
  const auto b = run("-q augment -i " + path("layout.json") + " --seed 5");
  ASSERT_EQ(a.status, 0);
  EXPECT_EQ(a.out, b.out);
  const Json j = Json::parse(a.out);
  EXPECT_GT(j["distance"].get<double>(), 0.0);
}

TEST_F(Cli, PlanWithScriptedReplies) {
  write("bad.txt", "no layout");
  write("good.txt", "dog: [1, 2, 30, 40]\n");
  const auto ok = run("-q plan --caption 'a dog' --reply-file " + path("bad.txt") +
                      " --reply-file " + path("good.txt") + " --show-prompt");
  ASSERT_EQ(ok.status, 0) << ok.out;
  const Json j = Json::parse(ok.out);
  EXPECT_EQ(j["repair_count"], 1);
  EXPECT_EQ(j["demonstrations"].size(), 3u);
  EXPECT_NE(j["prompt"].get<std::string>().find("Description: a dog"), std::string::npos);

  const auto fail = run("-q plan --caption 'a dog' --retry 0 --reply-file " + path("bad.txt"));
  EXPECT_EQ(fail.status, 1);
  EXPECT_EQ(Json::parse(fail.out)["outcome"]["status"], "failure");
}

TEST_F(Cli, EvalReport) {
  const auto r = run("-q eval --gen " + kData + "/eval/gen.jsonl --ref " + kData +
                     "/eval/ref.jsonl --items " + path("items.jsonl"));
  ASSERT_EQ(r.status, 0);
  const Json j = Json::parse(r.out);
  const Json golden = Json::parse(slurp(kData + "/eval/report_closed.json"));
  EXPECT_EQ(j["n_success"], golden["n_success"]);
  EXPECT_NEAR(j["max_iou"].get<double>(), golden["max_iou"].get<double>(), 1e-9);
  EXPECT_EQ(j["fail_percent_text"], "33.333");
  EXPECT_FALSE(slurp(path("items.jsonl")).empty());
}

TEST_F(Cli, RenderMatchesLibrary) {
  write("layout.json", kLayout);
  const auto r = run("-q render -i " + path("layout.json"));
  ASSERT_EQ(r.status, 0);
  EXPECT_EQ(r.out.rfind("<svg", 0), 0u);
  EXPECT_NE(r.out.find("data-id=\"e1\""), std::string::npos);
}

}  // namespace
