/* Copyright 2026 The Vartha Authors. All Rights Reserved.

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

#include <sys/wait.h>

#include <gtest/gtest.h>

#include "test_support.hpp"
#include "vartha/io.hpp"

namespace vartha::cli {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;
using testing::TempDir;

struct Outcome {
  int code = -1;
  std::string out, err;
};

// Runs the vartha binary with `args`, optionally prefixed by environment
// assignments.
Outcome vartha(const TempDir& dir, const std::string& args, const std::string& env = "") {
  const auto out = dir / "stdout.txt";
  const auto err = dir / "stderr.txt";
  const std::string cmd = "env " + env + " " + std::string(VARTHA_CLI_PATH) + " " + args + " >" + out.string() +
                          " 2>" + err.string();
  const int status = std::system(cmd.c_str());
  Outcome o;
  o.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  o.out = io::read_file(out);
  o.err = io::read_file(err);
  return o;
}

std::string common(const TempDir& dir) {
  return " --out " + (dir / "run").string() + " --image-cache " + testing::fixture_images().string() +
         " --feature-cache " + testing::feature_cache_dir().string() + " --vector-size 16";
}

TEST(CliUsageTest, MissingManifestNamesTheFlag) {
  TempDir dir;
  const auto o = vartha(dir, "ingest --out " + (dir / "run").string());
  EXPECT_EQ(o.code, 2);
  const auto j = json::parse(o.err);
  EXPECT_NE(j["message"].get<std::string>().find("--manifest"), std::string::npos) << o.err;
  EXPECT_EQ(j["exit_code"], 2);
}

TEST(CliUsageTest, UnknownFlagsAndConfigKeys) {
  TempDir dir;
  EXPECT_EQ(vartha(dir, "train --no-such-flag 1").code, 2);
  EXPECT_EQ(vartha(dir, "frobnicate").code, 2);
  EXPECT_EQ(vartha(dir, "train --target video").code, 2);
  io::write_file_atomic(dir / "bad.ini", "no-such-key = 3\n");
  EXPECT_EQ(vartha(dir, "train --config " + (dir / "bad.ini").string()).code, 2);
  io::write_file_atomic(dir / "under.ini", "vector_size = 3\n");
  EXPECT_EQ(vartha(dir, "preprocess --config " + (dir / "under.ini").string()).code, 2);
}

TEST(CliUsageTest, HelpSucceeds) {
  TempDir dir;
  const auto o = vartha(dir, "--help");
  EXPECT_EQ(o.code, 0);
  for (const char* sub : {"ingest", "preprocess", "train", "evaluate", "predict", "serve"}) {
    EXPECT_NE(o.out.find(sub), std::string::npos) << sub;
  }
}

TEST(CliUsageTest, DataErrorsExitOne) {
  TempDir dir;
  io::write_file_atomic(dir / "m.csv", "news_headline,label\nx,0\n");
  const auto o = vartha(dir, "ingest --manifest " + (dir / "m.csv").string() + common(dir));
  EXPECT_EQ(o.code, 1);
  EXPECT_EQ(json::parse(o.err)["error"], "MissingColumn");
}

// One pipeline run on the 16-record subset shared by the tests below.
class CliPipelineTest : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    dir_ = new TempDir;
    const auto& d = *dir_;
    io::write_file_atomic(d / "run.ini", "epochs = 2\nbatch-size = 8\n");
    const std::string cfg = common(d) + " --config " + (d / "run.ini").string();
    steps_.push_back(vartha(d, "ingest --manifest " + (testing::fixture_dir() / "manifest_16.csv").string() + cfg));
    steps_.push_back(vartha(d, "preprocess --weights " + testing::test_weights().string() + cfg));
    steps_.push_back(vartha(d, "train --target all" + cfg));
    steps_.push_back(vartha(d, "evaluate --target all" + cfg));
  }
  static void TearDownTestSuite() { delete dir_; }
  static fs::path run(const std::string& rel) { return *dir_ / ("run/" + rel); }
  static TempDir* dir_;
  static std::vector<Outcome> steps_;
};
TempDir* CliPipelineTest::dir_ = nullptr;
std::vector<Outcome> CliPipelineTest::steps_;

TEST_F(CliPipelineTest, StagesSucceedAndWriteArtifacts) {
  for (const auto& s : steps_) ASSERT_EQ(s.code, 0) << s.err;
  for (const char* f : {"ingest/usable.csv", "ingest/fetch_report.jsonl", "ingest/ingest.json",
                        "preprocess/train.csv", "preprocess/test.csv", "preprocess/vocab.json",
                        "preprocess/embeddings.f32", "preprocess/preprocess.json"}) {
    EXPECT_TRUE(fs::is_regular_file(run(f))) << f;
  }
  for (const char* t : {"text", "image", "fusion"}) {
    const std::string target = t;
    EXPECT_TRUE(fs::is_regular_file(run("train/" + target + "/bundle/bundle.json"))) << t;
    EXPECT_TRUE(fs::is_regular_file(run("train/" + target + "/loss.csv"))) << t;
    EXPECT_TRUE(fs::is_regular_file(run("train/" + target + "/accuracy.csv"))) << t;
    const auto rep = json::parse(io::read_file(run("evaluate/" + target + "/report.json")));
    EXPECT_TRUE(rep["accuracy"].is_number()) << t;
    EXPECT_TRUE(fs::is_regular_file(run("evaluate/" + target + "/confusion.json"))) << t;
    EXPECT_TRUE(fs::is_regular_file(run("evaluate/" + target + "/predictions.jsonl"))) << t;
  }
  const auto history = json::parse(io::read_file(run("train/fusion/history.json")));
  EXPECT_EQ(history.size(), 2u);
}

TEST_F(CliPipelineTest, EffectiveConfigSnapshot) {
  const auto snap = io::read_file(run("train/fusion/run_config.ini"));
  EXPECT_NE(snap.find("epochs=2"), std::string::npos) << snap;
  EXPECT_NE(snap.find("batch-size=8"), std::string::npos) << snap;
  EXPECT_NE(snap.find("vector-size=16"), std::string::npos) << snap;
  EXPECT_TRUE(fs::is_regular_file(run("ingest/run_config.ini")));
  EXPECT_TRUE(fs::is_regular_file(run("preprocess/run_config.ini")));
  EXPECT_TRUE(fs::is_regular_file(run("evaluate/fusion/run_config.ini")));
}

TEST_F(CliPipelineTest, PrecedenceCliOverConfigOverEnvironment) {
  TempDir scratch;
  const std::string base = common(*dir_) + " --target text";
  auto epochs = [&] {
    return json::parse(io::read_file(run("train/text/history.json"))).size();
  };
  ASSERT_EQ(vartha(scratch, "train" + base, "VARTHA_EPOCHS=3").code, 0);
  EXPECT_EQ(epochs(), 3u);
  const std::string cfg = " --config " + (*dir_ / "run.ini").string();
  ASSERT_EQ(vartha(scratch, "train" + base + cfg, "VARTHA_EPOCHS=3").code, 0);
  EXPECT_EQ(epochs(), 2u);
  ASSERT_EQ(vartha(scratch, "train" + base + cfg + " --epochs 1", "VARTHA_EPOCHS=3").code, 0);
  EXPECT_EQ(epochs(), 1u);
}

TEST_F(CliPipelineTest, PredictPrintsResponse) {
  const auto rec = testing::fixture_manifest("manifest_16.csv")[0];
  TempDir scratch;
  const auto image = testing::fixture_images() / rec.image_name;
  const auto o = vartha(scratch, "predict --headline '" + rec.headline + "' --image " + image.string() + common(*dir_));
  ASSERT_EQ(o.code, 0) << o.err;
  const auto j = json::parse(o.out);
  EXPECT_TRUE(j["label"] == "fake" || j["label"] == "not_fake");
  EXPECT_NEAR(j["probabilities"]["fake"].get<double>() + j["probabilities"]["not_fake"].get<double>(), 1.0, 1e-9);
  const auto bundle = json::parse(io::read_file(run("train/fusion/bundle/bundle.json")));
  EXPECT_EQ(j["model_version"], bundle["version"]);
  EXPECT_TRUE(j["latency_ms"].is_number());

  const auto missing = vartha(scratch, "predict --headline x --image /nonexistent.png" + common(*dir_));
  EXPECT_EQ(missing.code, 2);
  const auto both = vartha(scratch, "predict --headline x --image " + image.string() +
                                        " --image-url https://example.com/a.png" + common(*dir_));
  EXPECT_EQ(both.code, 2);
  EXPECT_NE(both.err.find("exactly one of --image or --image-url"), std::string::npos) << both.err;
}

TEST_F(CliPipelineTest, EvaluateWithoutBundle) {
  TempDir scratch;
  const auto o = vartha(scratch, "evaluate --out " + (scratch / "empty").string() + " --manifest " +
                                     (testing::fixture_dir() / "manifest_16.csv").string());
  EXPECT_EQ(o.code, 2);
  EXPECT_NE(o.err.find("--bundle: no bundle"), std::string::npos) << o.err;
}

}  // namespace
}  // namespace vartha::cli
