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

#include <cmath>

#include <gtest/gtest.h>

#include "test_support.hpp"
#include "vartha/evaluation.hpp"
#include "vartha/io.hpp"

namespace vartha::eval {
namespace {

using testing::TempDir;
using testing::thrown_code;

constexpr int kFake = 0;
constexpr int kNotFake = 1;

double round2(double v) { return std::round(v * 100) / 100; }

TEST(ReportTest, PublishedTable) {
  ConfusionMatrix cm;
  cm.counts = {{{176, 108}, {75, 193}}};
  const auto r = report(cm);
  EXPECT_NEAR(round2(r.classes[0].precision), 0.70, 0.005);
  EXPECT_NEAR(round2(r.classes[0].recall), 0.62, 0.005);
  EXPECT_NEAR(round2(r.classes[0].f1), 0.66, 0.005);
  EXPECT_EQ(r.classes[0].support, 284u);
  EXPECT_NEAR(round2(r.classes[1].precision), 0.64, 0.005);
  EXPECT_NEAR(round2(r.classes[1].recall), 0.72, 0.005);
  EXPECT_NEAR(round2(r.classes[1].f1), 0.68, 0.005);
  EXPECT_EQ(r.classes[1].support, 268u);
  EXPECT_NEAR(round2(r.accuracy), 0.67, 0.005);
  for (const auto* avg : {&r.macro_avg, &r.weighted_avg}) {
    EXPECT_NEAR(round2(avg->precision), 0.67, 0.005);
    EXPECT_NEAR(round2(avg->recall), 0.67, 0.005);
    EXPECT_NEAR(round2(avg->f1), 0.67, 0.005);
    EXPECT_EQ(avg->support, 552u);
  }
  const auto table = r.to_table();
  EXPECT_NE(table.find("Not fake       0.70      0.62      0.66       284"), std::string::npos) << table;
  const auto acc = table.find("accuracy");
  ASSERT_NE(acc, std::string::npos) << table;
  const auto acc_line = table.substr(acc, table.find('\n', acc) - acc);
  EXPECT_NE(acc_line.find(" 0.67 "), std::string::npos) << acc_line;
  EXPECT_TRUE(acc_line.ends_with(" 552")) << acc_line;
}

// Metrics counted straight from the label lists, never through a matrix.
struct Direct {
  double precision[2], recall[2], f1[2], support[2], accuracy;
};

Direct direct(const std::vector<int>& truth, const std::vector<int>& pred) {
  Direct d{};
  const int order[2] = {kNotFake, kFake};
  double correct = 0;
  for (std::size_t i = 0; i < truth.size(); ++i) correct += truth[i] == pred[i];
  d.accuracy = correct / static_cast<double>(truth.size());
  for (int k = 0; k < 2; ++k) {
    const int c = order[k];
    double tp = 0, predicted = 0, actual = 0;
    for (std::size_t i = 0; i < truth.size(); ++i) {
      tp += truth[i] == c && pred[i] == c;
      predicted += pred[i] == c;
      actual += truth[i] == c;
    }
    d.precision[k] = predicted ? tp / predicted : 0;
    d.recall[k] = actual ? tp / actual : 0;
    d.f1[k] = d.precision[k] + d.recall[k] > 0 ? 2 * d.precision[k] * d.recall[k] / (d.precision[k] + d.recall[k]) : 0;
    d.support[k] = actual;
  }
  return d;
}

TEST(ReportTest, AgreesWithDirectCountsOnRandomData) {
  Rng rng(2024);
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t n = 1 + rng.below(60);
    const double bias = rng.uniform();
    std::vector<int> truth(n), pred(n);
    for (std::size_t i = 0; i < n; ++i) {
      truth[i] = static_cast<int>(rng.below(2));
      pred[i] = rng.uniform() < bias ? truth[i] : static_cast<int>(rng.below(2));
    }
    const auto r = report(confusion(truth, pred));
    const auto d = direct(truth, pred);
    ASSERT_NEAR(r.accuracy, d.accuracy, 1e-12);
    double macro_f1 = 0, weighted_f1 = 0;
    for (int k = 0; k < 2; ++k) {
      ASSERT_NEAR(r.classes[k].precision, d.precision[k], 1e-12);
      ASSERT_NEAR(r.classes[k].recall, d.recall[k], 1e-12);
      ASSERT_NEAR(r.classes[k].f1, d.f1[k], 1e-12);
      ASSERT_EQ(static_cast<double>(r.classes[k].support), d.support[k]);
      macro_f1 += d.f1[k] / 2;
      weighted_f1 += d.f1[k] * d.support[k] / static_cast<double>(n);
    }
    ASSERT_NEAR(r.macro_avg.f1, macro_f1, 1e-12);
    ASSERT_NEAR(r.weighted_avg.f1, weighted_f1, 1e-12);
    ASSERT_NEAR(r.weighted_avg.recall, d.accuracy, 1e-12);
  }
}

TEST(ConfusionTest, DiagonalAntiDiagonalEmpty) {
  const std::vector<int> truth = {0, 1, 0, 1, 0, 1, 0, 1, 0, 1};
  auto cm = confusion(truth, truth);
  EXPECT_EQ(cm.counts[0][0], 5u);
  EXPECT_EQ(cm.counts[1][1], 5u);
  EXPECT_EQ(cm.counts[0][1] + cm.counts[1][0], 0u);

  std::vector<int> flipped;
  for (int t : truth) flipped.push_back(1 - t);
  cm = confusion(truth, flipped);
  EXPECT_EQ(cm.counts[0][1], 5u);
  EXPECT_EQ(cm.counts[1][0], 5u);
  EXPECT_EQ(cm.counts[0][0] + cm.counts[1][1], 0u);

  EXPECT_EQ(confusion({}, {}), ConfusionMatrix{});
  EXPECT_EQ(thrown_code([] { report(ConfusionMatrix{}); }), ErrorCode::kEmptyMatrix);
}

TEST(ConfusionTest, RowsAreNotFakeThenFake) {
  const std::vector<int> truth = {kNotFake, kFake, kFake};
  const std::vector<int> pred = {kFake, kFake, kFake};
  const auto cm = confusion(truth, pred);
  EXPECT_EQ(cm.counts[0][1], 1u);  // not fake predicted fake
  EXPECT_EQ(cm.counts[1][1], 2u);
  const auto j = to_json(cm);
  EXPECT_EQ(j["labels"][0], "not_fake");
  EXPECT_EQ(j["matrix"][1][1], 2);
}

TEST(ConfusionTest, Errors) {
  const std::vector<int> a = {0, 1}, b = {0}, c = {0, 2};
  EXPECT_EQ(thrown_code([&] { confusion(a, b); }), ErrorCode::kLengthMismatch);
  EXPECT_EQ(thrown_code([&] { confusion(a, c); }), ErrorCode::kInvalidArgument);
}

TEST(ReportTest, PerfectAndNeverPredicted) {
  ConfusionMatrix perfect;
  perfect.counts = {{{4, 0}, {0, 6}}};
  const auto p = report(perfect);
  for (const auto& m : {p.classes[0], p.classes[1], p.macro_avg, p.weighted_avg}) {
    EXPECT_EQ(m.precision, 1.0);
    EXPECT_EQ(m.recall, 1.0);
    EXPECT_EQ(m.f1, 1.0);
  }
  EXPECT_EQ(p.accuracy, 1.0);

  ConfusionMatrix all_fake;
  all_fake.counts = {{{0, 3}, {0, 7}}};
  const auto r = report(all_fake);
  EXPECT_EQ(r.classes[0].precision, 0.0);
  EXPECT_EQ(r.classes[0].f1, 0.0);
  EXPECT_DOUBLE_EQ(r.classes[1].precision, 0.7);
  EXPECT_DOUBLE_EQ(r.accuracy, 0.7);
}

TEST(ReportTest, CoinFlipNearHalf) {
  Rng rng(99);
  std::vector<int> truth, pred;
  for (int i = 0; i < 100; ++i) {
    truth.push_back(i % 2);
    pred.push_back(static_cast<int>(rng.below(2)));
  }
  EXPECT_NEAR(report(confusion(truth, pred)).accuracy, 0.5, 0.15);
}

class EvaluateBundleTest : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    const auto records = testing::fixture_manifest("manifest_16.csv");
    const auto data = testing::training_data(records, {});
    training::TrainConfig cfg;
    cfg.epochs = 50;
    result_ = new training::TrainResult(training::train(data, cfg));
    TempDir dir;
    models::save_bundle(result_->bundle, dir.path());  // assigns the version
  }
  static void TearDownTestSuite() { delete result_; }
  static training::TrainResult* result_;
};
training::TrainResult* EvaluateBundleTest::result_ = nullptr;

TEST_F(EvaluateBundleTest, OverfitTrainingDataScoresHigh) {
  const auto records = testing::fixture_manifest("manifest_16.csv");
  const auto ev = evaluate_bundle(result_->bundle, records, testing::fixture_features());
  EXPECT_GE(ev.report.accuracy, 0.95);
  EXPECT_EQ(ev.report.total, 16u);
  EXPECT_EQ(ev.model_version, result_->bundle.version);
  ASSERT_EQ(ev.predictions.size(), 16u);
  for (std::size_t i = 0; i < records.size(); ++i) {
    EXPECT_EQ(ev.predictions[i].record_id, records[i].image_name);
    EXPECT_EQ(ev.predictions[i].truth, static_cast<int>(records[i].label));
  }
}

TEST_F(EvaluateBundleTest, ExclusionsAndFiles) {
  auto records = testing::fixture_manifest();
  records.push_back(corpus::make_record("ചിത്രമില്ല", "https://n.example/x", "https://i.example/gone.jpg",
                                        corpus::Label::kFake));
  TempDir out;
  const auto ev = evaluate_bundle(result_->bundle, records, testing::fixture_features(), out.path());
  EXPECT_EQ(ev.excluded.size(), 1u);
  EXPECT_EQ(ev.report.total, records.size() - 1);

  const auto rep = nlohmann::json::parse(io::read_file(out / "report.json"));
  EXPECT_EQ(rep["excluded"], 1);
  EXPECT_EQ(rep["evaluated"], records.size() - 1);
  EXPECT_DOUBLE_EQ(rep["accuracy"].get<double>(), ev.report.accuracy);
  EXPECT_EQ(rep["model_version"], result_->bundle.version);
  const auto cm = nlohmann::json::parse(io::read_file(out / "confusion.json"));
  EXPECT_EQ(cm["matrix"][0][0].get<std::size_t>() + cm["matrix"][0][1].get<std::size_t>() +
                cm["matrix"][1][0].get<std::size_t>() + cm["matrix"][1][1].get<std::size_t>(),
            records.size() - 1);
  const auto preds = io::read_file(out / "predictions.jsonl");
  EXPECT_EQ(static_cast<std::size_t>(std::count(preds.begin(), preds.end(), '\n')), records.size());
  EXPECT_NE(preds.find("\"excluded\""), std::string::npos);
}

TEST_F(EvaluateBundleTest, NothingLeft) {
  const std::vector<corpus::NewsRecord> gone = {corpus::make_record(
      "ചിത്രമില്ല", "https://n.example/x", "https://i.example/gone.jpg", corpus::Label::kFake)};
  EXPECT_EQ(thrown_code([&] { evaluate_bundle(result_->bundle, gone, testing::fixture_features()); }),
            ErrorCode::kEmptySplit);
}

}  // namespace
}  // namespace vartha::eval
