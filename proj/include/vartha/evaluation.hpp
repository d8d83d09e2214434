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

#ifndef VARTHA_EVALUATION_HPP_
#define VARTHA_EVALUATION_HPP_

#include <array>
#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "vartha/corpus.hpp"
#include "vartha/models.hpp"
#include "vartha/training.hpp"

namespace vartha::eval {

namespace fs = std::filesystem;

// Report order, which is also the row/column order of ConfusionMatrix.
inline constexpr std::array<corpus::Label, 2> kClassOrder = {corpus::Label::kNotFake, corpus::Label::kFake};

/// counts[i][j]: true class kClassOrder[i] predicted as kClassOrder[j].
struct ConfusionMatrix {
  std::array<std::array<std::size_t, 2>, 2> counts{};

  std::size_t total() const;
  std::size_t support(std::size_t row) const { return counts[row][0] + counts[row][1]; }
  bool operator==(const ConfusionMatrix&) const = default;
};

struct ClassMetrics {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::size_t support = 0;
};

struct ClassificationReport {
  std::array<ClassMetrics, 2> classes;  // kClassOrder
  double accuracy = 0.0;
  ClassMetrics macro_avg;
  ClassMetrics weighted_avg;
  std::size_t total = 0;

  nlohmann::json to_json() const;
  // Plain-text table, values rounded to two decimals.
  std::string to_table() const;
};

/// Labels are 0 (fake) or 1 (not fake). Throws LengthMismatch for unequal
/// lengths and InvalidArgument for other values.
ConfusionMatrix confusion(std::span<const int> truth, std::span<const int> predicted);

/// Empty denominators give 0. Throws EmptyMatrix when total() == 0.
ClassificationReport report(const ConfusionMatrix& cm);

nlohmann::json to_json(const ConfusionMatrix& cm);

struct RecordPrediction {
  std::string record_id;
  int truth = 0;
  int predicted = 0;
  std::array<double, 2> probabilities{};  // {fake, not_fake}
};

struct Evaluation {
  ClassificationReport report;
  ConfusionMatrix confusion;
  std::vector<RecordPrediction> predictions;
  std::vector<training::Exclusion> excluded;
  std::string model_version;
};

/// Inference-mode scoring of `records`. Records whose inputs cannot be
/// built are excluded and counted; throws EmptySplit when none remain.
/// When out_dir is non-empty writes report.json, confusion.json and
/// predictions.jsonl there.
Evaluation evaluate_bundle(const models::ModelBundle& bundle, std::span<const corpus::NewsRecord> records,
                           const training::FeatureSource& features, const fs::path& out_dir = {});

// Scores an already encoded set.
Evaluation evaluate_encoded(const models::ModelBundle& bundle, const models::EncodedSet& set);

void write_evaluation(const Evaluation& ev, const fs::path& out_dir);

}  // namespace vartha::eval

#endif  // VARTHA_EVALUATION_HPP_
