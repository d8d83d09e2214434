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

#include <cstdio>

#include "vartha/error.hpp"
#include "vartha/evaluation.hpp"

namespace vartha::eval {
namespace {

double ratio(std::size_t num, std::size_t den) {
  return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
}

// Position of a dataset label in kClassOrder.
std::size_t slot(int label) {
  if (label == static_cast<int>(corpus::Label::kNotFake)) return 0;
  if (label == static_cast<int>(corpus::Label::kFake)) return 1;
  throw Error(ErrorCode::kInvalidArgument, "label " + std::to_string(label) + " is not 0 or 1");
}

nlohmann::json metrics_json(const ClassMetrics& m) {
  return {{"precision", m.precision}, {"recall", m.recall}, {"f1", m.f1}, {"support", m.support}};
}

}  // namespace

std::size_t ConfusionMatrix::total() const { return support(0) + support(1); }

ConfusionMatrix confusion(std::span<const int> truth, std::span<const int> predicted) {
  if (truth.size() != predicted.size()) {
    throw Error(ErrorCode::kLengthMismatch, std::to_string(truth.size()) + " true labels vs " +
                                                std::to_string(predicted.size()) + " predictions");
  }
  ConfusionMatrix cm;
  for (std::size_t i = 0; i < truth.size(); ++i) ++cm.counts[slot(truth[i])][slot(predicted[i])];
  return cm;
}

ClassificationReport report(const ConfusionMatrix& cm) {
  ClassificationReport r;
  r.total = cm.total();
  if (r.total == 0) throw Error(ErrorCode::kEmptyMatrix, "confusion matrix is empty");
  for (std::size_t c = 0; c < 2; ++c) {
    auto& m = r.classes[c];
    const std::size_t tp = cm.counts[c][c];
    m.support = cm.support(c);
    m.precision = ratio(tp, cm.counts[0][c] + cm.counts[1][c]);
    m.recall = ratio(tp, m.support);
    m.f1 = m.precision + m.recall == 0.0 ? 0.0 : 2.0 * m.precision * m.recall / (m.precision + m.recall);
  }
  r.accuracy = ratio(cm.counts[0][0] + cm.counts[1][1], r.total);

  const auto n = static_cast<double>(r.total);
  r.macro_avg.support = r.weighted_avg.support = r.total;
  for (const auto& m : r.classes) {
    const double w = static_cast<double>(m.support) / n;
    r.macro_avg.precision += m.precision / 2.0;
    r.macro_avg.recall += m.recall / 2.0;
    r.macro_avg.f1 += m.f1 / 2.0;
    r.weighted_avg.precision += w * m.precision;
    r.weighted_avg.recall += w * m.recall;
    r.weighted_avg.f1 += w * m.f1;
  }
  return r;
}

nlohmann::json ClassificationReport::to_json() const {
  return {{"not_fake", metrics_json(classes[0])},
          {"fake", metrics_json(classes[1])},
          {"accuracy", accuracy},
          {"macro_avg", metrics_json(macro_avg)},
          {"weighted_avg", metrics_json(weighted_avg)},
          {"total", total}};
}

std::string ClassificationReport::to_table() const {
  std::string out;
  char line[128];
  std::snprintf(line, sizeof line, "%12s %10s %9s %9s %9s\n\n", "", "precision", "recall", "f1-score", "support");
  out += line;
  auto row = [&](const char* name, const ClassMetrics& m) {
    std::snprintf(line, sizeof line, "%12s %10.2f %9.2f %9.2f %9zu\n", name, m.precision, m.recall, m.f1,
                  m.support);
    out += line;
  };
  row("Not fake", classes[0]);
  row("Fake", classes[1]);
  out += "\n";
  std::snprintf(line, sizeof line, "%12s %10s %9s %9.2f %9zu\n", "accuracy", "", "", accuracy, total);
  out += line;
  row("macro avg", macro_avg);
  row("weighted avg", weighted_avg);
  return out;
}

nlohmann::json to_json(const ConfusionMatrix& cm) {
  return {{"labels", {"not_fake", "fake"}},
          {"rows", "true class"},
          {"columns", "predicted class"},
          {"matrix", {{cm.counts[0][0], cm.counts[0][1]}, {cm.counts[1][0], cm.counts[1][1]}}}};
}

}  // namespace vartha::eval
