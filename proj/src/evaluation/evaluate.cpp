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

#include <numeric>

#include "vartha/error.hpp"
#include "vartha/evaluation.hpp"
#include "vartha/io.hpp"

namespace vartha::eval {

Evaluation evaluate_encoded(const models::ModelBundle& bundle, const models::EncodedSet& set) {
  if (set.size() == 0) throw Error(ErrorCode::kEmptySplit, "no usable records to evaluate");
  Evaluation ev;
  ev.model_version = bundle.version;
  std::vector<int> truth, predicted;
  std::vector<std::size_t> idx;
  for (std::size_t start = 0; start < set.size(); start += 64) {
    idx.resize(std::min<std::size_t>(64, set.size() - start));
    std::iota(idx.begin(), idx.end(), start);
    const nn::Matrix p = bundle.network.predict_proba(set.batch(idx));
    for (std::size_t k = 0; k < idx.size(); ++k) {
      const auto b = static_cast<Eigen::Index>(k);
      RecordPrediction rp;
      rp.record_id = set.record_ids[idx[k]];
      rp.truth = set.labels[idx[k]];
      rp.probabilities = {p(0, b), p(1, b)};
      rp.predicted = p(1, b) > p(0, b) ? 1 : 0;
      truth.push_back(rp.truth);
      predicted.push_back(rp.predicted);
      ev.predictions.push_back(std::move(rp));
    }
  }
  ev.confusion = confusion(truth, predicted);
  ev.report = report(ev.confusion);
  return ev;
}

Evaluation evaluate_bundle(const models::ModelBundle& bundle, std::span<const corpus::NewsRecord> records,
                           const training::FeatureSource& features, const fs::path& out_dir) {
  const bool needs_image = bundle.network.target() != models::Target::kText;
  if (needs_image && !features) {
    throw Error(ErrorCode::kExtractorUnavailable, "the bundle needs image features but none are available");
  }
  std::vector<training::Exclusion> excluded;
  const auto set = training::encode_records(records, bundle.vocab, bundle.max_len,
                                            needs_image ? features : training::FeatureSource{}, &excluded);
  if (set.size() == 0) {
    throw Error(ErrorCode::kEmptySplit,
                "all " + std::to_string(records.size()) + " records were excluded from evaluation");
  }
  auto ev = evaluate_encoded(bundle, set);
  ev.excluded = std::move(excluded);
  if (!out_dir.empty()) write_evaluation(ev, out_dir);
  return ev;
}

void write_evaluation(const Evaluation& ev, const fs::path& out_dir) {
  fs::create_directories(out_dir);
  auto rep = ev.report.to_json();
  rep["model_version"] = ev.model_version;
  rep["excluded"] = ev.excluded.size();
  rep["evaluated"] = ev.predictions.size();
  io::write_file_atomic(out_dir / "report.json", rep.dump(2) + "\n");
  io::write_file_atomic(out_dir / "confusion.json", to_json(ev.confusion).dump(2) + "\n");

  std::string lines;
  for (const auto& p : ev.predictions) {
    lines += nlohmann::json{{"record_id", p.record_id},
                            {"truth", p.truth},
                            {"predicted", p.predicted},
                            {"probabilities", {{"fake", p.probabilities[0]}, {"not_fake", p.probabilities[1]}}}}
                 .dump() +
             "\n";
  }
  for (const auto& e : ev.excluded) {
    lines += nlohmann::json{{"record_id", e.record_id}, {"excluded", e.reason}}.dump() + "\n";
  }
  io::write_file_atomic(out_dir / "predictions.jsonl", lines);
}

}  // namespace vartha::eval
