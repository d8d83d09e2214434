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

#include "vartha/error.hpp"
#include "vartha/models.hpp"

namespace vartha::models {

nlohmann::json to_json(const Prediction& p) {
  return {{"label", p.label == corpus::Label::kFake ? "fake" : "not_fake"},
          {"probabilities", {{"fake", p.probabilities[0]}, {"not_fake", p.probabilities[1]}}},
          {"model_version", p.model_version}};
}

Prediction predict(const ModelBundle& bundle, std::string_view headline,
                   std::span<const float> image_features) {
  const auto& net = bundle.network;
  Batch batch;
  batch.labels = {0};
  if (net.target() != Target::kImage) {
    auto enc = text::encode(headline, bundle.vocab, bundle.max_len);
    batch.ids.push_back(std::move(enc.ids));
    batch.lengths.push_back(enc.true_length);
  }
  if (net.target() != Target::kText) {
    const auto want = static_cast<std::size_t>(net.image_spec().input_len);
    image::ImageFeatureVector vec{{image_features.begin(), image_features.end()}, {}};
    if (vec.values.size() != want) vec = image::align_feature_length(std::move(vec), want);
    batch.image = Eigen::Map<const Eigen::VectorXf>(vec.values.data(), static_cast<Eigen::Index>(want))
                      .cast<double>();
  }
  const Matrix probs = net.predict_proba(batch);
  Prediction p;
  p.probabilities = {probs(0, 0), probs(1, 0)};
  p.label = probs(1, 0) > probs(0, 0) ? corpus::Label::kNotFake : corpus::Label::kFake;
  p.model_version = bundle.version;
  return p;
}

Predictor::Predictor(ModelBundle bundle, std::optional<fs::path> extractor_weights)
    : bundle_(std::move(bundle)) {
  if (!uses_image()) return;
  const fs::path path = extractor_weights ? *extractor_weights : fs::path(bundle_.extractor.weights_path);
  try {
    auto ex = image::Vgg16Extractor::load(path);
    if (!bundle_.extractor.version.empty() && ex.version() != bundle_.extractor.version) {
      extractor_error_ = "extractor '" + ex.version() + "' differs from the one the model was trained with ('" +
                         bundle_.extractor.version + "')";
      return;
    }
    extractor_ = std::move(ex);
  } catch (const Error& e) {
    extractor_error_ = e.what();
  }
}

Prediction Predictor::predict(std::string_view headline, std::span<const float> image_features) const {
  return models::predict(bundle_, headline, image_features);
}

Prediction Predictor::from_prepared(std::string_view headline, const image::PreparedImage& img) const {
  if (!extractor_) throw Error(ErrorCode::kExtractorUnavailable, extractor_error_);
  const auto vec = extractor_->extract(img);
  return predict(headline, vec.values);
}

Prediction Predictor::predict_file(std::string_view headline, const fs::path& image_path) const {
  if (!uses_image()) return predict(headline, {});
  if (!extractor_) throw Error(ErrorCode::kExtractorUnavailable, extractor_error_);
  return from_prepared(headline, image::prepare_image(image_path));
}

Prediction Predictor::predict_bytes(std::string_view headline, std::string_view image_bytes) const {
  if (!uses_image()) return predict(headline, {});
  if (!extractor_) throw Error(ErrorCode::kExtractorUnavailable, extractor_error_);
  return from_prepared(headline, image::prepare_image_bytes(image_bytes));
}

}  // namespace vartha::models
