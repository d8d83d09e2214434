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

#ifndef VARTHA_TRAINING_HPP_
#define VARTHA_TRAINING_HPP_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "vartha/corpus.hpp"
#include "vartha/imagepipe.hpp"
#include "vartha/models.hpp"
#include "vartha/nn.hpp"
#include "vartha/textpipe.hpp"

namespace vartha::training {

namespace fs = std::filesystem;

struct TrainConfig {
  std::size_t epochs = 10;
  std::size_t batch_size = 32;
  nn::Adam::Options adam;
  std::uint64_t seed = 42;
  models::Target target = models::Target::kFusion;
  models::FusionMode fusion_mode = models::FusionMode::kPenultimate;
  models::InputNorm image_norm = models::InputNorm::kL2;
  std::size_t max_len = 32;
  std::size_t embed_dim = 300;
  bool trainable_embeddings = true;
  // Fusion only: start the branches from separately trained bundles and
  // optionally keep them fixed.
  std::optional<fs::path> text_init;
  std::optional<fs::path> image_init;
  bool freeze_branches = false;

  // Throws InvalidArgument.
  void validate() const;
  nlohmann::json to_json() const;
};

// ---------------------------------------------------------------------------
// Preprocessing

enum class AlignMode { kFeatureLength, kMaxLen };

struct PreprocessOptions {
  text::Word2VecParams word2vec;
  std::size_t max_len_cap = 32;
  std::optional<fs::path> pretrained_vectors;  // word2vec text format
  fs::path image_dir = "cache/images";
  fs::path feature_cache_dir = "cache/features";
  fs::path extractor_weights;
  // kMaxLen pads/truncates features to max_len, a literal but lossy reading
  // kept for comparison.
  AlignMode align = AlignMode::kFeatureLength;
};

struct Exclusion {
  std::string record_id;  // image_name
  std::string reason;
};

/// Features for one record, or an exception when they cannot be produced.
using FeatureSource = std::function<std::vector<float>(const corpus::NewsRecord&)>;

/// Cached-or-extracted VGG-16 features, aligned to `length`. `cache` and
/// `extractor` must outlive the returned source; a null extractor reads the
/// cache only.
FeatureSource vgg_feature_source(const image::FeatureCache& cache, const image::Vgg16Extractor* extractor,
                                 fs::path image_dir, std::size_t length);

/// Encodes records into model inputs. Records whose features cannot be
/// produced are skipped and reported in `excluded`. A null feature source
/// yields an empty feature matrix.
models::EncodedSet encode_records(std::span<const corpus::NewsRecord> records, const text::Vocab& vocab,
                                  std::size_t max_len, const FeatureSource& features,
                                  std::vector<Exclusion>* excluded = nullptr);

struct Preprocessed {
  corpus::DatasetSplit split;  // excluded records removed
  text::EmbeddingModel embeddings;
  std::size_t max_len = 32;
  std::size_t feature_length = image::kFeatureLength;
  models::ExtractorInfo extractor;
  models::EncodedSet train, test;
  std::vector<Exclusion> excluded;
  double test_oov_rate = 0.0;

  nlohmann::json summary() const;
};

/// Vocabulary, embeddings and max_len come from the training half only.
/// Throws EmptySplit when a half has no usable records left.
Preprocessed preprocess(const corpus::DatasetSplit& split, const PreprocessOptions& options);

// ---------------------------------------------------------------------------
// Training

struct TrainingData {
  models::EncodedSet train;
  models::EncodedSet validation;  // may be empty
  text::EmbeddingModel embeddings;
  std::size_t max_len = 32;
  models::ExtractorInfo extractor;
  nlohmann::json config;  // snapshot stored in the bundle
};

struct TrainResult {
  models::ModelBundle bundle;
  std::vector<models::EpochRecord> history;
  double initial_loss = 0.0;  // training-set loss before the first update
};

using EpochCallback = std::function<void(const models::EpochRecord&)>;

/// Mini-batch Adam for exactly config.epochs epochs. The batch order of
/// epoch e is a shuffle seeded with seed + e. When out_dir is non-empty the
/// bundle goes to out_dir/bundle and the curves next to it.
/// Throws EmptySplit and NonFiniteLoss.
TrainResult train(const TrainingData& data, const TrainConfig& config, const fs::path& out_dir = {},
                  const EpochCallback& on_epoch = {});

void save_checkpoint(models::ModelBundle& bundle, const fs::path& dir);
models::ModelBundle load_checkpoint(const fs::path& dir);

/// history.json plus loss.csv and accuracy.csv (columns epoch,train,val).
/// Throws InvalidArgument on an empty history.
void emit_curves(std::span<const models::EpochRecord> history, const fs::path& out_dir);

// Accuracy of argmax predictions in inference mode.
double accuracy(const models::Network& net, const models::EncodedSet& set);

}  // namespace vartha::training

#endif  // VARTHA_TRAINING_HPP_
