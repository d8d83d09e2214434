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

#ifndef VARTHA_MODELS_HPP_
#define VARTHA_MODELS_HPP_

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "vartha/corpus.hpp"
#include "vartha/imagepipe.hpp"
#include "vartha/nn.hpp"
#include "vartha/textpipe.hpp"

namespace vartha::models {

namespace fs = std::filesystem;
using nn::Matrix;

enum class Target { kText, kImage, kFusion };
enum class FusionMode { kPenultimate, kSoftmaxOutput };
// Per-sample scaling of image features before the first dense layer.
enum class InputNorm { kNone, kL2 };

std::string_view to_string(Target target);
std::string_view to_string(FusionMode mode);
Target parse_target(std::string_view s);          // "text" | "image" | "fusion"
FusionMode parse_fusion_mode(std::string_view s);  // "penultimate" | "softmax_output"
std::string_view to_string(InputNorm norm);
InputNorm parse_input_norm(std::string_view s);    // "l2" | "none"

inline constexpr int kNumClasses = 2;

// Embedding -> BiLSTM(lstm1, sequences) -> BiLSTM(lstm2) -> Dense(dense, relu)
//   -> Dropout -> Dense(num_classes, softmax)
struct TextBranchSpec {
  int vocab_size = 0;
  int embed_dim = 300;
  int max_len = 32;
  int lstm1_units = 128;
  int lstm2_units = 64;
  int dense_units = 64;
  double dropout = 0.5;
  int num_classes = kNumClasses;
  bool trainable_embeddings = true;

  std::size_t parameter_count() const;
};

// Flatten -> [L2 normalize] -> Dense(dense1, relu) -> Dropout
//   -> Dense(dense2, relu) -> Dense(num_classes, softmax)
struct ImageBranchSpec {
  int input_len = static_cast<int>(image::kFeatureLength);
  InputNorm input_norm = InputNorm::kL2;
  int dense1 = 256;
  double dropout = 0.5;
  int dense2 = 64;
  int num_classes = kNumClasses;

  std::size_t parameter_count() const;
};

// Concatenate -> Dense(fused_dense, relu) -> Dense(num_classes, softmax)
struct FusionSpec {
  FusionMode mode = FusionMode::kPenultimate;
  int fused_dense = 64;
  int num_classes = kNumClasses;

  int input_width(const TextBranchSpec& text, const ImageBranchSpec& image) const;
  std::size_t parameter_count(const TextBranchSpec& text, const ImageBranchSpec& image) const;
};

// A mini-batch, one sample per column (image) or entry (text, labels).
struct Batch {
  std::vector<std::vector<int>> ids;  // [sample][max_len]
  std::vector<std::size_t> lengths;
  Matrix image;  // input_len x samples; may be empty for text-only models
  std::vector<int> labels;

  std::size_t size() const { return labels.empty() ? std::max(ids.size(), static_cast<std::size_t>(image.cols())) : labels.size(); }
};

// Intermediate activations exposed for inspection and fusion.
struct BranchOutput {
  nn::Sequence lstm1;  // text only: (2*lstm1_units x batch) per step
  Matrix lstm2;        // text only: (2*lstm2_units x batch)
  Matrix penultimate;  // (64 x batch); text: after dropout
  Matrix logits;       // (num_classes x batch)
};

class TextBranch {
 public:
  struct Cache {
    nn::Embedding::Cache embedding;
    nn::BiLstm::Cache lstm1, lstm2;
    nn::Dense::Cache dense, head;
    Matrix dropout_mask;
    bool training = false;
  };

  explicit TextBranch(const TextBranchSpec& spec);

  const TextBranchSpec& spec() const { return spec_; }
  // dropout_rng == nullptr selects inference mode.
  BranchOutput forward(const Batch& batch, Rng* dropout_rng = nullptr, Cache* cache = nullptr) const;
  void backward(const Matrix& d_penultimate, const Matrix& d_logits, const Cache& cache);

  std::vector<nn::Parameter*> parameters();
  std::size_t parameter_count() const;

  nn::Embedding embedding;
  nn::BiLstm lstm1, lstm2;
  nn::Dense dense, head;

 private:
  TextBranchSpec spec_;
};

class ImageBranch {
 public:
  struct Cache {
    nn::Dense::Cache dense1, dense2, head;
    Matrix dropout_mask;
    bool training = false;
  };

  explicit ImageBranch(const ImageBranchSpec& spec);

  const ImageBranchSpec& spec() const { return spec_; }
  BranchOutput forward(const Batch& batch, Rng* dropout_rng = nullptr, Cache* cache = nullptr) const;
  void backward(const Matrix& d_penultimate, const Matrix& d_logits, const Cache& cache);

  std::vector<nn::Parameter*> parameters();
  std::size_t parameter_count() const;

  nn::Dense dense1, dense2, head;

 private:
  ImageBranchSpec spec_;
};

struct FusionHead {
  nn::Dense dense, head;
};

/// Any of the three trainable networks: a text branch, an image branch, or
/// both branches joined by a fusion head.
class Network {
 public:
  struct Cache {
    TextBranch::Cache text;
    ImageBranch::Cache image;
    BranchOutput text_out, image_out;
    Matrix text_probs, image_probs;
    nn::Dense::Cache fused, head;
  };

  struct Taps {
    BranchOutput text, image;
    Matrix fusion_input;
    Matrix probabilities;
  };

  Target target() const { return target_; }
  const TextBranchSpec& text_spec() const { return text_spec_; }
  const ImageBranchSpec& image_spec() const { return image_spec_; }
  const FusionSpec& fusion_spec() const { return fusion_spec_; }

  TextBranch* text() { return text_ ? &*text_ : nullptr; }
  ImageBranch* image() { return image_ ? &*image_ : nullptr; }
  FusionHead* fusion() { return fusion_ ? &*fusion_ : nullptr; }
  const TextBranch* text() const { return text_ ? &*text_ : nullptr; }
  const ImageBranch* image() const { return image_ ? &*image_ : nullptr; }

  Matrix logits(const Batch& batch, Rng* dropout_rng = nullptr, Cache* cache = nullptr) const;
  Matrix predict_proba(const Batch& batch) const;  // inference mode
  Taps inspect(const Batch& batch) const;          // inference mode

  // Mean cross-entropy in inference mode.
  double loss(const Batch& batch) const;

  /// Training-mode forward and backward pass. Gradients are accumulated into
  /// the parameters; returns the batch loss.
  double accumulate_gradients(const Batch& batch, Rng& dropout_rng);

  std::vector<nn::Parameter*> parameters();
  std::size_t parameter_count() const;

  // Unshaped networks with zero weights, for loading saved parameters.
  static Network skeleton(Target target, const TextBranchSpec& text, const ImageBranchSpec& image,
                          const FusionSpec& fusion);

 private:
  friend Network build_text_network(TextBranch branch);
  friend Network build_image_network(ImageBranch branch);
  friend Network build_fusion_model(TextBranch text, ImageBranch image, const FusionSpec& spec,
                                    std::uint64_t seed);

  Target target_ = Target::kFusion;
  TextBranchSpec text_spec_;
  ImageBranchSpec image_spec_;
  FusionSpec fusion_spec_;
  std::optional<TextBranch> text_;
  std::optional<ImageBranch> image_;
  std::optional<FusionHead> fusion_;
};

/// Builds a text branch whose embedding layer starts from the trained word
/// vectors (PAD column zero). Throws ShapeMismatch when the vocabulary size
/// or dimension disagrees with the branch specs.
TextBranch build_text_branch(const TextBranchSpec& spec, const text::EmbeddingModel& embeddings,
                             std::uint64_t seed);
ImageBranch build_image_branch(const ImageBranchSpec& spec, std::uint64_t seed);

Network build_text_network(TextBranch branch);
Network build_image_network(ImageBranch branch);
Network build_fusion_model(TextBranch text, ImageBranch image, const FusionSpec& spec,
                           std::uint64_t seed);

// Column b: PAD-masked steps get 0, real tokens 1. Result is (max_len x batch).
Matrix sequence_mask(const std::vector<std::size_t>& lengths, std::size_t max_len);

// ---------------------------------------------------------------------------
// Encoded examples

/// Model-ready examples: token ids, image features and labels, aligned by
/// index. Features are float32 to halve memory; batches are promoted.
struct EncodedSet {
  std::vector<std::string> record_ids;
  std::vector<std::vector<int>> ids;
  std::vector<std::size_t> lengths;
  Eigen::MatrixXf features;  // feature_length x size(); may have 0 rows
  std::vector<int> labels;

  std::size_t size() const { return labels.size(); }
  Batch batch(std::span<const std::size_t> indices) const;
  Batch all() const;
};

// ---------------------------------------------------------------------------
// Bundles

struct EpochRecord {
  std::size_t epoch = 0;  // 1-based
  double train_loss = 0.0;
  double train_accuracy = 0.0;
  std::optional<double> val_loss;
  std::optional<double> val_accuracy;
  double wall_seconds = 0.0;

  bool operator==(const EpochRecord&) const = default;
};

nlohmann::json to_json(const EpochRecord& r);
EpochRecord epoch_record_from_json(const nlohmann::json& j);

struct ExtractorInfo {
  std::string weights_path;
  std::string version;
  std::size_t native_length = image::kFeatureLength;
};

struct ModelBundle {
  std::string version;  // set by save_bundle from the weight digest
  Network network;
  text::Vocab vocab;
  nlohmann::json embedding_meta;  // dim, source, word2vec params
  std::size_t max_len = 32;
  ExtractorInfo extractor;
  nlohmann::json config;
  std::vector<EpochRecord> history;
};

inline constexpr std::string_view kBundleFormat = "vartha-bundle/1";

/// Writes bundle.json, vocab.json, embed_meta.json and weights.bin into
/// `dir`, then stores the resulting version string in bundle.version.
void save_bundle(ModelBundle& bundle, const fs::path& dir);

/// Throws CorruptBundle for missing files, unreadable metadata, or weights
/// whose names or shapes disagree with the recorded specs.
ModelBundle load_bundle(const fs::path& dir);

// ---------------------------------------------------------------------------
// Prediction

struct Prediction {
  std::array<double, 2> probabilities{};  // indexed by Label: {fake, not_fake}
  corpus::Label label = corpus::Label::kFake;
  std::string model_version;
};

nlohmann::json to_json(const Prediction& p);

/// Inference over a raw headline plus image features that already match the
/// bundle's image input length (or are aligned to it).
Prediction predict(const ModelBundle& bundle, std::string_view headline,
                   std::span<const float> image_features);

/// Owns a bundle and, when the network consumes images, the conv-base
/// extractor named in the bundle. Read-only after construction.
class Predictor {
 public:
  explicit Predictor(ModelBundle bundle, std::optional<fs::path> extractor_weights = std::nullopt);

  const ModelBundle& bundle() const { return bundle_; }
  bool uses_image() const { return bundle_.network.target() != Target::kText; }
  bool extractor_ready() const { return extractor_.has_value(); }

  Prediction predict(std::string_view headline, std::span<const float> image_features) const;
  Prediction predict_file(std::string_view headline, const fs::path& image_path) const;
  Prediction predict_bytes(std::string_view headline, std::string_view image_bytes) const;

 private:
  Prediction from_prepared(std::string_view headline, const image::PreparedImage& img) const;

  ModelBundle bundle_;
  std::optional<image::Vgg16Extractor> extractor_;
  std::string extractor_error_;
};

}  // namespace vartha::models

#endif  // VARTHA_MODELS_HPP_
