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

#ifndef VARTHA_IMAGEPIPE_HPP_
#define VARTHA_IMAGEPIPE_HPP_

#include <Eigen/Core>

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace vartha::image {

namespace fs = std::filesystem;

inline constexpr int kInputSize = 224;
inline constexpr int kChannels = 3;
// ImageNet channel means in B, G, R order, the input convention of the
// pretrained conv base.
inline constexpr std::array<float, 3> kBgrMean = {103.939f, 116.779f, 123.68f};
// Five 2x poolings take 224 to 7; the last block is 512 deep.
inline constexpr std::size_t kFeatureLength = 7 * 7 * 512;

// 224x224x3, height-major then width then channel (B, G, R), mean-subtracted.
struct PreparedImage {
  std::vector<float> tensor;

  float at(int y, int x, int c) const {
    return tensor[(static_cast<std::size_t>(y) * kInputSize + x) * kChannels + c];
  }
};

/// Decodes JPEG/PNG/WebP, resizes bilinearly to 224x224 without preserving
/// aspect ratio, and subtracts kBgrMean. Throws NotAnImage for unrecognized
/// content and DecodeError for corrupt or truncated files.
PreparedImage prepare_image(const fs::path& path);
PreparedImage prepare_image_bytes(std::string_view bytes);

struct ImageFeatureVector {
  std::vector<float> values;
  std::string source_image;
};

/// VGG-16 convolutional base (13 conv layers, 5 max-pools, no classifier).
/// Immutable after load; extract() is safe to call concurrently.
///
/// Weights file layout (little-endian):
///   "VGG16W01"                       8-byte magic
///   u32 name_length, name bytes      free-form label, e.g. "keras-imagenet"
///   u32 layer_count (= 13)
///   per layer: u32 in, u32 out, f32 kernel[3*3*in*out] ordered
///              (ky, kx, in, out) as in Keras, f32 bias[out]
class Vgg16Extractor {
 public:
  /// Throws ExtractorUnavailable when the file is missing or malformed.
  static Vgg16Extractor load(const fs::path& weights_path);

  // "<name>@<first 12 hex of the file's SHA-1>"
  const std::string& version() const { return version_; }
  std::size_t feature_length() const { return kFeatureLength; }

  ImageFeatureVector extract(const PreparedImage& image, std::string source_image = {}) const;

  // SHA-1 over the in-memory parameters.
  std::string parameter_digest() const;

 private:
  struct ConvLayer {
    int in = 0;
    int out = 0;
    Eigen::MatrixXf kernel;  // out x (9 * in)
    Eigen::VectorXf bias;
  };

  std::vector<ConvLayer> layers_;
  std::string version_;
};

// Per-layer (in, out) channels of the conv base.
const std::array<std::array<int, 2>, 13>& vgg16_conv_shapes();

struct ConvWeights {
  std::vector<float> kernel;  // (ky, kx, in, out)
  std::vector<float> bias;
};

void write_vgg16_weights(const fs::path& path, std::string_view name,
                         std::span<const ConvWeights> layers);

/// He-normal random conv base for offline fixtures and tests. Not a
/// substitute for pretrained weights.
void write_synthetic_vgg16_weights(const fs::path& path, std::uint64_t seed);

/// Right-pads with zeros or truncates to `target` entries.
ImageFeatureVector align_feature_length(ImageFeatureVector vec, std::size_t target);

/// On-disk feature store keyed by (image name, extractor version, length).
/// Layout: <root>/<version>/<length>/<image_name>.f32 plus a .json sidecar.
class FeatureCache {
 public:
  FeatureCache(fs::path root, std::string extractor_version, std::size_t length);

  void put(const ImageFeatureVector& vec) const;
  ImageFeatureVector get(std::string_view image_name) const;  // throws CacheMiss
  bool contains(std::string_view image_name) const;

  const std::string& extractor_version() const { return version_; }
  std::size_t length() const { return length_; }

 private:
  fs::path blob_path(std::string_view image_name) const;

  fs::path root_;
  std::string version_;
  std::size_t length_;
};

// Reads from the cache, extracting and storing on a miss.
ImageFeatureVector cached_features(const FeatureCache& cache, const Vgg16Extractor& extractor,
                                   const fs::path& image_path, const std::string& image_name);

}  // namespace vartha::image

#endif  // VARTHA_IMAGEPIPE_HPP_
