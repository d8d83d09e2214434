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

#include <cctype>

#include "json.hpp"
#include "vartha/error.hpp"
#include "vartha/imagepipe.hpp"
#include "vartha/io.hpp"

namespace vartha::image {
namespace {

// Extractor versions contain '@'; keep directory names portable.
std::string safe_component(std::string_view s) {
  std::string out;
  for (char c : s) {
    const bool ok = std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_' || c == '.';
    out.push_back(ok ? c : '_');
  }
  return out;
}

}  // namespace

FeatureCache::FeatureCache(fs::path root, std::string extractor_version, std::size_t length)
    : root_(std::move(root)), version_(std::move(extractor_version)), length_(length) {}

fs::path FeatureCache::blob_path(std::string_view image_name) const {
  return root_ / safe_component(version_) / std::to_string(length_) /
         (safe_component(image_name) + ".f32");
}

bool FeatureCache::contains(std::string_view image_name) const {
  std::error_code ec;
  return fs::is_regular_file(blob_path(image_name), ec);
}

void FeatureCache::put(const ImageFeatureVector& vec) const {
  if (vec.values.size() != length_) {
    throw Error(ErrorCode::kShapeMismatch, "feature length " + std::to_string(vec.values.size()) +
                                               " does not match cache length " + std::to_string(length_));
  }
  const auto blob = blob_path(vec.source_image);
  auto sidecar = blob;
  sidecar.replace_extension(".json");
  const nlohmann::json meta = {{"image_name", vec.source_image},
                               {"extractor_version", version_},
                               {"length", length_}};
  io::write_file_atomic(sidecar, meta.dump() + "\n");
  io::write_file_atomic(blob, io::encode_f32_le(vec.values));
}

ImageFeatureVector FeatureCache::get(std::string_view image_name) const {
  const auto blob = blob_path(image_name);
  auto sidecar = blob;
  sidecar.replace_extension(".json");
  std::error_code ec;
  if (!fs::is_regular_file(blob, ec) || !fs::is_regular_file(sidecar, ec)) {
    throw Error(ErrorCode::kCacheMiss, "no cached features for " + std::string(image_name));
  }
  try {
    const auto meta = nlohmann::json::parse(io::read_file(sidecar));
    if (meta.at("extractor_version") != version_ || meta.at("length") != length_ ||
        meta.at("image_name") != image_name) {
      throw Error(ErrorCode::kCacheMiss, "cached features for " + std::string(image_name) + " have a different key");
    }
  } catch (const nlohmann::json::exception&) {
    throw Error(ErrorCode::kCacheMiss, "unreadable cache sidecar for " + std::string(image_name));
  }
  ImageFeatureVector vec;
  vec.source_image = std::string(image_name);
  vec.values = io::decode_f32_le(io::read_file(blob));
  if (vec.values.size() != length_) {
    throw Error(ErrorCode::kCacheMiss, "cached blob for " + std::string(image_name) + " has the wrong length");
  }
  return vec;
}

ImageFeatureVector cached_features(const FeatureCache& cache, const Vgg16Extractor& extractor,
                                   const fs::path& image_path, const std::string& image_name) {
  if (cache.contains(image_name)) {
    try {
      return cache.get(image_name);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kCacheMiss) throw;
    }
  }
  auto vec = extractor.extract(prepare_image(image_path), image_name);
  cache.put(vec);
  return vec;
}

}  // namespace vartha::image
