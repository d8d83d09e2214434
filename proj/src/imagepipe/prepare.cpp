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

#include <opencv2/imgcodecs.hpp>
#include <opencv2/imgproc.hpp>

#include <cstring>

#include "vartha/error.hpp"
#include "vartha/imagepipe.hpp"
#include "vartha/io.hpp"

namespace vartha::image {
namespace {

enum class Format { kJpeg, kPng, kWebp, kUnknown };

Format sniff(std::string_view b) {
  if (b.size() >= 3 && b.starts_with("\xFF\xD8\xFF")) return Format::kJpeg;
  if (b.starts_with("\x89PNG\r\n\x1A\n")) return Format::kPng;
  if (b.size() >= 12 && b.starts_with("RIFF") && b.substr(8, 4) == "WEBP") return Format::kWebp;
  return Format::kUnknown;
}

// libjpeg and libpng fill in missing data on premature EOF instead of failing,
// so truncation is checked structurally before decoding.
bool looks_complete(Format format, std::string_view b) {
  switch (format) {
    case Format::kJpeg: {
      auto end = b.find_last_not_of(std::string_view("\0 \t\r\n", 5));
      if (end == std::string_view::npos) return false;
      const auto tail_start = end + 1 > 256 ? end + 1 - 256 : 0;
      return b.substr(tail_start, end + 1 - tail_start).find("\xFF\xD9") != std::string_view::npos;
    }
    case Format::kPng: {
      const auto tail_start = b.size() > 32 ? b.size() - 32 : 0;
      return b.substr(tail_start).find("IEND") != std::string_view::npos;
    }
    case Format::kWebp: {
      std::uint32_t riff_size = 0;
      std::memcpy(&riff_size, b.data() + 4, 4);
      return static_cast<std::size_t>(riff_size) + 8 <= b.size();
    }
    case Format::kUnknown:
      break;
  }
  return false;
}

}  // namespace

PreparedImage prepare_image_bytes(std::string_view bytes) {
  const auto format = sniff(bytes);
  if (format == Format::kUnknown) {
    throw Error(ErrorCode::kNotAnImage, "content is not JPEG, PNG or WebP");
  }
  if (!looks_complete(format, bytes)) {
    throw Error(ErrorCode::kDecodeError, "image data is truncated");
  }

  const cv::Mat raw(1, static_cast<int>(bytes.size()), CV_8UC1,
                    const_cast<char*>(bytes.data()));
  cv::Mat bgr;
  try {
    bgr = cv::imdecode(raw, cv::IMREAD_COLOR);
  } catch (const cv::Exception& e) {
    throw Error(ErrorCode::kDecodeError, std::string("decoder failed: ") + e.what());
  }
  if (bgr.empty() || bgr.channels() != 3) {
    throw Error(ErrorCode::kDecodeError, "decoder rejected the image");
  }

  cv::Mat resized;
  if (bgr.rows == kInputSize && bgr.cols == kInputSize) {
    resized = bgr;
  } else {
    cv::resize(bgr, resized, cv::Size(kInputSize, kInputSize), 0, 0, cv::INTER_LINEAR);
  }

  PreparedImage out;
  out.tensor.resize(static_cast<std::size_t>(kInputSize) * kInputSize * kChannels);
  std::size_t k = 0;
  for (int y = 0; y < kInputSize; ++y) {
    const auto* row = resized.ptr<cv::Vec3b>(y);
    for (int x = 0; x < kInputSize; ++x) {
      for (int c = 0; c < kChannels; ++c) {
        out.tensor[k++] = static_cast<float>(row[x][c]) - kBgrMean[c];
      }
    }
  }
  return out;
}

PreparedImage prepare_image(const fs::path& path) {
  std::error_code ec;
  if (!fs::is_regular_file(path, ec)) {
    throw Error(ErrorCode::kDecodeError, "no such image file: " + path.string());
  }
  return prepare_image_bytes(io::read_file(path));
}

ImageFeatureVector align_feature_length(ImageFeatureVector vec, std::size_t target) {
  if (target == 0) throw Error(ErrorCode::kInvalidArgument, "feature length target must be >= 1");
  vec.values.resize(target, 0.f);
  return vec;
}

}  // namespace vartha::image
