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
#include <opencv2/core.hpp>
#include <opencv2/imgcodecs.hpp>

#include "test_support.hpp"
#include "vartha/fixture.hpp"
#include "vartha/io.hpp"

namespace vartha::image {
namespace {

using testing::TempDir;
using testing::thrown_code;

std::string encode(const cv::Mat& m, const std::string& ext) {
  std::vector<uchar> buf;
  cv::imencode(ext, m, buf);
  return {buf.begin(), buf.end()};
}

TEST(PrepareImageTest, ConstantGray) {
  const cv::Mat gray(448, 448, CV_8UC3, cv::Scalar(128, 128, 128));
  const auto img = prepare_image_bytes(encode(gray, ".png"));
  ASSERT_EQ(img.tensor.size(), static_cast<std::size_t>(kInputSize * kInputSize * kChannels));
  for (int y = 0; y < kInputSize; y += 37) {
    for (int x = 0; x < kInputSize; x += 41) {
      for (int c = 0; c < kChannels; ++c) EXPECT_FLOAT_EQ(img.at(y, x, c), 128.0f - kBgrMean[c]);
    }
  }
}

TEST(PrepareImageTest, ChannelOrderIsBgr) {
  // OpenCV scalars are B, G, R.
  const cv::Mat red(50, 70, CV_8UC3, cv::Scalar(0, 0, 255));
  const auto img = prepare_image_bytes(encode(red, ".png"));
  EXPECT_FLOAT_EQ(img.at(10, 10, 0), -kBgrMean[0]);
  EXPECT_FLOAT_EQ(img.at(10, 10, 2), 255.0f - kBgrMean[2]);
}

TEST(PrepareImageTest, AnySizeGives224) {
  cv::Mat m(100, 300, CV_8UC3);
  cv::randu(m, 0, 255);
  TempDir dir;
  io::write_file_atomic(dir / "wide.jpg", encode(m, ".jpg"));
  EXPECT_EQ(prepare_image(dir / "wide.jpg").tensor.size(), 224u * 224u * 3u);
  const cv::Mat one(1, 1, CV_8UC1, cv::Scalar(10));
  EXPECT_EQ(prepare_image_bytes(encode(one, ".png")).tensor.size(), 224u * 224u * 3u);
}

TEST(PrepareImageTest, TruncatedJpeg) {
  cv::Mat m(120, 160, CV_8UC3);
  cv::randu(m, 0, 255);
  const auto jpeg = encode(m, ".jpg");
  EXPECT_EQ(thrown_code([&] { prepare_image_bytes(jpeg.substr(0, jpeg.size() / 2)); }), ErrorCode::kDecodeError);
  const auto png = encode(m, ".png");
  EXPECT_EQ(thrown_code([&] { prepare_image_bytes(png.substr(0, png.size() / 2)); }), ErrorCode::kDecodeError);
}

TEST(PrepareImageTest, NotAnImage) {
  EXPECT_EQ(thrown_code([] { prepare_image_bytes("<html>hello</html>"); }), ErrorCode::kNotAnImage);
  EXPECT_EQ(thrown_code([] { prepare_image_bytes(""); }), ErrorCode::kNotAnImage);
  EXPECT_EQ(thrown_code([] { prepare_image("/nonexistent/x.png"); }), ErrorCode::kDecodeError);
}

PreparedImage fixture_image(std::size_t i) {
  return prepare_image(testing::fixture_images() / testing::fixture_manifest()[i].image_name);
}

TEST(ExtractorTest, LengthFiniteDeterministic) {
  const auto& ex = testing::shared_extractor();
  const auto img = fixture_image(0);
  const auto a = ex.extract(img);
  ASSERT_EQ(a.values.size(), kFeatureLength);
  for (float v : a.values) ASSERT_TRUE(std::isfinite(v));

  PreparedImage zero;
  zero.tensor.assign(img.tensor.size(), 0.0f);
  EXPECT_EQ(ex.extract(zero).values, ex.extract(zero).values);
  EXPECT_EQ(ex.extract(img).values, a.values);
}

TEST(ExtractorTest, DistinctImagesDiffer) {
  const auto& ex = testing::shared_extractor();
  const auto a = ex.extract(fixture_image(0)).values;
  const auto b = ex.extract(fixture_image(1)).values;
  std::size_t differ = 0;
  for (std::size_t i = 0; i < a.size(); ++i) differ += a[i] != b[i];
  EXPECT_GE(static_cast<double>(differ), 0.01 * static_cast<double>(a.size()));
}

TEST(ExtractorTest, WeightsFrozen) {
  const auto& ex = testing::shared_extractor();
  const auto before = ex.parameter_digest();
  ex.extract(fixture_image(2));
  EXPECT_EQ(ex.parameter_digest(), before);
}

TEST(ExtractorTest, Unavailable) {
  TempDir dir;
  EXPECT_EQ(thrown_code([&] { Vgg16Extractor::load(dir / "missing.bin"); }), ErrorCode::kExtractorUnavailable);
  io::write_file_atomic(dir / "junk.bin", "VGG16W01\x01");
  EXPECT_EQ(thrown_code([&] { Vgg16Extractor::load(dir / "junk.bin"); }), ErrorCode::kExtractorUnavailable);
}

// Each conv copies input channel 0 to output channel 0 through the centre tap,
// so feature (y, x, 0) is the max of relu(B channel) over a 32x32 block.
TEST(ExtractorTest, CentreTapOracle) {
  std::vector<ConvWeights> layers;
  for (const auto& [in, out] : vgg16_conv_shapes()) {
    ConvWeights w;
    w.kernel.assign(static_cast<std::size_t>(9 * in * out), 0.0f);
    w.bias.assign(static_cast<std::size_t>(out), 0.0f);
    w.kernel[static_cast<std::size_t>((1 * 3 + 1) * in * out)] = 1.0f;
    layers.push_back(std::move(w));
  }
  TempDir dir;
  write_vgg16_weights(dir / "centre.bin", "centre-tap", layers);
  const auto ex = Vgg16Extractor::load(dir / "centre.bin");

  const auto img = fixture_image(3);
  const auto f = ex.extract(img).values;
  ASSERT_EQ(f.size(), kFeatureLength);
  double worst = 0;
  for (int by = 0; by < 7; ++by) {
    for (int bx = 0; bx < 7; ++bx) {
      float want = 0.0f;
      for (int y = 32 * by; y < 32 * by + 32; ++y) {
        for (int x = 32 * bx; x < 32 * bx + 32; ++x) want = std::max(want, img.at(y, x, 0));
      }
      const std::size_t base = static_cast<std::size_t>(by * 7 + bx) * 512;
      worst = std::max(worst, static_cast<double>(std::abs(f[base] - want)));
      for (std::size_t c = 1; c < 512; ++c) ASSERT_EQ(f[base + c], 0.0f);
    }
  }
  EXPECT_LT(worst, 1e-4);
}

TEST(AlignTest, PadIdentityTruncate) {
  const ImageFeatureVector v{{1, 2, 3, 4, 5}, "x"};
  EXPECT_EQ(align_feature_length(v, 8).values, (std::vector<float>{1, 2, 3, 4, 5, 0, 0, 0}));
  EXPECT_EQ(align_feature_length(v, 5).values, v.values);
  EXPECT_EQ(align_feature_length(v, 3).values, (std::vector<float>{1, 2, 3}));
  EXPECT_EQ(align_feature_length(v, 3).source_image, "x");
}

TEST(FeatureCacheTest, RoundTripMissAndVersionKey) {
  TempDir dir;
  const FeatureCache v1(dir.path(), "v1", 4);
  const FeatureCache v2(dir.path(), "v2", 4);
  const ImageFeatureVector vec{{0.5f, -1.0f, 3.25f, 1e-8f}, "a.png"};
  EXPECT_EQ(thrown_code([&] { v1.get("a.png"); }), ErrorCode::kCacheMiss);
  v1.put(vec);
  EXPECT_TRUE(v1.contains("a.png"));
  EXPECT_EQ(v1.get("a.png").values, vec.values);
  EXPECT_FALSE(v2.contains("a.png"));
  EXPECT_EQ(thrown_code([&] { v2.get("a.png"); }), ErrorCode::kCacheMiss);
  EXPECT_EQ(thrown_code([&] { v1.put({{1, 2}, "b.png"}); }), ErrorCode::kShapeMismatch);
}

TEST(FeatureCacheTest, CachedFeaturesExtractOnce) {
  TempDir dir;
  const auto& ex = testing::shared_extractor();
  const FeatureCache cache(dir.path(), ex.version(), kFeatureLength);
  const auto rec = testing::fixture_manifest()[5];
  const auto path = testing::fixture_images() / rec.image_name;
  const auto a = cached_features(cache, ex, path, rec.image_name);
  EXPECT_TRUE(cache.contains(rec.image_name));
  EXPECT_EQ(cached_features(cache, ex, "/nonexistent.png", rec.image_name).values, a.values);
}

TEST(FixtureImageTest, RendersDecodablePng) {
  const auto png = fixture::render_image(corpus::Label::kFake, 0, 7);
  EXPECT_EQ(png.substr(1, 3), "PNG");
  EXPECT_EQ(png, fixture::render_image(corpus::Label::kFake, 0, 7));
  EXPECT_NE(png, fixture::render_image(corpus::Label::kNotFake, 0, 7));
  EXPECT_NO_THROW(prepare_image_bytes(png));
}

}  // namespace
}  // namespace vartha::image
