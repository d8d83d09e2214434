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

#include <opencv2/core.hpp>
#include <opencv2/imgcodecs.hpp>
#include <opencv2/imgproc.hpp>

#include <array>
#include <string_view>

#include "common/rng.hpp"
#include "vartha/error.hpp"
#include "vartha/fixture.hpp"
#include "vartha/io.hpp"

namespace vartha::fixture {
namespace {

using corpus::Label;

constexpr std::array<std::string_view, 10> kCommon = {
    "സർക്കാർ", "കേരളം", "വാർത്ത", "മന്ത്രി", "പുതിയ",
    "ജില്ല", "ആശുപത്രി", "വിദ്യാർത്ഥികൾ", "പോലീസ്", "നഗരം"};

constexpr std::array<std::string_view, 10> kFakeWords = {
    "വ്യാജ", "അത്ഭുതം", "രഹസ്യ", "ഞെട്ടിക്കുന്ന", "വൈറൽ",
    "മരുന്ന്", "അന്യഗ്രഹ", "സൗജന്യ", "തട്ടിപ്പ്", "പ്രചരിക്കുന്ന"};

constexpr std::array<std::string_view, 10> kRealWords = {
    "പ്രഖ്യാപിച്ചു", "ഉദ്ഘാടനം", "മഴ", "പരീക്ഷ", "ഫലം",
    "ബജറ്റ്", "യോഗം", "റിപ്പോർട്ട്", "നിയമസഭ", "തിരഞ്ഞെടുപ്പ്"};

template <std::size_t N>
std::string_view pick(const std::array<std::string_view, N>& words, Rng& rng) {
  return words[rng.below(N)];
}

std::string headline(Label label, Rng& rng) {
  const auto& lean = label == Label::kFake ? kFakeWords : kRealWords;
  std::vector<std::string> parts;
  parts.emplace_back(pick(lean, rng));
  parts.emplace_back(pick(kCommon, rng));
  parts.emplace_back(pick(lean, rng));
  const std::size_t extra = 1 + rng.below(3);
  for (std::size_t k = 0; k < extra; ++k) parts.emplace_back(pick(kCommon, rng));
  // Surface noise the cleaner has to remove.
  switch (rng.below(4)) {
    case 0: parts.push_back(std::to_string(2000 + rng.below(30))); break;
    case 1: parts.front() = "<b>" + parts.front() + "</b>"; break;
    case 2: parts.back() += "!"; break;
    default: parts.insert(parts.begin() + 1, "&amp;"); break;
  }
  std::string out;
  for (const auto& p : parts) {
    if (!out.empty()) out += ' ';
    out += p;
  }
  return out;
}

}  // namespace

std::vector<corpus::NewsRecord> fixture_records(const FixtureOptions& options) {
  Rng rng(options.seed);
  std::vector<corpus::NewsRecord> out;
  for (std::size_t i = 0; i < options.per_class; ++i) {
    for (Label label : {Label::kFake, Label::kNotFake}) {
      const std::string cls = label == Label::kFake ? "fake" : "real";
      const std::string base = "https://" + options.host;
      out.push_back(corpus::make_record(headline(label, rng), base + "/news/" + cls + "-" + std::to_string(i),
                                        base + "/img/" + cls + "-" + std::to_string(i) + ".png", label));
    }
  }
  return out;
}

std::string render_image(Label label, std::size_t index, std::uint64_t seed) {
  Rng rng(seed * 1000003 + index * 2 + static_cast<std::uint64_t>(label));
  const int w = 160 + static_cast<int>(rng.below(161));
  const int h = 120 + static_cast<int>(rng.below(121));
  const bool fake = label == Label::kFake;
  auto jitter = [&](int base) { return cv::saturate_cast<uchar>(base + static_cast<int>(rng.below(41)) - 20); };
  // BGR
  const cv::Scalar bg = fake ? cv::Scalar(jitter(60), jitter(70), jitter(200)) : cv::Scalar(jitter(190), jitter(150), jitter(70));
  cv::Mat img(h, w, CV_8UC3, bg);
  const int shapes = 3 + static_cast<int>(rng.below(4));
  for (int k = 0; k < shapes; ++k) {
    const cv::Point a(static_cast<int>(rng.below(w)), static_cast<int>(rng.below(h)));
    const cv::Scalar ink(jitter(fake ? 30 : 240), jitter(fake ? 220 : 240), jitter(fake ? 240 : 240));
    if (fake) {
      const cv::Point b(a.x + w / 2, a.y + h / 2);
      cv::line(img, a, b, ink, 4 + static_cast<int>(rng.below(6)));
    } else {
      cv::circle(img, a, 10 + static_cast<int>(rng.below(30)), ink, cv::FILLED);
    }
  }
  cv::Mat noise(h, w, CV_8UC3);
  cv::RNG cvrng(static_cast<std::uint64_t>(rng.next()));
  cvrng.fill(noise, cv::RNG::UNIFORM, 0, 24);
  img += noise;
  std::vector<uchar> png;
  if (!cv::imencode(".png", img, png)) throw Error(ErrorCode::kIo, "PNG encoding failed");
  return {png.begin(), png.end()};
}

FixtureFiles write_fixture(const fs::path& dir, const FixtureOptions& options) {
  FixtureFiles files{dir / "manifest.csv", dir / "manifest_16.csv", dir / "images"};
  fs::create_directories(files.image_dir);
  const auto records = fixture_records(options);
  std::vector<corpus::NewsRecord> subset;
  std::array<std::size_t, 2> seen{};
  std::array<std::size_t, 2> index{};
  for (const auto& r : records) {
    const auto c = static_cast<std::size_t>(r.label);
    io::write_file_atomic(files.image_dir / r.image_name, render_image(r.label, index[c]++, options.seed));
    if (seen[c] < options.subset_per_class) {
      subset.push_back(r);
      ++seen[c];
    }
  }
  corpus::write_manifest(files.manifest, records);
  corpus::write_manifest(files.subset_manifest, subset);
  return files;
}

}  // namespace vartha::fixture
