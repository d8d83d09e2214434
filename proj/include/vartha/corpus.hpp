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

#ifndef VARTHA_CORPUS_HPP_
#define VARTHA_CORPUS_HPP_

#include <array>
#include <chrono>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "vartha/error.hpp"

namespace vartha::corpus {

namespace fs = std::filesystem;

// Label encoding follows the dataset: 0 marks fake news, 1 marks true news.
// Network output column i is the probability of Label(i).
enum class Label : int { kFake = 0, kNotFake = 1 };

inline constexpr std::array<std::string_view, 5> kManifestColumns = {
    "news_headline", "news_url", "image_url", "image_name", "label"};

struct NewsRecord {
  std::string headline;
  std::string news_url;
  std::string image_url;
  std::string image_name;
  Label label = Label::kFake;

  bool operator==(const NewsRecord&) const = default;
};

struct RowError {
  std::size_t row = 0;  // 1-based data row, header excluded
  ErrorCode code = ErrorCode::kMalformedRow;
  std::string reason;
};

struct Manifest {
  std::vector<NewsRecord> records;
  std::vector<RowError> errors;

  // {fake, not_fake}
  std::array<std::size_t, 2> class_counts() const;
};

/// Parses a comma-delimited UTF-8 manifest with RFC 4180 quoting. Rows that
/// fail validation are reported in `errors`; with `strict` set, the first
/// row error is thrown instead. A header lacking any of kManifestColumns
/// always throws MissingColumn.
///
/// The image_name column is re-derived from image_url, so a loaded record
/// always satisfies the derivation invariant.
Manifest load_manifest(const fs::path& path, bool strict = false);
Manifest parse_manifest(std::string_view text, bool strict = false);

std::string format_manifest(std::span<const NewsRecord> records);
void write_manifest(const fs::path& path, std::span<const NewsRecord> records);

/// SHA-1 of the URL (40 lowercase hex chars) followed by the URL path's
/// extension, or ".jpg" when the path has none.
std::string derive_image_name(std::string_view image_url);

// Builds a validated record; image_name is derived from image_url.
NewsRecord make_record(std::string headline, std::string news_url,
                       std::string image_url, Label label);

// ---------------------------------------------------------------------------
// Image fetching

enum class FetchStatus { kCached, kDownloaded, kFailed };

std::string_view to_string(FetchStatus status);

struct FetchEntry {
  std::string image_name;
  FetchStatus status = FetchStatus::kFailed;
  std::string reason;  // empty unless failed
};

struct FetchOptions {
  fs::path cache_dir = "cache/images";
  std::chrono::milliseconds timeout{10'000};
  std::size_t workers = 4;
  std::size_t max_bytes = 20u << 20;
};

struct FetchReport {
  std::vector<FetchEntry> entries;  // parallel to the input records

  std::size_t count(FetchStatus status) const;
  bool usable(std::size_t i) const { return entries[i].status != FetchStatus::kFailed; }

  // One JSON object per line: {"image_name", "status", "reason"?}.
  std::string to_jsonl() const;
};

/// Downloads every record's image into cache_dir/image_name unless that file
/// already exists. Per-record failures are captured, never thrown.
FetchReport fetch_images(std::span<const NewsRecord> records,
                         const FetchOptions& options);

// Records whose image is available, in input order.
std::vector<NewsRecord> usable_records(std::span<const NewsRecord> records,
                                       const FetchReport& report);

/// GET over http(s), or a read for file:// URLs. Throws ImageFetchFailed on
/// transport errors, non-200 responses, or bodies larger than max_bytes.
std::string download(std::string_view url, std::chrono::milliseconds timeout,
                     std::size_t max_bytes = 20u << 20);

// ---------------------------------------------------------------------------
// Splitting

struct DatasetSplit {
  std::vector<NewsRecord> train;
  std::vector<NewsRecord> test;
  std::uint64_t seed = 42;
  double test_fraction = 0.30;
};

/// Stratified, seeded split. Each class contributes round(n_c * fraction)
/// test records, clamped to [1, n_c - 1]. Both halves keep input order.
DatasetSplit split_dataset(std::span<const NewsRecord> records,
                           double test_fraction = 0.30,
                           std::uint64_t seed = 42);

}  // namespace vartha::corpus

#endif  // VARTHA_CORPUS_HPP_
