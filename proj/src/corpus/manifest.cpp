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

#include <algorithm>
#include <cctype>
#include <map>

#include "corpus/csv.hpp"
#include "vartha/corpus.hpp"
#include "vartha/io.hpp"

namespace vartha::corpus {
namespace {

std::string_view trim(std::string_view s) {
  constexpr std::string_view kSpace = " \t\r\n\v\f";
  const auto b = s.find_first_not_of(kSpace);
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(kSpace);
  return s.substr(b, e - b + 1);
}

std::string url_extension(std::string_view url) {
  if (auto p = url.find("://"); p != std::string_view::npos) {
    url.remove_prefix(p + 3);
    auto slash = url.find('/');
    url = slash == std::string_view::npos ? std::string_view{} : url.substr(slash);
  }
  url = url.substr(0, url.find_first_of("?#"));
  const auto last = url.substr(url.rfind('/') == std::string_view::npos ? 0 : url.rfind('/') + 1);
  const auto dot = last.rfind('.');
  if (dot == std::string_view::npos || dot + 1 == last.size()) return ".jpg";
  const auto ext = last.substr(dot + 1);
  if (ext.size() > 5) return ".jpg";
  std::string out = ".";
  for (char c : ext) {
    if (!std::isalnum(static_cast<unsigned char>(c))) return ".jpg";
    out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  }
  return out;
}

}  // namespace

std::array<std::size_t, 2> Manifest::class_counts() const {
  std::array<std::size_t, 2> counts{0, 0};
  for (const auto& r : records) ++counts[static_cast<int>(r.label)];
  return counts;
}

std::string derive_image_name(std::string_view image_url) {
  if (image_url.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "image_url must be non-empty");
  }
  return io::sha1_hex(image_url) + url_extension(image_url);
}

NewsRecord make_record(std::string headline, std::string news_url,
                       std::string image_url, Label label) {
  if (trim(headline).empty()) {
    throw Error(ErrorCode::kEmptyHeadline, "headline is empty");
  }
  NewsRecord r;
  r.image_name = derive_image_name(image_url);
  r.headline = std::move(headline);
  r.news_url = std::move(news_url);
  r.image_url = std::move(image_url);
  r.label = label;
  return r;
}

Manifest parse_manifest(std::string_view text, bool strict) {
  auto rows = csv::parse(text);
  Manifest out;
  if (rows.empty()) {
    throw Error(ErrorCode::kMissingColumn, "manifest has no header row");
  }

  std::map<std::string, std::size_t, std::less<>> column;
  for (std::size_t i = 0; i < rows[0].fields.size(); ++i) {
    column.emplace(std::string(trim(rows[0].fields[i])), i);
  }
  std::array<std::size_t, kManifestColumns.size()> idx{};
  for (std::size_t c = 0; c < kManifestColumns.size(); ++c) {
    auto it = column.find(kManifestColumns[c]);
    if (it == column.end()) {
      throw Error(ErrorCode::kMissingColumn,
                  "header lacks column '" + std::string(kManifestColumns[c]) + "'");
    }
    idx[c] = it->second;
  }
  const std::size_t width = rows[0].fields.size();

  for (std::size_t r = 1; r < rows.size(); ++r) {
    const auto& row = rows[r];
    auto fail = [&](ErrorCode code, std::string reason) {
      RowError e{r, code, std::move(reason)};
      if (strict) {
        throw Error(code, "row " + std::to_string(r) + ": " + e.reason);
      }
      out.errors.push_back(std::move(e));
    };
    if (row.unterminated_quote) {
      fail(ErrorCode::kMalformedRow, "unterminated quoted field");
      continue;
    }
    if (row.fields.size() != width) {
      fail(ErrorCode::kMalformedRow, "expected " + std::to_string(width) +
                                         " fields, found " +
                                         std::to_string(row.fields.size()));
      continue;
    }
    const auto& f = row.fields;
    const auto label = trim(f[idx[4]]);
    if (label != "0" && label != "1") {
      fail(ErrorCode::kBadLabel, "label '" + std::string(label) + "' is not 0 or 1");
      continue;
    }
    if (trim(f[idx[0]]).empty()) {
      fail(ErrorCode::kEmptyHeadline, "headline is empty");
      continue;
    }
    if (trim(f[idx[2]]).empty()) {
      fail(ErrorCode::kMalformedRow, "image_url is empty");
      continue;
    }
    out.records.push_back(make_record(f[idx[0]], f[idx[1]], f[idx[2]],
                                      label == "0" ? Label::kFake : Label::kNotFake));
  }
  return out;
}

Manifest load_manifest(const fs::path& path, bool strict) {
  return parse_manifest(io::read_file(path), strict);
}

std::string format_manifest(std::span<const NewsRecord> records) {
  std::string out;
  for (std::size_t c = 0; c < kManifestColumns.size(); ++c) {
    if (c) out.push_back(',');
    out += kManifestColumns[c];
  }
  out += "\r\n";
  for (const auto& r : records) {
    out += csv::escape(r.headline);
    out.push_back(',');
    out += csv::escape(r.news_url);
    out.push_back(',');
    out += csv::escape(r.image_url);
    out.push_back(',');
    out += csv::escape(r.image_name);
    out.push_back(',');
    out += r.label == Label::kFake ? "0" : "1";
    out += "\r\n";
  }
  return out;
}

void write_manifest(const fs::path& path, std::span<const NewsRecord> records) {
  io::write_file_atomic(path, format_manifest(records));
}

}  // namespace vartha::corpus
