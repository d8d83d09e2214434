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
#include <atomic>
#include <thread>

#include "httplib.h"
#include "json.hpp"
#include "vartha/corpus.hpp"
#include "vartha/io.hpp"

namespace vartha::corpus {
namespace {

struct UrlParts {
  std::string origin;  // scheme://host[:port]
  std::string target;  // path + query
};

UrlParts split_url(std::string_view url) {
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string_view::npos) {
    throw Error(ErrorCode::kImageFetchFailed, "not an absolute URL: " + std::string(url));
  }
  const auto path_start = url.find('/', scheme_end + 3);
  UrlParts parts;
  parts.origin = std::string(url.substr(0, path_start));
  parts.target = path_start == std::string_view::npos ? "/" : std::string(url.substr(path_start));
  if (auto hash = parts.target.find('#'); hash != std::string::npos) parts.target.resize(hash);
  return parts;
}

}  // namespace

std::string_view to_string(FetchStatus status) {
  switch (status) {
    case FetchStatus::kCached: return "cached";
    case FetchStatus::kDownloaded: return "downloaded";
    case FetchStatus::kFailed: return "failed";
  }
  return "failed";
}

std::string download(std::string_view url, std::chrono::milliseconds timeout,
                     std::size_t max_bytes) {
  if (url.starts_with("file://")) {
    const fs::path path{std::string(url.substr(7))};
    std::error_code ec;
    if (!fs::is_regular_file(path, ec)) {
      throw Error(ErrorCode::kImageFetchFailed, "no such file: " + path.string());
    }
    if (fs::file_size(path) > max_bytes) {
      throw Error(ErrorCode::kImageFetchFailed, "file exceeds size limit");
    }
    return io::read_file(path);
  }
  if (!url.starts_with("http://") && !url.starts_with("https://")) {
    throw Error(ErrorCode::kImageFetchFailed, "unsupported URL scheme: " + std::string(url));
  }

  const auto parts = split_url(url);
  httplib::Client client(parts.origin);
  if (!client.is_valid()) {
    throw Error(ErrorCode::kImageFetchFailed, "invalid URL: " + std::string(url));
  }
  const auto secs = timeout.count() / 1000;
  const auto usecs = (timeout.count() % 1000) * 1000;
  client.set_connection_timeout(secs, usecs);
  client.set_read_timeout(secs, usecs);
  client.set_write_timeout(secs, usecs);
  client.set_follow_location(true);

  std::string body;
  bool too_large = false;
  auto res = client.Get(parts.target, [&](const char* data, std::size_t len) {
    if (body.size() + len > max_bytes) {
      too_large = true;
      return false;
    }
    body.append(data, len);
    return true;
  });
  if (too_large) {
    throw Error(ErrorCode::kImageFetchFailed, "response exceeds size limit");
  }
  if (!res) {
    throw Error(ErrorCode::kImageFetchFailed, "request failed: " + httplib::to_string(res.error()));
  }
  if (res->status != 200) {
    throw Error(ErrorCode::kImageFetchFailed, "HTTP status " + std::to_string(res->status));
  }
  return body;
}

std::size_t FetchReport::count(FetchStatus status) const {
  return static_cast<std::size_t>(std::count_if(
      entries.begin(), entries.end(), [&](const FetchEntry& e) { return e.status == status; }));
}

std::string FetchReport::to_jsonl() const {
  std::string out;
  for (const auto& e : entries) {
    nlohmann::json j{{"image_name", e.image_name}, {"status", to_string(e.status)}};
    if (e.status == FetchStatus::kFailed) j["reason"] = e.reason;
    out += j.dump();
    out.push_back('\n');
  }
  return out;
}

FetchReport fetch_images(std::span<const NewsRecord> records, const FetchOptions& options) {
  fs::create_directories(options.cache_dir);
  FetchReport report;
  report.entries.resize(records.size());

  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next.fetch_add(1); i < records.size(); i = next.fetch_add(1)) {
      auto& entry = report.entries[i];
      entry.image_name = records[i].image_name;
      const auto target = options.cache_dir / entry.image_name;
      std::error_code ec;
      if (fs::is_regular_file(target, ec)) {
        entry.status = FetchStatus::kCached;
        continue;
      }
      try {
        io::write_file_atomic(target, download(records[i].image_url, options.timeout, options.max_bytes));
        entry.status = FetchStatus::kDownloaded;
      } catch (const std::exception& ex) {
        entry.status = FetchStatus::kFailed;
        entry.reason = ex.what();
      }
    }
  };

  const std::size_t n = std::max<std::size_t>(1, std::min(options.workers, records.size()));
  {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < n; ++w) pool.emplace_back(worker);
  }
  return report;
}

std::vector<NewsRecord> usable_records(std::span<const NewsRecord> records,
                                       const FetchReport& report) {
  if (report.entries.size() != records.size()) {
    throw Error(ErrorCode::kLengthMismatch, "fetch report does not match record list");
  }
  std::vector<NewsRecord> out;
  for (std::size_t i = 0; i < records.size(); ++i) {
    if (report.usable(i)) out.push_back(records[i]);
  }
  return out;
}

}  // namespace vartha::corpus
