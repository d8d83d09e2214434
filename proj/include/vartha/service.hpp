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

#ifndef VARTHA_SERVICE_HPP_
#define VARTHA_SERVICE_HPP_

#include <chrono>
#include <cstddef>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <string_view>

#include "vartha/models.hpp"

namespace vartha::service {

namespace fs = std::filesystem;

struct ServiceConfig {
  std::string bind_address = "127.0.0.1";
  int port = 8080;  // 0 picks a free port
  fs::path bundle_dir;
  std::optional<fs::path> extractor_weights;  // defaults to the path in the bundle
  std::chrono::milliseconds fetch_timeout{10'000};
  std::string cors_origin = "*";  // empty disables CORS headers
  bool allow_private_urls = false;
  std::size_t max_upload_bytes = 20u << 20;
  std::size_t threads = 8;
};

/// Rejects image URLs the server must not fetch: anything but http(s), and
/// hosts resolving to loopback, link-local or unspecified addresses unless
/// allow_private is set. Throws InvalidArgument with the reason.
void check_fetch_url(std::string_view url, bool allow_private);

// True for loopback, link-local and unspecified IPv4/IPv6 literals.
bool is_blocked_address(std::string_view ip);

/// HTTP front end over a read-only Predictor.
///   GET  /api/v1/health
///   POST /api/v1/predict  multipart {headline, image} or JSON {headline, image_url}
class Server {
 public:
  // A null predictor answers predictions with 503 ModelUnavailable.
  Server(std::shared_ptr<const models::Predictor> predictor, ServiceConfig config);
  ~Server();
  Server(const Server&) = delete;
  Server& operator=(const Server&) = delete;

  /// Loads the bundle named in `config`; throws CorruptBundle.
  static std::unique_ptr<Server> from_config(const ServiceConfig& config);

  // Binds the listening socket and returns the port. Throws Io on failure.
  int bind();
  // Serves until stop(); call bind() first.
  void run();
  void stop();
  bool running() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

/// Binds, installs SIGINT/SIGTERM handlers that stop the server, and blocks.
void serve(const ServiceConfig& config);

}  // namespace vartha::service

#endif  // VARTHA_SERVICE_HPP_
