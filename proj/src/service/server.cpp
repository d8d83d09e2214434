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

#include <pthread.h>
#include <signal.h>

#include <atomic>
#include <chrono>
#include <cstdio>
#include <thread>

// Eigen first: httplib pulls in <resolv.h>, whose `_res` macro breaks Eigen.
#include "vartha/corpus.hpp"
#include "vartha/error.hpp"
#include "vartha/service.hpp"

#include "httplib.h"
#include "json.hpp"

namespace vartha::service {
namespace {

using nlohmann::json;

void send_json(httplib::Response& res, int status, const json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

void send_error(httplib::Response& res, int status, std::string_view code, const std::string& message) {
  send_json(res, status, {{"error", code}, {"message", message}});
}

int status_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::kDecodeError:
    case ErrorCode::kNotAnImage:
      return 400;
    case ErrorCode::kImageFetchFailed:
      return 502;
    case ErrorCode::kModelUnavailable:
    case ErrorCode::kExtractorUnavailable:
      return 503;
    default:
      return 500;
  }
}

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n\f\v");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n\f\v");
  return std::string(s.substr(b, e - b + 1));
}

struct FieldError {
  std::string field;
  std::string message;
};

}  // namespace

struct Server::Impl {
  std::shared_ptr<const models::Predictor> predictor;
  ServiceConfig cfg;
  httplib::Server http;
  int port = -1;

  void predict(const httplib::Request& req, httplib::Response& res);
};

void Server::Impl::predict(const httplib::Request& req, httplib::Response& res) {
  const auto t0 = std::chrono::steady_clock::now();
  std::optional<std::string> headline, upload, url;
  std::vector<FieldError> problems;

  if (req.is_multipart_form_data()) {
    if (req.has_file("headline")) headline = req.get_file_value("headline").content;
    if (req.has_file("image")) {
      auto f = req.get_file_value("image");
      // Browsers send an empty part when no file was chosen.
      if (!f.content.empty() || !f.filename.empty()) upload = std::move(f.content);
    }
    if (req.has_file("image_url")) {
      auto v = trim(req.get_file_value("image_url").content);
      if (!v.empty()) url = std::move(v);
    }
  } else if (req.get_header_value("Content-Type").starts_with("application/json")) {
    json body;
    try {
      body = json::parse(req.body);
    } catch (const json::exception&) {
      send_json(res, 422, {{"error", "ValidationError"}, {"detail", {{{"field", "body"}, {"message", "invalid JSON"}}}}});
      return;
    }
    if (!body.is_object()) {
      problems.push_back({"body", "must be a JSON object"});
    } else {
      if (body.contains("headline")) {
        if (body["headline"].is_string()) headline = body["headline"].get<std::string>();
        else problems.push_back({"headline", "must be a string"});
      }
      if (body.contains("image_url") && !body["image_url"].is_null()) {
        if (body["image_url"].is_string()) url = body["image_url"].get<std::string>();
        else problems.push_back({"image_url", "must be a string"});
      }
    }
  } else {
    problems.push_back({"body", "expected multipart/form-data or application/json"});
  }

  if (problems.empty()) {
    if (!headline) problems.push_back({"headline", "field required"});
    else if (trim(*headline).empty()) problems.push_back({"headline", "must not be empty"});
    if (upload && url) problems.push_back({"image", "exactly one image source: image upload or image_url"});
    else if (!upload && !url) problems.push_back({"image", "exactly one image source: image upload or image_url"});
  }
  if (url && problems.empty()) {
    try {
      check_fetch_url(*url, cfg.allow_private_urls);
    } catch (const Error& e) {
      problems.push_back({"image_url", e.what()});
    }
  }
  if (!problems.empty()) {
    json detail = json::array();
    for (const auto& p : problems) detail.push_back({{"field", p.field}, {"message", p.message}});
    send_json(res, 422, {{"error", "ValidationError"}, {"detail", detail}});
    return;
  }
  if (!predictor) {
    send_error(res, 503, "ModelUnavailable", "no model is loaded");
    return;
  }

  try {
    const std::string bytes = url ? corpus::download(*url, cfg.fetch_timeout, cfg.max_upload_bytes) : *upload;
    const auto pred = predictor->predict_bytes(*headline, bytes);
    auto body = models::to_json(pred);
    body["latency_ms"] =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
    send_json(res, 200, body);
  } catch (const Error& e) {
    send_error(res, status_for(e.code()), to_string(e.code()), e.what());
  }
}

Server::Server(std::shared_ptr<const models::Predictor> predictor, ServiceConfig config)
    : impl_(std::make_unique<Impl>()) {
  impl_->predictor = std::move(predictor);
  impl_->cfg = std::move(config);
  auto* impl = impl_.get();
  auto& http = impl->http;

  const std::size_t threads = std::max<std::size_t>(1, impl->cfg.threads);
  http.new_task_queue = [threads] { return new httplib::ThreadPool(threads); };
  http.set_payload_max_length(impl->cfg.max_upload_bytes + (1u << 20));

  http.Get("/api/v1/health", [impl](const httplib::Request&, httplib::Response& res) {
    if (!impl->predictor) {
      send_json(res, 503, {{"status", "unavailable"}, {"model_version", nullptr}});
      return;
    }
    const auto& b = impl->predictor->bundle();
    send_json(res, 200,
              {{"status", "ok"},
               {"model_version", b.version},
               {"target", models::to_string(b.network.target())},
               {"image_ready", !impl->predictor->uses_image() || impl->predictor->extractor_ready()}});
  });
  http.Post("/api/v1/predict",
            [impl](const httplib::Request& req, httplib::Response& res) { impl->predict(req, res); });
  http.Options(R"(/api/v1/.*)", [](const httplib::Request&, httplib::Response& res) {
    res.status = 204;
    res.set_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS");
    res.set_header("Access-Control-Allow-Headers", "Content-Type");
    res.set_header("Access-Control-Max-Age", "600");
  });
  http.set_post_routing_handler([impl](const httplib::Request&, httplib::Response& res) {
    if (impl->cfg.cors_origin.empty()) return;
    res.set_header("Access-Control-Allow-Origin", impl->cfg.cors_origin);
    if (impl->cfg.cors_origin != "*") res.set_header("Vary", "Origin");
  });
  http.set_exception_handler([](const httplib::Request&, httplib::Response& res, std::exception_ptr ep) {
    try {
      std::rethrow_exception(ep);
    } catch (const std::exception& e) {
      send_error(res, 500, "InternalError", e.what());
    } catch (...) {
      send_error(res, 500, "InternalError", "unknown error");
    }
  });
}

Server::~Server() { stop(); }

std::unique_ptr<Server> Server::from_config(const ServiceConfig& config) {
  auto bundle = models::load_bundle(config.bundle_dir);
  auto predictor = std::make_shared<const models::Predictor>(std::move(bundle), config.extractor_weights);
  return std::make_unique<Server>(std::move(predictor), config);
}

int Server::bind() {
  auto& cfg = impl_->cfg;
  if (cfg.port == 0) {
    impl_->port = impl_->http.bind_to_any_port(cfg.bind_address);
  } else {
    impl_->port = impl_->http.bind_to_port(cfg.bind_address, cfg.port) ? cfg.port : -1;
  }
  if (impl_->port < 0) {
    throw Error(ErrorCode::kIo, "cannot bind " + cfg.bind_address + ":" + std::to_string(cfg.port));
  }
  return impl_->port;
}

void Server::run() { impl_->http.listen_after_bind(); }

void Server::stop() {
  if (impl_ && impl_->http.is_running()) impl_->http.stop();
}

bool Server::running() const { return impl_->http.is_running(); }

void serve(const ServiceConfig& config) {
  // Handle termination signals on a dedicated thread; the worker threads
  // created below inherit the blocked mask.
  sigset_t set;
  sigemptyset(&set);
  sigaddset(&set, SIGINT);
  sigaddset(&set, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &set, nullptr);

  auto server = Server::from_config(config);
  const int port = server->bind();
  std::fprintf(stderr, "{\"event\":\"listening\",\"address\":\"%s\",\"port\":%d}\n", config.bind_address.c_str(),
               port);

  std::atomic<bool> done{false};
  std::thread watcher([&] {
    const timespec tick{0, 200'000'000};
    while (!done) {
      if (sigtimedwait(&set, nullptr, &tick) > 0) {
        server->stop();
        return;
      }
    }
  });
  server->run();
  done = true;
  watcher.join();
  pthread_sigmask(SIG_UNBLOCK, &set, nullptr);
}

}  // namespace vartha::service
