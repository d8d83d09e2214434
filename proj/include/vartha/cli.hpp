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

#ifndef VARTHA_CLI_HPP_
#define VARTHA_CLI_HPP_

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "vartha/service.hpp"
#include "vartha/training.hpp"

namespace vartha::cli {

namespace fs = std::filesystem;

/// Every tunable of the pipeline. Flags and configuration-file keys share
/// the same names (e.g. `--vector-size` / `vector-size = 300`); environment
/// variables use a VARTHA_ prefix (VARTHA_VECTOR_SIZE).
struct RunConfig {
  // paths
  std::string manifest;
  std::string out = "runs/default";
  std::string image_cache = "cache/images";
  std::string feature_cache = "cache/features";
  std::string weights;
  std::string bundle;
  std::string pretrained_vectors;

  // corpus
  std::uint64_t seed = 42;
  double test_fraction = 0.30;
  std::size_t workers = 4;
  std::size_t fetch_timeout_ms = 10'000;
  bool strict = false;

  // text
  std::size_t vector_size = 300;
  std::size_t window = 5;
  std::size_t negative = 5;
  std::size_t w2v_epochs = 10;
  std::size_t min_count = 1;
  double sample = 1e-3;
  std::size_t max_len = 32;
  std::string align = "feature-length";  // feature-length | max-len

  // training
  std::size_t epochs = 10;
  std::size_t batch_size = 32;
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-7;
  std::string target = "fusion";  // text | image | fusion | all
  std::string fusion_mode = "penultimate";
  std::string image_norm = "l2";  // l2 | none
  bool freeze_embeddings = false;
  std::string branch_init = "scratch";  // scratch | pretrained
  bool freeze_branches = false;

  // evaluate / predict
  std::string split = "test";  // test | train
  std::string headline;
  std::string image;
  std::string image_url;

  // serve
  std::string bind = "127.0.0.1";
  int port = 8080;
  std::string cors_origin = "*";
  bool allow_private_urls = false;
  std::size_t threads = 8;

  // Targets selected by `target`, in training order.
  std::vector<models::Target> targets() const;
  training::TrainConfig train_config(models::Target target) const;
  training::PreprocessOptions preprocess_options() const;
  service::ServiceConfig service_config() const;
};

/// Runs the command line. Returns the process exit code: 0 on success, 1 for
/// data errors, 2 for usage errors. Failures print one JSON line to stderr.
int run(int argc, char** argv);

}  // namespace vartha::cli

#endif  // VARTHA_CLI_HPP_
