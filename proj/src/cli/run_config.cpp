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

#include "cli/options.hpp"
#include "vartha/error.hpp"

namespace vartha::cli {
namespace {

std::string env_name(std::string_view key) {
  std::string out = "VARTHA_";
  for (char c : key) out.push_back(c == '-' ? '_' : static_cast<char>(std::toupper(static_cast<unsigned char>(c))));
  return out;
}

template <typename T>
CLI::Option* opt(CLI::App& app, const std::string& key, T& value, const std::string& help) {
  return app.add_option("--" + key, value, help)->capture_default_str()->envname(env_name(key))->group("Options");
}

CLI::Option* flag(CLI::App& app, const std::string& key, bool& value, const std::string& help) {
  return app.add_flag("--" + key, value, help)->capture_default_str()->envname(env_name(key))->group("Options");
}

}  // namespace

void add_options(CLI::App& app, RunConfig& c) {
  opt(app, "manifest", c.manifest, "Manifest CSV (news_headline,news_url,image_url,image_name,label)");
  opt(app, "out", c.out, "Run directory");
  opt(app, "image-cache", c.image_cache, "Downloaded image directory");
  opt(app, "feature-cache", c.feature_cache, "Image feature cache directory");
  opt(app, "weights", c.weights, "VGG-16 conv-base weights file");
  opt(app, "bundle", c.bundle, "Model bundle directory (default: <out>/train/<target>/bundle)");
  opt(app, "pretrained-vectors", c.pretrained_vectors, "Import word vectors (word2vec text format)");

  opt(app, "seed", c.seed, "Global seed");
  opt(app, "test-fraction", c.test_fraction, "Held-out fraction per class")->check(CLI::Range(0.0, 1.0));
  opt(app, "workers", c.workers, "Concurrent image downloads")->check(CLI::PositiveNumber);
  opt(app, "fetch-timeout-ms", c.fetch_timeout_ms, "Per-image fetch timeout");
  flag(app, "strict", c.strict, "Fail on the first malformed manifest row");

  opt(app, "vector-size", c.vector_size, "Word vector dimension")->check(CLI::PositiveNumber);
  opt(app, "window", c.window, "Word2Vec context window")->check(CLI::PositiveNumber);
  opt(app, "negative", c.negative, "Word2Vec negative samples");
  opt(app, "w2v-epochs", c.w2v_epochs, "Word2Vec passes over the corpus")->check(CLI::PositiveNumber);
  opt(app, "min-count", c.min_count, "Minimum token frequency")->check(CLI::PositiveNumber);
  opt(app, "sample", c.sample, "Word2Vec downsampling threshold (0 disables)");
  opt(app, "max-len", c.max_len, "Upper bound on encoded headline length")->check(CLI::PositiveNumber);
  opt(app, "align", c.align, "Image feature length: feature-length or max-len")
      ->check(CLI::IsMember({"feature-length", "max-len"}));

  opt(app, "epochs", c.epochs, "Training epochs")->check(CLI::PositiveNumber);
  opt(app, "batch-size", c.batch_size, "Mini-batch size")->check(CLI::PositiveNumber);
  opt(app, "learning-rate", c.learning_rate, "Adam learning rate")->check(CLI::PositiveNumber);
  opt(app, "beta1", c.beta1, "Adam beta1");
  opt(app, "beta2", c.beta2, "Adam beta2");
  opt(app, "epsilon", c.epsilon, "Adam epsilon");
  opt(app, "target", c.target, "Network: text, image, fusion or all")
      ->check(CLI::IsMember({"text", "image", "fusion", "all"}));
  opt(app, "fusion-mode", c.fusion_mode, "penultimate or softmax_output")
      ->check(CLI::IsMember({"penultimate", "softmax_output"}));
  opt(app, "image-norm", c.image_norm, "Image feature scaling before the first dense layer: l2 or none")
      ->check(CLI::IsMember({"l2", "none"}));
  flag(app, "freeze-embeddings", c.freeze_embeddings, "Keep word vectors fixed during training");
  opt(app, "branch-init", c.branch_init, "Fusion branches: scratch or pretrained (from this run's text/image bundles)")
      ->check(CLI::IsMember({"scratch", "pretrained"}));
  flag(app, "freeze-branches", c.freeze_branches, "With pretrained branches, train only the fusion head");

  opt(app, "split", c.split, "Records to evaluate: test or train")->check(CLI::IsMember({"test", "train"}));
  opt(app, "headline", c.headline, "Headline to classify");
  opt(app, "image", c.image, "Image file to classify");
  opt(app, "image-url", c.image_url, "Image URL to classify");

  opt(app, "bind", c.bind, "Listen address");
  opt(app, "port", c.port, "Listen port (0 picks a free port)")->check(CLI::Range(0, 65535));
  opt(app, "cors-origin", c.cors_origin, "Access-Control-Allow-Origin value; empty disables CORS");
  flag(app, "allow-private-urls", c.allow_private_urls, "Let image_url reach loopback and link-local hosts");
  opt(app, "threads", c.threads, "Request worker threads")->check(CLI::PositiveNumber);
}

std::vector<models::Target> RunConfig::targets() const {
  if (target == "all") return {models::Target::kText, models::Target::kImage, models::Target::kFusion};
  return {models::parse_target(target)};
}

training::TrainConfig RunConfig::train_config(models::Target t) const {
  training::TrainConfig tc;
  tc.epochs = epochs;
  tc.batch_size = batch_size;
  tc.adam = {learning_rate, beta1, beta2, epsilon};
  tc.seed = seed;
  tc.target = t;
  tc.fusion_mode = models::parse_fusion_mode(fusion_mode);
  tc.image_norm = models::parse_input_norm(image_norm);
  tc.max_len = max_len;
  tc.embed_dim = vector_size;
  tc.trainable_embeddings = !freeze_embeddings;
  if (t == models::Target::kFusion && branch_init == "pretrained") {
    tc.text_init = fs::path(out) / "train" / "text" / "bundle";
    tc.image_init = fs::path(out) / "train" / "image" / "bundle";
    tc.freeze_branches = freeze_branches;
  }
  return tc;
}

training::PreprocessOptions RunConfig::preprocess_options() const {
  training::PreprocessOptions p;
  p.word2vec.dim = vector_size;
  p.word2vec.window = window;
  p.word2vec.negative = negative;
  p.word2vec.epochs = w2v_epochs;
  p.word2vec.min_count = min_count;
  p.word2vec.sample = sample;
  p.word2vec.seed = seed;
  p.max_len_cap = max_len;
  if (!pretrained_vectors.empty()) p.pretrained_vectors = pretrained_vectors;
  p.image_dir = image_cache;
  p.feature_cache_dir = feature_cache;
  p.extractor_weights = weights;
  p.align = align == "max-len" ? training::AlignMode::kMaxLen : training::AlignMode::kFeatureLength;
  return p;
}

service::ServiceConfig RunConfig::service_config() const {
  service::ServiceConfig s;
  s.bind_address = bind;
  s.port = port;
  s.bundle_dir = bundle;
  if (!weights.empty()) s.extractor_weights = weights;
  s.fetch_timeout = std::chrono::milliseconds(fetch_timeout_ms);
  s.cors_origin = cors_origin;
  s.allow_private_urls = allow_private_urls;
  s.threads = threads;
  return s;
}

}  // namespace vartha::cli
