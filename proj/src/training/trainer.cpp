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
#include <chrono>
#include <cmath>
#include <numeric>
#include <sstream>

#include "common/rng.hpp"
#include "vartha/error.hpp"
#include "vartha/io.hpp"
#include "vartha/training.hpp"

namespace vartha::training {
namespace {

using models::EncodedSet;
using models::Network;
using models::Target;

nlohmann::json embedding_meta(const text::EmbeddingModel& m) {
  const auto& p = m.params;
  return {{"dim", m.dim},
          {"vocab_size", m.vocab.size()},
          {"source", m.source},
          {"seed", p.seed},
          {"params",
           {{"window", p.window},
            {"negative", p.negative},
            {"epochs", p.epochs},
            {"min_count", p.min_count},
            {"alpha", p.alpha},
            {"min_alpha", p.min_alpha},
            {"sample", p.sample}}}};
}

// Mean loss and accuracy in inference mode, batched to bound memory.
std::pair<double, double> measure(const Network& net, const EncodedSet& set, std::size_t batch_size) {
  double loss = 0.0;
  std::size_t correct = 0;
  std::vector<std::size_t> idx;
  for (std::size_t start = 0; start < set.size(); start += batch_size) {
    idx.clear();
    for (std::size_t i = start; i < std::min(set.size(), start + batch_size); ++i) idx.push_back(i);
    const auto batch = set.batch(idx);
    const nn::Matrix z = net.logits(batch);
    loss += nn::softmax_cross_entropy(z, batch.labels) * static_cast<double>(idx.size());
    for (Eigen::Index b = 0; b < z.cols(); ++b) {
      const int pred = z(1, b) > z(0, b) ? 1 : 0;
      correct += pred == batch.labels[static_cast<std::size_t>(b)];
    }
  }
  const auto n = static_cast<double>(set.size());
  return {loss / n, static_cast<double>(correct) / n};
}

void copy_branch(Network& dst, const fs::path& bundle_dir, Target want, bool freeze) {
  auto src = models::load_bundle(bundle_dir);
  if (src.network.target() != want) {
    throw Error(ErrorCode::kShapeMismatch, "bundle at " + bundle_dir.string() + " is a " +
                                               std::string(to_string(src.network.target())) + " network, expected " +
                                               std::string(to_string(want)));
  }
  std::vector<nn::Parameter*> from = src.network.parameters();
  const std::string prefix = want == Target::kText ? "text/" : "image/";
  for (auto* p : dst.parameters()) {
    if (p->name.rfind(prefix, 0) != 0) continue;
    auto it = std::find_if(from.begin(), from.end(), [&](auto* q) { return q->name == p->name; });
    if (it == from.end() || (*it)->value.rows() != p->value.rows() || (*it)->value.cols() != p->value.cols()) {
      throw Error(ErrorCode::kShapeMismatch, "cannot initialize " + p->name + " from " + bundle_dir.string());
    }
    p->value = (*it)->value;
    if (freeze) p->trainable = false;
  }
}

Network build_network(const TrainingData& data, const TrainConfig& cfg) {
  models::TextBranchSpec ts;
  ts.vocab_size = static_cast<int>(data.embeddings.vocab.size());
  ts.embed_dim = static_cast<int>(data.embeddings.dim);
  ts.max_len = static_cast<int>(data.max_len);
  ts.trainable_embeddings = cfg.trainable_embeddings;
  models::ImageBranchSpec is;
  is.input_len = static_cast<int>(data.train.features.rows());
  is.input_norm = cfg.image_norm;
  models::FusionSpec fs_spec;
  fs_spec.mode = cfg.fusion_mode;

  // text: seed, image: seed + 1, fusion head: seed + 2
  switch (cfg.target) {
    case Target::kText:
      return models::build_text_network(models::build_text_branch(ts, data.embeddings, cfg.seed));
    case Target::kImage:
      return models::build_image_network(models::build_image_branch(is, cfg.seed + 1));
    case Target::kFusion: {
      auto net = models::build_fusion_model(models::build_text_branch(ts, data.embeddings, cfg.seed),
                                            models::build_image_branch(is, cfg.seed + 1), fs_spec, cfg.seed + 2);
      if (cfg.text_init) copy_branch(net, *cfg.text_init, Target::kText, cfg.freeze_branches);
      if (cfg.image_init) copy_branch(net, *cfg.image_init, Target::kImage, cfg.freeze_branches);
      return net;
    }
  }
  throw Error(ErrorCode::kInvalidArgument, "unknown target");
}

// Records of the batch whose inference logits are not finite, or the whole
// batch when every sample looks fine on its own.
std::string describe_batch(const Network& net, const EncodedSet& set, std::span<const std::size_t> idx) {
  std::vector<std::size_t> bad;
  for (std::size_t i : idx) {
    const std::size_t one[] = {i};
    if (!net.logits(set.batch(one)).allFinite()) bad.push_back(i);
  }
  if (bad.empty()) bad.assign(idx.begin(), idx.end());
  std::string ids;
  for (std::size_t k = 0; k < bad.size() && k < 8; ++k) {
    if (!ids.empty()) ids += ",";
    ids += bad[k] < set.record_ids.size() ? set.record_ids[bad[k]] : std::to_string(bad[k]);
  }
  if (bad.size() > 8) ids += ",...";
  return ids;
}

}  // namespace

void TrainConfig::validate() const {
  auto bad = [](const std::string& m) { throw Error(ErrorCode::kInvalidArgument, m); };
  if (epochs < 1) bad("epochs must be >= 1");
  if (batch_size < 1) bad("batch_size must be >= 1");
  if (!(adam.learning_rate > 0.0)) bad("learning rate must be > 0");
  if (max_len < 1) bad("max_len must be >= 1");
  if (embed_dim < 1) bad("vector size must be >= 1");
  if ((text_init || image_init) && target != Target::kFusion) bad("branch initialization applies to fusion only");
  if (freeze_branches && !text_init && !image_init) bad("freezing branches needs pretrained branch bundles");
}

nlohmann::json TrainConfig::to_json() const {
  nlohmann::json j = {{"epochs", epochs},
                      {"batch_size", batch_size},
                      {"optimizer",
                       {{"name", "adam"},
                        {"learning_rate", adam.learning_rate},
                        {"beta1", adam.beta1},
                        {"beta2", adam.beta2},
                        {"epsilon", adam.epsilon}}},
                      {"seed", seed},
                      {"target", to_string(target)},
                      {"fusion_mode", to_string(fusion_mode)},
                      {"image_norm", to_string(image_norm)},
                      {"max_len", max_len},
                      {"embed_dim", embed_dim},
                      {"trainable_embeddings", trainable_embeddings},
                      {"freeze_branches", freeze_branches},
                      {"text_init", text_init ? text_init->string() : ""},
                      {"image_init", image_init ? image_init->string() : ""}};
  return j;
}

double accuracy(const Network& net, const EncodedSet& set) {
  if (set.size() == 0) throw Error(ErrorCode::kEmptySplit, "no records to score");
  return measure(net, set, 64).second;
}

TrainResult train(const TrainingData& data, const TrainConfig& config, const fs::path& out_dir,
                  const EpochCallback& on_epoch) {
  config.validate();
  if (data.train.size() == 0) throw Error(ErrorCode::kEmptySplit, "training split is empty");
  if (config.target != Target::kText && data.train.features.rows() == 0) {
    throw Error(ErrorCode::kShapeMismatch, "image features are required for the " +
                                               std::string(to_string(config.target)) + " network");
  }

  TrainResult result;
  Network net = build_network(data, config);
  result.initial_loss = measure(net, data.train, config.batch_size).first;

  std::vector<nn::Parameter*> params;
  for (auto* p : net.parameters()) {
    if (p->trainable) params.push_back(p);
  }
  nn::Adam opt(params, config.adam);
  Rng dropout_rng(config.seed ^ 0x9E3779B97F4A7C15ULL);

  std::vector<std::size_t> order(data.train.size());
  for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
    const auto t0 = std::chrono::steady_clock::now();
    std::iota(order.begin(), order.end(), std::size_t{0});
    Rng shuffle(config.seed + epoch);
    shuffle.shuffle(order);

    for (std::size_t start = 0, k = 0; start < order.size(); start += config.batch_size, ++k) {
      const std::span<const std::size_t> idx(order.data() + start,
                                             std::min(config.batch_size, order.size() - start));
      const auto batch = data.train.batch(idx);
      opt.zero_grad();
      const double loss = net.accumulate_gradients(batch, dropout_rng);
      if (!std::isfinite(loss)) {
        std::ostringstream msg;
        msg << "loss became " << loss << " at epoch " << epoch << ", batch " << k << " (records "
            << describe_batch(net, data.train, idx) << ")";
        throw Error(ErrorCode::kNonFiniteLoss, msg.str());
      }
      opt.step();
    }

    models::EpochRecord rec;
    rec.epoch = epoch;
    std::tie(rec.train_loss, rec.train_accuracy) = measure(net, data.train, config.batch_size);
    if (!std::isfinite(rec.train_loss)) {
      throw Error(ErrorCode::kNonFiniteLoss, "training loss is not finite after epoch " + std::to_string(epoch));
    }
    if (data.validation.size() > 0) {
      const auto [vl, va] = measure(net, data.validation, config.batch_size);
      rec.val_loss = vl;
      rec.val_accuracy = va;
    }
    rec.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    result.history.push_back(rec);
    if (on_epoch) on_epoch(rec);
  }

  auto& b = result.bundle;
  b.network = std::move(net);
  b.vocab = data.embeddings.vocab;
  b.embedding_meta = embedding_meta(data.embeddings);
  b.max_len = data.max_len;
  b.extractor = data.extractor;
  b.config = data.config.is_null() ? config.to_json() : data.config;
  b.history = result.history;

  if (!out_dir.empty()) {
    save_checkpoint(b, out_dir / "bundle");
    emit_curves(result.history, out_dir);
  }
  return result;
}

void save_checkpoint(models::ModelBundle& bundle, const fs::path& dir) { models::save_bundle(bundle, dir); }

models::ModelBundle load_checkpoint(const fs::path& dir) { return models::load_bundle(dir); }

}  // namespace vartha::training
