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

#include "common/rng.hpp"
#include "vartha/error.hpp"
#include "vartha/models.hpp"

namespace vartha::models {
namespace {

std::size_t dense_params(std::size_t in, std::size_t out) { return in * out + out; }

std::size_t bilstm_params(std::size_t in, std::size_t units) {
  return 2 * (4 * units * (in + units) + 4 * units);
}

Matrix vstack(const Matrix& top, const Matrix& bottom) {
  Matrix out(top.rows() + bottom.rows(), top.cols());
  out << top, bottom;
  return out;
}

void append(std::vector<nn::Parameter*>& to, std::vector<nn::Parameter*> from) {
  to.insert(to.end(), from.begin(), from.end());
}

}  // namespace

std::string_view to_string(Target target) {
  switch (target) {
    case Target::kText: return "text";
    case Target::kImage: return "image";
    case Target::kFusion: return "fusion";
  }
  return "fusion";
}

std::string_view to_string(FusionMode mode) {
  return mode == FusionMode::kPenultimate ? "penultimate" : "softmax_output";
}

Target parse_target(std::string_view s) {
  if (s == "text") return Target::kText;
  if (s == "image") return Target::kImage;
  if (s == "fusion") return Target::kFusion;
  throw Error(ErrorCode::kInvalidArgument, "unknown target '" + std::string(s) + "' (text|image|fusion)");
}

std::string_view to_string(InputNorm norm) { return norm == InputNorm::kL2 ? "l2" : "none"; }

InputNorm parse_input_norm(std::string_view s) {
  if (s == "l2") return InputNorm::kL2;
  if (s == "none") return InputNorm::kNone;
  throw Error(ErrorCode::kInvalidArgument, "unknown image input norm '" + std::string(s) + "' (l2|none)");
}

FusionMode parse_fusion_mode(std::string_view s) {
  if (s == "penultimate") return FusionMode::kPenultimate;
  if (s == "softmax_output") return FusionMode::kSoftmaxOutput;
  throw Error(ErrorCode::kInvalidArgument,
              "unknown fusion mode '" + std::string(s) + "' (penultimate|softmax_output)");
}

std::size_t TextBranchSpec::parameter_count() const {
  const std::size_t V = vocab_size, D = embed_dim, H1 = lstm1_units, H2 = lstm2_units;
  return V * D + bilstm_params(D, H1) + bilstm_params(2 * H1, H2) + dense_params(2 * H2, dense_units) +
         dense_params(dense_units, num_classes);
}

std::size_t ImageBranchSpec::parameter_count() const {
  return dense_params(input_len, dense1) + dense_params(dense1, dense2) + dense_params(dense2, num_classes);
}

int FusionSpec::input_width(const TextBranchSpec& text, const ImageBranchSpec& image) const {
  return mode == FusionMode::kPenultimate ? text.dense_units + image.dense2 : text.num_classes + image.num_classes;
}

std::size_t FusionSpec::parameter_count(const TextBranchSpec& text, const ImageBranchSpec& image) const {
  return dense_params(input_width(text, image), fused_dense) + dense_params(fused_dense, num_classes);
}

Matrix sequence_mask(const std::vector<std::size_t>& lengths, std::size_t max_len) {
  Matrix mask = Matrix::Zero(static_cast<Eigen::Index>(max_len), static_cast<Eigen::Index>(lengths.size()));
  for (std::size_t b = 0; b < lengths.size(); ++b) {
    const auto n = std::min(lengths[b], max_len);
    mask.col(static_cast<Eigen::Index>(b)).head(static_cast<Eigen::Index>(n)).setOnes();
  }
  return mask;
}

// ---------------------------------------------------------------------------

TextBranch::TextBranch(const TextBranchSpec& spec)
    : embedding("text/embedding", spec.vocab_size, spec.embed_dim),
      lstm1("text/bilstm_1", spec.embed_dim, spec.lstm1_units),
      lstm2("text/bilstm_2", 2 * spec.lstm1_units, spec.lstm2_units),
      dense("text/dense", 2 * spec.lstm2_units, spec.dense_units, nn::Activation::kRelu),
      head("text/output", spec.dense_units, spec.num_classes, nn::Activation::kLinear),
      spec_(spec) {
  embedding.table.trainable = spec.trainable_embeddings;
}

BranchOutput TextBranch::forward(const Batch& batch, Rng* dropout_rng, Cache* cache) const {
  if (batch.ids.size() != batch.lengths.size()) {
    throw Error(ErrorCode::kShapeMismatch, "text batch ids and lengths disagree");
  }
  for (const auto& row : batch.ids) {
    if (row.size() != static_cast<std::size_t>(spec_.max_len)) {
      throw Error(ErrorCode::kShapeMismatch, "encoded headline length " + std::to_string(row.size()) +
                                                 " does not match max_len " + std::to_string(spec_.max_len));
    }
  }
  const Matrix mask = sequence_mask(batch.lengths, static_cast<std::size_t>(spec_.max_len));
  BranchOutput out;
  const bool training = dropout_rng != nullptr;
  if (cache) {
    cache->training = training;
    auto x = embedding.forward(batch.ids, cache->embedding);
    auto l1 = lstm1.forward(x, mask, cache->lstm1);
    auto l2 = lstm2.forward(l1.outputs, mask, cache->lstm2);
    Matrix d = dense.forward(l2.final_state, cache->dense);
    out.penultimate = training ? nn::dropout(d, spec_.dropout, *dropout_rng, cache->dropout_mask) : d;
    out.logits = head.forward(out.penultimate, cache->head);
    out.lstm1 = std::move(l1.outputs);
    out.lstm2 = std::move(l2.final_state);
  } else {
    auto x = embedding.forward(batch.ids);
    auto l1 = lstm1.forward(x, mask);
    auto l2 = lstm2.forward(l1.outputs, mask);
    Matrix d = dense.forward(l2.final_state);
    if (training) {
      Matrix unused;
      d = nn::dropout(d, spec_.dropout, *dropout_rng, unused);
    }
    out.penultimate = std::move(d);
    out.logits = head.forward(out.penultimate);
    out.lstm1 = std::move(l1.outputs);
    out.lstm2 = std::move(l2.final_state);
  }
  return out;
}

void TextBranch::backward(const Matrix& d_penultimate, const Matrix& d_logits, const Cache& cache) {
  Matrix d_pen = d_penultimate;
  if (d_logits.size() > 0) {
    Matrix from_head = head.backward(d_logits, cache.head);
    d_pen = d_pen.size() > 0 ? Matrix(d_pen + from_head) : from_head;
  }
  if (cache.training) d_pen = d_pen.cwiseProduct(cache.dropout_mask);
  const Matrix d_l2 = dense.backward(d_pen, cache.dense);
  const auto d_l1 = lstm2.backward({}, d_l2, cache.lstm2);
  const Matrix no_final = Matrix::Zero(2 * spec_.lstm1_units, d_l2.cols());
  const auto d_x = lstm1.backward(d_l1, no_final, cache.lstm1);
  embedding.backward(d_x, cache.embedding);
}

std::vector<nn::Parameter*> TextBranch::parameters() {
  std::vector<nn::Parameter*> p;
  append(p, embedding.parameters());
  append(p, lstm1.parameters());
  append(p, lstm2.parameters());
  append(p, dense.parameters());
  append(p, head.parameters());
  return p;
}

std::size_t TextBranch::parameter_count() const {
  return embedding.parameter_count() + lstm1.parameter_count() + lstm2.parameter_count() +
         dense.parameter_count() + head.parameter_count();
}

// ---------------------------------------------------------------------------

ImageBranch::ImageBranch(const ImageBranchSpec& spec)
    : dense1("image/dense_1", spec.input_len, spec.dense1, nn::Activation::kRelu),
      dense2("image/dense_2", spec.dense1, spec.dense2, nn::Activation::kRelu),
      head("image/output", spec.dense2, spec.num_classes, nn::Activation::kLinear),
      spec_(spec) {
  if (spec.input_len < 1) throw Error(ErrorCode::kInvalidArgument, "image input length must be >= 1");
}

BranchOutput ImageBranch::forward(const Batch& batch, Rng* dropout_rng, Cache* cache) const {
  if (batch.image.rows() != spec_.input_len) {
    throw Error(ErrorCode::kShapeMismatch, "image feature length " + std::to_string(batch.image.rows()) +
                                               " does not match " + std::to_string(spec_.input_len));
  }
  Matrix x = batch.image;
  if (spec_.input_norm == InputNorm::kL2) {
    for (Eigen::Index c = 0; c < x.cols(); ++c) {
      const double n = x.col(c).norm();
      if (n > 0.0) x.col(c) /= n;
    }
  }
  BranchOutput out;
  const bool training = dropout_rng != nullptr;
  if (cache) {
    cache->training = training;
    Matrix h = dense1.forward(x, cache->dense1);
    if (training) h = nn::dropout(h, spec_.dropout, *dropout_rng, cache->dropout_mask);
    out.penultimate = dense2.forward(h, cache->dense2);
    out.logits = head.forward(out.penultimate, cache->head);
  } else {
    Matrix h = dense1.forward(x);
    if (training) {
      Matrix unused;
      h = nn::dropout(h, spec_.dropout, *dropout_rng, unused);
    }
    out.penultimate = dense2.forward(h);
    out.logits = head.forward(out.penultimate);
  }
  return out;
}

void ImageBranch::backward(const Matrix& d_penultimate, const Matrix& d_logits, const Cache& cache) {
  Matrix d_pen = d_penultimate;
  if (d_logits.size() > 0) {
    Matrix from_head = head.backward(d_logits, cache.head);
    d_pen = d_pen.size() > 0 ? Matrix(d_pen + from_head) : from_head;
  }
  Matrix d_h = dense2.backward(d_pen, cache.dense2);
  if (cache.training) d_h = d_h.cwiseProduct(cache.dropout_mask);
  dense1.backward(d_h, cache.dense1, /*input_grad=*/false);  // features are fixed inputs
}

std::vector<nn::Parameter*> ImageBranch::parameters() {
  std::vector<nn::Parameter*> p;
  append(p, dense1.parameters());
  append(p, dense2.parameters());
  append(p, head.parameters());
  return p;
}

std::size_t ImageBranch::parameter_count() const {
  return dense1.parameter_count() + dense2.parameter_count() + head.parameter_count();
}

// ---------------------------------------------------------------------------

TextBranch build_text_branch(const TextBranchSpec& spec, const text::EmbeddingModel& embeddings,
                             std::uint64_t seed) {
  if (embeddings.dim != static_cast<std::size_t>(spec.embed_dim)) {
    throw Error(ErrorCode::kShapeMismatch, "embedding dimension " + std::to_string(embeddings.dim) +
                                               " != spec embed_dim " + std::to_string(spec.embed_dim));
  }
  if (embeddings.vocab.size() != static_cast<std::size_t>(spec.vocab_size)) {
    throw Error(ErrorCode::kShapeMismatch, "embedding vocabulary " + std::to_string(embeddings.vocab.size()) +
                                               " != spec vocab_size " + std::to_string(spec.vocab_size));
  }
  if (spec.max_len < 1) throw Error(ErrorCode::kInvalidArgument, "max_len must be >= 1");
  TextBranch branch(spec);
  Rng rng(seed);
  // The (D x V) column-major table has the same memory layout as the
  // row-major (V x D) word-vector matrix.
  branch.embedding.table.value =
      Eigen::Map<const Eigen::MatrixXf>(embeddings.matrix.data(), spec.embed_dim, spec.vocab_size).cast<double>();
  branch.embedding.table.value.col(text::kPadId).setZero();
  branch.lstm1.init(rng);
  branch.lstm2.init(rng);
  branch.dense.init(rng);
  branch.head.init(rng);
  return branch;
}

ImageBranch build_image_branch(const ImageBranchSpec& spec, std::uint64_t seed) {
  ImageBranch branch(spec);
  Rng rng(seed ^ 0x9E3779B97F4A7C15ULL);
  branch.dense1.init(rng);
  branch.dense2.init(rng);
  branch.head.init(rng);
  return branch;
}

Network build_text_network(TextBranch branch) {
  Network net;
  net.target_ = Target::kText;
  net.text_spec_ = branch.spec();
  net.text_.emplace(std::move(branch));
  return net;
}

Network build_image_network(ImageBranch branch) {
  Network net;
  net.target_ = Target::kImage;
  net.image_spec_ = branch.spec();
  net.image_.emplace(std::move(branch));
  return net;
}

Network build_fusion_model(TextBranch text, ImageBranch image, const FusionSpec& spec, std::uint64_t seed) {
  if (text.spec().num_classes != image.spec().num_classes) {
    throw Error(ErrorCode::kShapeMismatch, "branches disagree on the number of classes");
  }
  Network net;
  net.target_ = Target::kFusion;
  net.text_spec_ = text.spec();
  net.image_spec_ = image.spec();
  net.fusion_spec_ = spec;
  const int width = spec.input_width(net.text_spec_, net.image_spec_);
  FusionHead head{nn::Dense("fusion/dense", width, spec.fused_dense, nn::Activation::kRelu),
                  nn::Dense("fusion/output", spec.fused_dense, spec.num_classes, nn::Activation::kLinear)};
  Rng rng(seed ^ 0xD1B54A32D192ED03ULL);
  head.dense.init(rng);
  head.head.init(rng);
  net.text_.emplace(std::move(text));
  net.image_.emplace(std::move(image));
  net.fusion_.emplace(std::move(head));
  return net;
}

Network Network::skeleton(Target target, const TextBranchSpec& text, const ImageBranchSpec& image,
                          const FusionSpec& fusion) {
  switch (target) {
    case Target::kText:
      return build_text_network(TextBranch(text));
    case Target::kImage:
      return build_image_network(ImageBranch(image));
    case Target::kFusion: {
      Network net = build_fusion_model(TextBranch(text), ImageBranch(image), fusion, 0);
      return net;
    }
  }
  throw Error(ErrorCode::kInvalidArgument, "unknown target");
}

// ---------------------------------------------------------------------------

Matrix Network::logits(const Batch& batch, Rng* dropout_rng, Cache* cache) const {
  switch (target_) {
    case Target::kText: {
      auto out = text_->forward(batch, dropout_rng, cache ? &cache->text : nullptr);
      return out.logits;
    }
    case Target::kImage: {
      auto out = image_->forward(batch, dropout_rng, cache ? &cache->image : nullptr);
      return out.logits;
    }
    case Target::kFusion:
      break;
  }
  auto t = text_->forward(batch, dropout_rng, cache ? &cache->text : nullptr);
  auto i = image_->forward(batch, dropout_rng, cache ? &cache->image : nullptr);
  Matrix input;
  if (fusion_spec_.mode == FusionMode::kPenultimate) {
    input = vstack(t.penultimate, i.penultimate);
  } else {
    Matrix pt = nn::softmax(t.logits), pi = nn::softmax(i.logits);
    input = vstack(pt, pi);
    if (cache) {
      cache->text_probs = std::move(pt);
      cache->image_probs = std::move(pi);
    }
  }
  if (cache) {
    const Matrix h = fusion_->dense.forward(input, cache->fused);
    return fusion_->head.forward(h, cache->head);
  }
  return fusion_->head.forward(fusion_->dense.forward(input));
}

Matrix Network::predict_proba(const Batch& batch) const { return nn::softmax(logits(batch)); }

Network::Taps Network::inspect(const Batch& batch) const {
  Taps taps;
  if (text_) taps.text = text_->forward(batch);
  if (image_) taps.image = image_->forward(batch);
  if (target_ == Target::kFusion) {
    taps.fusion_input = fusion_spec_.mode == FusionMode::kPenultimate
                            ? vstack(taps.text.penultimate, taps.image.penultimate)
                            : vstack(nn::softmax(taps.text.logits), nn::softmax(taps.image.logits));
  }
  taps.probabilities = predict_proba(batch);
  return taps;
}

double Network::loss(const Batch& batch) const { return nn::softmax_cross_entropy(logits(batch), batch.labels); }

double Network::accumulate_gradients(const Batch& batch, Rng& dropout_rng) {
  Cache cache;
  const Matrix z = logits(batch, &dropout_rng, &cache);
  Matrix dz;
  const double loss = nn::softmax_cross_entropy(z, batch.labels, &dz);
  switch (target_) {
    case Target::kText:
      text_->backward(Matrix(), dz, cache.text);
      return loss;
    case Target::kImage:
      image_->backward(Matrix(), dz, cache.image);
      return loss;
    case Target::kFusion:
      break;
  }
  const Matrix dh = fusion_->head.backward(dz, cache.head);
  const Matrix din = fusion_->dense.backward(dh, cache.fused);
  if (fusion_spec_.mode == FusionMode::kPenultimate) {
    const auto wt = text_spec_.dense_units;
    text_->backward(din.topRows(wt), Matrix(), cache.text);
    image_->backward(din.bottomRows(din.rows() - wt), Matrix(), cache.image);
  } else {
    const auto ct = text_spec_.num_classes;
    text_->backward(Matrix(), nn::softmax_backward(cache.text_probs, din.topRows(ct)), cache.text);
    image_->backward(Matrix(), nn::softmax_backward(cache.image_probs, din.bottomRows(din.rows() - ct)),
                     cache.image);
  }
  return loss;
}

std::vector<nn::Parameter*> Network::parameters() {
  std::vector<nn::Parameter*> p;
  if (text_) append(p, text_->parameters());
  if (image_) append(p, image_->parameters());
  if (fusion_) {
    append(p, fusion_->dense.parameters());
    append(p, fusion_->head.parameters());
  }
  return p;
}

std::size_t Network::parameter_count() const {
  std::size_t n = 0;
  if (text_) n += text_->parameter_count();
  if (image_) n += image_->parameter_count();
  if (fusion_) n += fusion_->dense.parameter_count() + fusion_->head.parameter_count();
  return n;
}

}  // namespace vartha::models
