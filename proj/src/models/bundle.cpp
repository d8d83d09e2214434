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

#include <cmath>
#include <cstring>
#include <map>

#include "vartha/error.hpp"
#include "vartha/io.hpp"
#include "vartha/models.hpp"

namespace vartha::models {
namespace {

constexpr std::string_view kWeightsMagic = "VARTHAW1";

[[noreturn]] void corrupt(const std::string& what) { throw Error(ErrorCode::kCorruptBundle, what); }

nlohmann::json to_json(const TextBranchSpec& s) {
  return {{"vocab_size", s.vocab_size},   {"embed_dim", s.embed_dim},     {"max_len", s.max_len},
          {"lstm1_units", s.lstm1_units}, {"lstm2_units", s.lstm2_units}, {"dense_units", s.dense_units},
          {"dropout", s.dropout},         {"num_classes", s.num_classes},
          {"trainable_embeddings", s.trainable_embeddings}};
}

nlohmann::json to_json(const ImageBranchSpec& s) {
  return {{"input_len", s.input_len}, {"input_norm", to_string(s.input_norm)}, {"dense1", s.dense1},
          {"dropout", s.dropout},     {"dense2", s.dense2},                       {"num_classes", s.num_classes}};
}

nlohmann::json to_json(const FusionSpec& s) {
  return {{"mode", to_string(s.mode)}, {"fused_dense", s.fused_dense}, {"num_classes", s.num_classes}};
}

TextBranchSpec text_spec_from(const nlohmann::json& j) {
  TextBranchSpec s;
  s.vocab_size = j.at("vocab_size");
  s.embed_dim = j.at("embed_dim");
  s.max_len = j.at("max_len");
  s.lstm1_units = j.at("lstm1_units");
  s.lstm2_units = j.at("lstm2_units");
  s.dense_units = j.at("dense_units");
  s.dropout = j.at("dropout");
  s.num_classes = j.at("num_classes");
  s.trainable_embeddings = j.at("trainable_embeddings");
  return s;
}

ImageBranchSpec image_spec_from(const nlohmann::json& j) {
  ImageBranchSpec s;
  s.input_len = j.at("input_len");
  s.input_norm = parse_input_norm(j.at("input_norm").get<std::string>());
  s.dense1 = j.at("dense1");
  s.dropout = j.at("dropout");
  s.dense2 = j.at("dense2");
  s.num_classes = j.at("num_classes");
  return s;
}

FusionSpec fusion_spec_from(const nlohmann::json& j) {
  FusionSpec s;
  s.mode = parse_fusion_mode(j.at("mode").get<std::string>());
  s.fused_dense = j.at("fused_dense");
  s.num_classes = j.at("num_classes");
  return s;
}

void put_u32(std::string& out, std::uint32_t v) {
  char b[4];
  std::memcpy(b, &v, 4);
  out.append(b, 4);
}

std::string encode_weights(Network& net) {
  std::string out(kWeightsMagic);
  const auto params = net.parameters();
  put_u32(out, static_cast<std::uint32_t>(params.size()));
  for (const auto* p : params) {
    put_u32(out, static_cast<std::uint32_t>(p->name.size()));
    out += p->name;
    put_u32(out, static_cast<std::uint32_t>(p->value.rows()));
    put_u32(out, static_cast<std::uint32_t>(p->value.cols()));
    out.append(reinterpret_cast<const char*>(p->value.data()), p->size() * sizeof(double));
  }
  return out;
}

void decode_weights(std::string_view data, Network& net) {
  std::size_t pos = 0;
  auto take = [&](std::size_t n) {
    if (n > data.size() - pos) corrupt("weights.bin is truncated");
    auto s = data.substr(pos, n);
    pos += n;
    return s;
  };
  auto u32 = [&] {
    std::uint32_t v;
    std::memcpy(&v, take(4).data(), 4);
    return v;
  };
  if (take(kWeightsMagic.size()) != kWeightsMagic) corrupt("weights.bin has a bad header");

  std::map<std::string, nn::Parameter*, std::less<>> by_name;
  for (auto* p : net.parameters()) by_name.emplace(p->name, p);
  const auto count = u32();
  if (count != by_name.size()) {
    corrupt("ShapeMismatch: weights.bin holds " + std::to_string(count) + " tensors, the specs need " +
            std::to_string(by_name.size()));
  }
  for (std::uint32_t k = 0; k < count; ++k) {
    const std::string name(take(u32()));
    const auto rows = u32(), cols = u32();
    auto it = by_name.find(name);
    if (it == by_name.end()) corrupt("ShapeMismatch: unexpected tensor '" + name + "' in weights.bin");
    auto* p = it->second;
    if (rows != p->value.rows() || cols != p->value.cols()) {
      corrupt("ShapeMismatch: tensor '" + name + "' is " + std::to_string(rows) + "x" + std::to_string(cols) +
              ", specs need " + std::to_string(p->value.rows()) + "x" + std::to_string(p->value.cols()));
    }
    std::memcpy(p->value.data(), take(p->size() * sizeof(double)).data(), p->size() * sizeof(double));
    p->grad.setZero();
  }
  if (pos != data.size()) corrupt("weights.bin has trailing bytes");
}

}  // namespace

nlohmann::json to_json(const EpochRecord& r) {
  nlohmann::json j = {{"epoch", r.epoch},
                      {"train_loss", r.train_loss},
                      {"train_accuracy", r.train_accuracy},
                      {"val_loss", nullptr},
                      {"val_accuracy", nullptr},
                      {"wall_seconds", r.wall_seconds}};
  if (r.val_loss) j["val_loss"] = *r.val_loss;
  if (r.val_accuracy) j["val_accuracy"] = *r.val_accuracy;
  return j;
}

EpochRecord epoch_record_from_json(const nlohmann::json& j) {
  EpochRecord r;
  r.epoch = j.at("epoch");
  r.train_loss = j.at("train_loss");
  r.train_accuracy = j.at("train_accuracy");
  if (!j.at("val_loss").is_null()) r.val_loss = j.at("val_loss").get<double>();
  if (!j.at("val_accuracy").is_null()) r.val_accuracy = j.at("val_accuracy").get<double>();
  r.wall_seconds = j.at("wall_seconds");
  return r;
}

Batch EncodedSet::batch(std::span<const std::size_t> indices) const {
  Batch b;
  b.ids.reserve(indices.size());
  b.lengths.reserve(indices.size());
  b.labels.reserve(indices.size());
  if (features.rows() > 0) b.image.resize(features.rows(), static_cast<Eigen::Index>(indices.size()));
  for (std::size_t k = 0; k < indices.size(); ++k) {
    const auto i = indices[k];
    if (!ids.empty()) {
      b.ids.push_back(ids[i]);
      b.lengths.push_back(lengths[i]);
    }
    b.labels.push_back(labels[i]);
    if (features.rows() > 0) {
      b.image.col(static_cast<Eigen::Index>(k)) = features.col(static_cast<Eigen::Index>(i)).cast<double>();
    }
  }
  return b;
}

Batch EncodedSet::all() const {
  std::vector<std::size_t> idx(size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  return batch(idx);
}

void save_bundle(ModelBundle& bundle, const fs::path& dir) {
  fs::create_directories(dir);
  const std::string weights = encode_weights(bundle.network);
  const std::string digest = io::sha1_hex(weights);
  bundle.version = std::string(to_string(bundle.network.target())) + "-" + digest.substr(0, 12);

  nlohmann::json history = nlohmann::json::array();
  for (const auto& r : bundle.history) history.push_back(to_json(r));

  const auto& net = bundle.network;
  nlohmann::json meta = {
      {"format", kBundleFormat},
      {"version", bundle.version},
      {"target", to_string(net.target())},
      {"text_spec", to_json(net.text_spec())},
      {"image_spec", to_json(net.image_spec())},
      {"fusion_spec", to_json(net.fusion_spec())},
      {"max_len", bundle.max_len},
      {"vocab_size", bundle.vocab.size()},
      {"parameter_count", net.parameter_count()},
      {"extractor",
       {{"weights_path", bundle.extractor.weights_path},
        {"version", bundle.extractor.version},
        {"native_length", bundle.extractor.native_length}}},
      {"weights_file", "weights.bin"},
      {"weights_sha1", digest},
      {"numerics", "float64 parameters, single-threaded kernels; bit-reproducible for a fixed seed"},
      {"config", bundle.config},
      {"history", history},
  };
  io::write_file_atomic(dir / "weights.bin", weights);
  io::write_file_atomic(dir / "vocab.json", bundle.vocab.to_json());
  io::write_file_atomic(dir / "embed_meta.json", bundle.embedding_meta.dump(2) + "\n");
  io::write_file_atomic(dir / "bundle.json", meta.dump(2) + "\n");
}

ModelBundle load_bundle(const fs::path& dir) {
  for (const char* f : {"bundle.json", "vocab.json", "embed_meta.json", "weights.bin"}) {
    std::error_code ec;
    if (!fs::is_regular_file(dir / f, ec)) corrupt("bundle at '" + dir.string() + "' lacks " + f);
  }

  ModelBundle bundle;
  nlohmann::json meta;
  try {
    meta = nlohmann::json::parse(io::read_file(dir / "bundle.json"));
    if (meta.at("format") != kBundleFormat) corrupt("unsupported bundle format");
    const auto target = parse_target(meta.at("target").get<std::string>());
    bundle.network = Network::skeleton(target, text_spec_from(meta.at("text_spec")),
                                       image_spec_from(meta.at("image_spec")),
                                       fusion_spec_from(meta.at("fusion_spec")));
    bundle.version = meta.at("version");
    bundle.max_len = meta.at("max_len");
    bundle.extractor.weights_path = meta.at("extractor").at("weights_path");
    bundle.extractor.version = meta.at("extractor").at("version");
    bundle.extractor.native_length = meta.at("extractor").at("native_length");
    bundle.config = meta.at("config");
    for (const auto& r : meta.at("history")) bundle.history.push_back(epoch_record_from_json(r));
    bundle.embedding_meta = nlohmann::json::parse(io::read_file(dir / "embed_meta.json"));
  } catch (const nlohmann::json::exception& e) {
    corrupt(std::string("bundle.json: ") + e.what());
  } catch (const Error& e) {
    if (e.code() == ErrorCode::kCorruptBundle) throw;
    corrupt(e.what());
  }

  try {
    bundle.vocab = text::Vocab::from_json(io::read_file(dir / "vocab.json"));
  } catch (const Error& e) {
    corrupt(e.what());
  }
  const auto& ts = bundle.network.text_spec();
  if (bundle.vocab.size() != meta.at("vocab_size").get<std::size_t>() ||
      (bundle.network.target() != Target::kImage && bundle.vocab.size() != static_cast<std::size_t>(ts.vocab_size))) {
    corrupt("ShapeMismatch: vocab.json has " + std::to_string(bundle.vocab.size()) +
            " entries, the text branch expects " + std::to_string(ts.vocab_size));
  }
  if (bundle.network.target() != Target::kImage && static_cast<std::size_t>(ts.max_len) != bundle.max_len) {
    corrupt("ShapeMismatch: max_len disagrees with the text spec");
  }

  const std::string weights = io::read_file(dir / "weights.bin");
  if (io::sha1_hex(weights) != meta.at("weights_sha1").get<std::string>()) {
    corrupt("weights.bin does not match the digest recorded in bundle.json");
  }
  decode_weights(weights, bundle.network);
  return bundle;
}

}  // namespace vartha::models
