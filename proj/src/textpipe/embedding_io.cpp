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
#include <fstream>
#include <sstream>

#include "common/rng.hpp"
#include "json.hpp"
#include "textpipe/reserved_rows.hpp"
#include "vartha/error.hpp"
#include "vartha/io.hpp"
#include "vartha/textpipe.hpp"

namespace vartha::text {

void save_embeddings(const EmbeddingModel& model, const fs::path& dir) {
  fs::create_directories(dir);
  const auto& p = model.params;
  nlohmann::json meta = {
      {"dim", model.dim},
      {"vocab_size", model.vocab.size()},
      {"source", model.source},
      {"seed", p.seed},
      {"params",
       {{"window", p.window},
        {"negative", p.negative},
        {"epochs", p.epochs},
        {"min_count", p.min_count},
        {"alpha", p.alpha},
        {"min_alpha", p.min_alpha},
        {"sample", p.sample}}},
  };
  io::write_file_atomic(dir / "vocab.json", model.vocab.to_json());
  io::write_file_atomic(dir / "embeddings.f32", io::encode_f32_le(model.matrix));
  io::write_file_atomic(dir / "embed_meta.json", meta.dump(2) + "\n");
}

EmbeddingModel load_embeddings(const fs::path& dir) {
  EmbeddingModel model;
  try {
    model.vocab = Vocab::from_json(io::read_file(dir / "vocab.json"));
    const auto meta = nlohmann::json::parse(io::read_file(dir / "embed_meta.json"));
    model.dim = meta.at("dim").get<std::size_t>();
    model.source = meta.value("source", "word2vec-skipgram");
    model.params.dim = model.dim;
    model.params.seed = meta.at("seed").get<std::uint64_t>();
    const auto& p = meta.at("params");
    model.params.window = p.at("window").get<std::size_t>();
    model.params.negative = p.at("negative").get<std::size_t>();
    model.params.epochs = p.at("epochs").get<std::size_t>();
    model.params.min_count = p.at("min_count").get<std::size_t>();
    model.params.alpha = p.at("alpha").get<double>();
    model.params.min_alpha = p.at("min_alpha").get<double>();
    model.params.sample = p.at("sample").get<double>();
    if (meta.at("vocab_size").get<std::size_t>() != model.vocab.size()) {
      throw Error(ErrorCode::kShapeMismatch, "embed_meta.json vocab_size disagrees with vocab.json");
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kCorruptBundle, std::string("embed_meta.json: ") + e.what());
  }
  model.matrix = io::decode_f32_le(io::read_file(dir / "embeddings.f32"));
  if (model.matrix.size() != model.vocab.size() * model.dim) {
    throw Error(ErrorCode::kShapeMismatch,
                "embeddings.f32 holds " + std::to_string(model.matrix.size()) + " values, expected " +
                    std::to_string(model.vocab.size()) + " x " + std::to_string(model.dim));
  }
  return model;
}

EmbeddingModel import_word2vec_text(const fs::path& path, const Vocab& vocab, std::uint64_t seed) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path.string());
  std::size_t count = 0, dim = 0;
  {
    std::string header;
    std::getline(in, header);
    std::istringstream hs(header);
    if (!(hs >> count >> dim) || dim == 0) {
      throw Error(ErrorCode::kInvalidArgument, "word2vec header must read '<count> <dim>'");
    }
  }

  EmbeddingModel model;
  model.vocab = vocab;
  model.dim = dim;
  model.params.dim = dim;
  model.params.seed = seed;
  model.source = "imported:" + path.filename().string();
  model.matrix.assign(vocab.size() * dim, 0.f);
  std::vector<bool> filled(vocab.size(), false);

  std::string line;
  while (std::getline(in, line)) {
    std::istringstream ls(line);
    std::string token;
    if (!(ls >> token) || !vocab.contains(token)) continue;
    const auto id = static_cast<std::size_t>(vocab.id(token));
    for (std::size_t k = 0; k < dim; ++k) {
      float v = 0.f;
      if (!(ls >> v) || !std::isfinite(v)) {
        throw Error(ErrorCode::kInvalidArgument, "bad vector for token '" + token + "'");
      }
      model.matrix[id * dim + k] = v;
    }
    filled[id] = true;
  }

  Rng rng(seed);
  for (std::size_t id = 2; id < vocab.size(); ++id) {
    if (filled[id]) continue;
    for (std::size_t k = 0; k < dim; ++k) {
      model.matrix[id * dim + k] = static_cast<float>((rng.uniform() - 0.5) / static_cast<double>(dim));
    }
  }
  set_reserved_rows(model);
  return model;
}

}  // namespace vartha::text
