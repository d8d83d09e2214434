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

#include <unordered_map>

#include "vartha/error.hpp"
#include "vartha/training.hpp"

namespace vartha::training {

FeatureSource vgg_feature_source(const image::FeatureCache& cache, const image::Vgg16Extractor* extractor,
                                 fs::path image_dir, std::size_t length) {
  return [&cache, extractor, dir = std::move(image_dir), length](const corpus::NewsRecord& r) {
    image::ImageFeatureVector vec;
    if (extractor) {
      vec = image::cached_features(cache, *extractor, dir / r.image_name, r.image_name);
    } else {
      vec = cache.get(r.image_name);
    }
    if (vec.values.size() != length) vec = image::align_feature_length(std::move(vec), length);
    return std::move(vec.values);
  };
}

models::EncodedSet encode_records(std::span<const corpus::NewsRecord> records, const text::Vocab& vocab,
                                  std::size_t max_len, const FeatureSource& features,
                                  std::vector<Exclusion>* excluded) {
  models::EncodedSet set;
  std::vector<std::vector<float>> columns;
  for (const auto& r : records) {
    std::vector<float> f;
    if (features) {
      try {
        f = features(r);
      } catch (const Error& e) {
        if (!excluded) throw;
        excluded->push_back({r.image_name, std::string(to_string(e.code())) + ": " + e.what()});
        continue;
      }
      if (!columns.empty() && f.size() != columns.front().size()) {
        throw Error(ErrorCode::kShapeMismatch, "feature length differs for " + r.image_name);
      }
      columns.push_back(std::move(f));
    }
    auto enc = text::encode(r.headline, vocab, max_len);
    set.record_ids.push_back(r.image_name);
    set.ids.push_back(std::move(enc.ids));
    set.lengths.push_back(enc.true_length);
    set.labels.push_back(static_cast<int>(r.label));
  }
  if (!columns.empty()) {
    const auto rows = static_cast<Eigen::Index>(columns.front().size());
    set.features.resize(rows, static_cast<Eigen::Index>(columns.size()));
    for (std::size_t c = 0; c < columns.size(); ++c) {
      set.features.col(static_cast<Eigen::Index>(c)) = Eigen::Map<const Eigen::VectorXf>(columns[c].data(), rows);
    }
  }
  return set;
}

nlohmann::json Preprocessed::summary() const {
  nlohmann::json ex = nlohmann::json::array();
  for (const auto& e : excluded) ex.push_back({{"record_id", e.record_id}, {"reason", e.reason}});
  return {{"max_len", max_len},
          {"feature_length", feature_length},
          {"vocab_size", embeddings.vocab.size()},
          {"embed_dim", embeddings.dim},
          {"embedding_source", embeddings.source},
          {"extractor",
           {{"weights_path", extractor.weights_path},
            {"version", extractor.version},
            {"native_length", extractor.native_length}}},
          {"train_records", split.train.size()},
          {"test_records", split.test.size()},
          {"seed", split.seed},
          {"test_fraction", split.test_fraction},
          {"test_oov_rate", test_oov_rate},
          {"excluded", ex}};
}

Preprocessed preprocess(const corpus::DatasetSplit& split, const PreprocessOptions& options) {
  Preprocessed out;
  out.split.seed = split.seed;
  out.split.test_fraction = split.test_fraction;

  // Features first: records without a usable image never reach the
  // vocabulary.
  std::optional<image::Vgg16Extractor> extractor;
  std::unordered_map<std::string, std::vector<float>> features;
  if (!options.extractor_weights.empty()) {
    extractor = image::Vgg16Extractor::load(options.extractor_weights);
    out.extractor = {fs::absolute(options.extractor_weights).lexically_normal().string(), extractor->version(),
                     extractor->feature_length()};
  }
  auto keep_usable = [&](const std::vector<corpus::NewsRecord>& in, std::vector<corpus::NewsRecord>& kept) {
    if (!extractor) {
      kept = in;
      return;
    }
    const image::FeatureCache cache(options.feature_cache_dir, extractor->version(), extractor->feature_length());
    for (const auto& r : in) {
      try {
        features[r.image_name] =
            image::cached_features(cache, *extractor, options.image_dir / r.image_name, r.image_name).values;
        kept.push_back(r);
      } catch (const Error& e) {
        if (e.code() == ErrorCode::kExtractorUnavailable) throw;
        out.excluded.push_back({r.image_name, std::string(to_string(e.code())) + ": " + e.what()});
      }
    }
  };
  keep_usable(split.train, out.split.train);
  keep_usable(split.test, out.split.test);
  if (out.split.train.empty()) throw Error(ErrorCode::kEmptySplit, "no usable training records");
  if (out.split.test.empty()) throw Error(ErrorCode::kEmptySplit, "no usable test records");

  text::TokenizedCorpus train_tokens, test_tokens;
  for (const auto& r : out.split.train) train_tokens.push_back(text::tokenize(text::clean_text(r.headline)));
  for (const auto& r : out.split.test) test_tokens.push_back(text::tokenize(text::clean_text(r.headline)));

  const auto vocab = text::build_vocab(train_tokens, options.word2vec.min_count);
  if (options.pretrained_vectors) {
    out.embeddings = text::import_word2vec_text(*options.pretrained_vectors, vocab, options.word2vec.seed);
    if (out.embeddings.dim != options.word2vec.dim) {
      throw Error(ErrorCode::kShapeMismatch, "imported vectors have dimension " +
                                                 std::to_string(out.embeddings.dim) + ", configured " +
                                                 std::to_string(options.word2vec.dim));
    }
  } else {
    out.embeddings = text::train_embeddings(train_tokens, vocab, options.word2vec);
  }
  out.max_len = text::choose_max_len(train_tokens, options.max_len_cap);
  out.test_oov_rate = text::oov_rate(test_tokens, vocab);

  FeatureSource source;
  if (extractor) {
    out.feature_length =
        options.align == AlignMode::kFeatureLength ? extractor->feature_length() : out.max_len;
    source = [&](const corpus::NewsRecord& r) {
      image::ImageFeatureVector v{features.at(r.image_name), r.image_name};
      if (v.values.size() != out.feature_length) v = image::align_feature_length(std::move(v), out.feature_length);
      return std::move(v.values);
    };
  } else {
    out.feature_length = 0;
  }
  out.train = encode_records(out.split.train, out.embeddings.vocab, out.max_len, source);
  out.test = encode_records(out.split.test, out.embeddings.vocab, out.max_len, source);
  return out;
}

}  // namespace vartha::training
