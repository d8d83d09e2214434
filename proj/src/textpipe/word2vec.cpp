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
#include <cmath>

#include "common/rng.hpp"
#include "textpipe/reserved_rows.hpp"
#include "vartha/error.hpp"
#include "vartha/textpipe.hpp"

namespace vartha::text {
namespace {

// Cumulative unigram^0.75 distribution over corpus-token ids (>= 2).
class NegativeSampler {
 public:
  explicit NegativeSampler(const std::vector<std::size_t>& counts) {
    double total = 0.0;
    for (std::size_t id = 2; id < counts.size(); ++id) {
      if (counts[id] == 0) continue;
      total += std::pow(static_cast<double>(counts[id]), 0.75);
      ids_.push_back(static_cast<int>(id));
      cumulative_.push_back(total);
    }
    for (auto& c : cumulative_) c /= total;
  }

  int draw(Rng& rng) const {
    const double u = rng.uniform();
    auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), u);
    if (it == cumulative_.end()) --it;
    return ids_[static_cast<std::size_t>(it - cumulative_.begin())];
  }

 private:
  std::vector<int> ids_;
  std::vector<double> cumulative_;
};

float sigmoid(float x) {
  if (x > 30.f) return 1.f;
  if (x < -30.f) return 0.f;
  return 1.f / (1.f + std::exp(-x));
}

}  // namespace

EmbeddingModel train_embeddings(const TokenizedCorpus& corpus, const Vocab& vocab,
                                const Word2VecParams& params) {
  if (params.dim == 0 || params.window == 0) {
    throw Error(ErrorCode::kInvalidArgument, "word2vec dim and window must be >= 1");
  }
  const std::size_t V = vocab.size();
  const std::size_t D = params.dim;

  std::vector<std::vector<int>> sentences;
  std::vector<std::size_t> counts(V, 0);
  std::size_t total_words = 0;
  for (const auto& s : corpus) {
    std::vector<int> ids;
    for (const auto& tok : s) {
      const int id = vocab.id(tok);
      if (id < 2) continue;
      ids.push_back(id);
      ++counts[id];
    }
    total_words += ids.size();
    if (!ids.empty()) sentences.push_back(std::move(ids));
  }
  if (total_words == 0) throw Error(ErrorCode::kEmptyCorpus, "no in-vocabulary tokens to train on");

  // Downsampling keep-probabilities in the form popularized by word2vec.
  std::vector<double> keep(V, 1.0);
  if (params.sample > 0.0) {
    const double threshold = params.sample * static_cast<double>(total_words);
    for (std::size_t id = 2; id < V; ++id) {
      if (counts[id] == 0) continue;
      const double c = static_cast<double>(counts[id]);
      keep[id] = std::min(1.0, (std::sqrt(c / threshold) + 1.0) * threshold / c);
    }
  }

  Rng rng(params.seed);
  std::vector<float> syn0(V * D, 0.f);
  std::vector<float> syn1(V * D, 0.f);
  for (std::size_t id = 2; id < V; ++id) {
    for (std::size_t k = 0; k < D; ++k) {
      syn0[id * D + k] = static_cast<float>((rng.uniform() - 0.5) / static_cast<double>(D));
    }
  }

  const NegativeSampler sampler(counts);
  const double total_steps = static_cast<double>(params.epochs * total_words);
  std::size_t processed = 0;
  std::vector<float> grad(D);
  std::vector<int> kept;

  for (std::size_t epoch = 0; epoch < params.epochs; ++epoch) {
    for (const auto& sentence : sentences) {
      kept.clear();
      for (int id : sentence) {
        if (keep[id] >= 1.0 || rng.uniform() < keep[id]) kept.push_back(id);
      }
      for (std::size_t pos = 0; pos < kept.size(); ++pos) {
        const double progress = static_cast<double>(processed) / std::max(total_steps, 1.0);
        const auto alpha = static_cast<float>(
            std::max(params.min_alpha, params.alpha - (params.alpha - params.min_alpha) * progress));
        const int center = kept[pos];
        const std::size_t reach = params.window - rng.below(params.window);
        const std::size_t lo = pos >= reach ? pos - reach : 0;
        const std::size_t hi = std::min(kept.size() - 1, pos + reach);
        for (std::size_t c = lo; c <= hi; ++c) {
          if (c == pos) continue;
          float* in = &syn0[static_cast<std::size_t>(kept[c]) * D];
          std::fill(grad.begin(), grad.end(), 0.f);
          for (std::size_t d = 0; d <= params.negative; ++d) {
            int target = center;
            float label = 1.f;
            if (d > 0) {
              target = sampler.draw(rng);
              if (target == center) continue;
              label = 0.f;
            }
            float* out = &syn1[static_cast<std::size_t>(target) * D];
            float dot = 0.f;
            for (std::size_t k = 0; k < D; ++k) dot += in[k] * out[k];
            const float g = (label - sigmoid(dot)) * alpha;
            for (std::size_t k = 0; k < D; ++k) grad[k] += g * out[k];
            for (std::size_t k = 0; k < D; ++k) out[k] += g * in[k];
          }
          for (std::size_t k = 0; k < D; ++k) in[k] += grad[k];
        }
      }
      processed += sentence.size();
    }
  }

  EmbeddingModel model;
  model.vocab = vocab;
  model.dim = D;
  model.params = params;
  model.matrix = std::move(syn0);
  set_reserved_rows(model);
  return model;
}

}  // namespace vartha::text
