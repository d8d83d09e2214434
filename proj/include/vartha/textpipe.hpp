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

#ifndef VARTHA_TEXTPIPE_HPP_
#define VARTHA_TEXTPIPE_HPP_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace vartha::text {

namespace fs = std::filesystem;

inline constexpr std::string_view kNumToken = "NUM";
inline constexpr std::string_view kPadToken = "<PAD>";
inline constexpr std::string_view kUnkToken = "<UNK>";
inline constexpr int kPadId = 0;
inline constexpr int kUnkId = 1;

/// Normalizes a raw headline:
///   1. `<...>` spans are removed (replaced by a space);
///   2. HTML entities are decoded;
///   3. every maximal run of ASCII or Malayalam digits becomes " NUM ";
///   4. anything outside the Malayalam block, ASCII letters and the
///      zero-width (non-)joiners used by Malayalam script becomes a space;
///   5. whitespace is collapsed and trimmed.
/// Idempotent.
std::string clean_text(std::string_view raw);

// Splits cleaned text on single spaces.
std::vector<std::string> tokenize(std::string_view clean);

using TokenizedCorpus = std::vector<std::vector<std::string>>;

// Index 0 is PAD, 1 is UNK; corpus tokens occupy 2..size()-1.
class Vocab {
 public:
  Vocab();
  explicit Vocab(std::vector<std::string> corpus_tokens);

  std::size_t size() const { return tokens_.size(); }
  int id(std::string_view token) const;  // kUnkId when absent
  bool contains(std::string_view token) const;
  const std::string& token(int id) const { return tokens_.at(static_cast<std::size_t>(id)); }
  const std::vector<std::string>& tokens() const { return tokens_; }

  // {"<PAD>": 0, "<UNK>": 1, token: index, ...}
  std::string to_json() const;
  static Vocab from_json(std::string_view json);

  bool operator==(const Vocab& other) const { return tokens_ == other.tokens_; }

 private:
  struct Hash {
    using is_transparent = void;
    std::size_t operator()(std::string_view s) const { return std::hash<std::string_view>{}(s); }
  };
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, int, Hash, std::equal_to<>> index_;
};

/// Tokens with frequency >= min_count, most frequent first, ties in code
/// point order. Throws EmptyCorpus when the corpus holds no tokens.
Vocab build_vocab(const TokenizedCorpus& corpus, std::size_t min_count = 1);

// Fraction of tokens that map to UNK; 0 for an empty corpus.
double oov_rate(const TokenizedCorpus& corpus, const Vocab& vocab);

struct Word2VecParams {
  std::size_t dim = 300;
  std::size_t window = 5;
  std::size_t negative = 5;
  std::size_t epochs = 10;
  std::size_t min_count = 1;
  double alpha = 0.025;
  double min_alpha = 0.0001;
  double sample = 1e-3;  // frequent-word downsampling threshold; 0 disables
  std::uint64_t seed = 42;
};

struct EmbeddingModel {
  Vocab vocab;
  std::size_t dim = 0;
  std::vector<float> matrix;  // row-major, vocab.size() x dim
  Word2VecParams params;
  std::string source = "word2vec-skipgram";

  std::span<const float> row(std::size_t index) const {
    return {matrix.data() + index * dim, dim};
  }
};

/// Skip-gram with negative sampling, single-threaded so that a fixed seed
/// reproduces the matrix bit for bit. The PAD row is zero and the UNK row is
/// the mean of the corpus-token rows.
EmbeddingModel train_embeddings(const TokenizedCorpus& corpus, const Vocab& vocab,
                                const Word2VecParams& params);

/// Reads vectors in the word2vec text format ("<count> <dim>" header, then
/// "<token> v1 ... vD" lines). Vocabulary tokens missing from the file get
/// small seeded random vectors; PAD and UNK follow the trained-model rules.
EmbeddingModel import_word2vec_text(const fs::path& path, const Vocab& vocab,
                                    std::uint64_t seed = 42);

// vocab.json + embeddings.f32 + embed_meta.json
void save_embeddings(const EmbeddingModel& model, const fs::path& dir);
EmbeddingModel load_embeddings(const fs::path& dir);

struct TextEncoding {
  std::vector<int> ids;  // length max_len, right-padded with kPadId
  std::size_t true_length = 0;
};

TextEncoding encode(std::string_view headline, const Vocab& vocab, std::size_t max_len);

// min(cap, 95th-percentile token count), at least 1.
std::size_t choose_max_len(const TokenizedCorpus& corpus, std::size_t cap = 32);

}  // namespace vartha::text

#endif  // VARTHA_TEXTPIPE_HPP_
