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
#include <map>

#include "json.hpp"
#include "vartha/error.hpp"
#include "vartha/textpipe.hpp"

namespace vartha::text {

Vocab::Vocab() : Vocab(std::vector<std::string>{}) {}

Vocab::Vocab(std::vector<std::string> corpus_tokens) {
  tokens_.reserve(corpus_tokens.size() + 2);
  tokens_.emplace_back(kPadToken);
  tokens_.emplace_back(kUnkToken);
  for (auto& t : corpus_tokens) tokens_.push_back(std::move(t));
  for (std::size_t i = 0; i < tokens_.size(); ++i) {
    if (!index_.emplace(tokens_[i], static_cast<int>(i)).second) {
      throw Error(ErrorCode::kInvalidArgument, "duplicate vocabulary token '" + tokens_[i] + "'");
    }
  }
}

int Vocab::id(std::string_view token) const {
  const auto it = index_.find(token);
  return it == index_.end() || it->second < 2 ? kUnkId : it->second;
}

bool Vocab::contains(std::string_view token) const {
  const auto it = index_.find(token);
  return it != index_.end() && it->second >= 2;
}

std::string Vocab::to_json() const {
  // Written in index order so the file reads naturally.
  std::string out = "{";
  for (std::size_t i = 0; i < tokens_.size(); ++i) {
    if (i) out += ",";
    out += "\n  " + nlohmann::json(tokens_[i]).dump() + ": " + std::to_string(i);
  }
  out += "\n}\n";
  return out;
}

Vocab Vocab::from_json(std::string_view json) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(json);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kCorruptBundle, std::string("vocab.json: ") + e.what());
  }
  if (!j.is_object()) throw Error(ErrorCode::kCorruptBundle, "vocab.json is not an object");
  std::vector<std::string> by_index(j.size());
  std::vector<bool> seen(j.size(), false);
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (!it.value().is_number_integer()) {
      throw Error(ErrorCode::kCorruptBundle, "vocab.json index for '" + it.key() + "' is not an integer");
    }
    const auto idx = it.value().get<long long>();
    if (idx < 0 || static_cast<std::size_t>(idx) >= by_index.size() || seen[idx]) {
      throw Error(ErrorCode::kCorruptBundle, "vocab.json indices are not contiguous");
    }
    seen[idx] = true;
    by_index[idx] = it.key();
  }
  if (by_index.size() < 2 || by_index[0] != kPadToken || by_index[1] != kUnkToken) {
    throw Error(ErrorCode::kCorruptBundle, "vocab.json lacks reserved PAD/UNK entries");
  }
  return Vocab(std::vector<std::string>(by_index.begin() + 2, by_index.end()));
}

Vocab build_vocab(const TokenizedCorpus& corpus, std::size_t min_count) {
  std::map<std::string, std::size_t> freq;  // byte order == code point order for UTF-8
  for (const auto& sentence : corpus) {
    for (const auto& tok : sentence) ++freq[tok];
  }
  if (freq.empty()) throw Error(ErrorCode::kEmptyCorpus, "corpus contains no tokens");

  std::vector<std::pair<std::string, std::size_t>> entries;
  for (auto& [tok, n] : freq) {
    if (n >= std::max<std::size_t>(min_count, 1)) entries.emplace_back(tok, n);
  }
  std::stable_sort(entries.begin(), entries.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });
  std::vector<std::string> tokens;
  tokens.reserve(entries.size());
  for (auto& e : entries) tokens.push_back(std::move(e.first));
  return Vocab(std::move(tokens));
}

double oov_rate(const TokenizedCorpus& corpus, const Vocab& vocab) {
  std::size_t total = 0, unknown = 0;
  for (const auto& sentence : corpus) {
    for (const auto& tok : sentence) {
      ++total;
      if (!vocab.contains(tok)) ++unknown;
    }
  }
  return total == 0 ? 0.0 : static_cast<double>(unknown) / static_cast<double>(total);
}

TextEncoding encode(std::string_view headline, const Vocab& vocab, std::size_t max_len) {
  if (max_len == 0) throw Error(ErrorCode::kInvalidArgument, "max_len must be >= 1");
  const auto tokens = tokenize(clean_text(headline));
  TextEncoding enc;
  enc.ids.assign(max_len, kPadId);
  enc.true_length = std::min(tokens.size(), max_len);
  for (std::size_t i = 0; i < enc.true_length; ++i) enc.ids[i] = vocab.id(tokens[i]);
  return enc;
}

std::size_t choose_max_len(const TokenizedCorpus& corpus, std::size_t cap) {
  if (corpus.empty()) return std::max<std::size_t>(cap, 1);
  std::vector<std::size_t> lengths;
  lengths.reserve(corpus.size());
  for (const auto& s : corpus) lengths.push_back(s.size());
  std::sort(lengths.begin(), lengths.end());
  const auto rank = static_cast<std::size_t>(std::ceil(0.95 * static_cast<double>(lengths.size())));
  const auto p95 = lengths[std::max<std::size_t>(rank, 1) - 1];
  return std::max<std::size_t>(1, std::min(cap, p95));
}

}  // namespace vartha::text
