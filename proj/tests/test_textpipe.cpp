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

#include <gtest/gtest.h>

#include "common/rng.hpp"
#include "test_support.hpp"
#include "vartha/io.hpp"

namespace vartha::text {
namespace {

using testing::TempDir;
using testing::thrown_code;

TEST(CleanTextTest, Golden) {
  EXPECT_EQ(clean_text("<b>വാർത്ത</b> 2023"), "വാർത്ത NUM");
  EXPECT_EQ(clean_text("വില 500, 1000 രൂപ!"), "വില NUM NUM രൂപ");
  EXPECT_EQ(clean_text(""), "");
}

TEST(CleanTextTest, EntitiesDigitsAndScript) {
  EXPECT_EQ(clean_text("A &amp; B"), "A B");
  EXPECT_EQ(clean_text("൧൨ ദിവസം"), "NUM ദിവസം");
  EXPECT_EQ(clean_text("covid19"), "covid NUM");
  EXPECT_EQ(clean_text("  \t...  "), "");
  EXPECT_EQ(clean_text("中文 ടെസ്റ്റ്"), "ടെസ്റ്റ്");
  // Chillu written with ZWJ stays one word.
  EXPECT_EQ(clean_text("അവന്‍ വന്നു"), "അവന്‍ വന്നു");
}

TEST(CleanTextTest, Idempotent) {
  for (const auto& r : testing::fixture_manifest()) {
    const auto once = clean_text(r.headline);
    EXPECT_EQ(clean_text(once), once) << r.headline;
  }
  for (const char* raw : {"<i>x</i>&lt;5&gt; 3.14", "NUM 12NUM", "\xff\xfe bad utf8 ൦"}) {
    const auto once = clean_text(raw);
    EXPECT_EQ(clean_text(once), once) << raw;
  }
}

TEST(TokenizeTest, Golden) {
  EXPECT_EQ(tokenize("വാർത്ത NUM"), (std::vector<std::string>{"വാർത്ത", "NUM"}));
  EXPECT_TRUE(tokenize("").empty());
}

TEST(VocabTest, FrequencyOrder) {
  const TokenizedCorpus corpus = {{"a", "b", "a"}};
  const auto v = build_vocab(corpus);
  EXPECT_EQ(v.tokens(), (std::vector<std::string>{"<PAD>", "<UNK>", "a", "b"}));
  EXPECT_EQ(v.id("a"), 2);
  EXPECT_EQ(v.id("b"), 3);
  EXPECT_EQ(v.id("zzz"), kUnkId);
  EXPECT_FALSE(build_vocab(corpus, 2).contains("b"));
  EXPECT_EQ(build_vocab(corpus), v);
}

TEST(VocabTest, TiesInCodePointOrder) {
  const auto v = build_vocab({{"c", "b", "a", "b"}});
  EXPECT_EQ(v.tokens(), (std::vector<std::string>{"<PAD>", "<UNK>", "b", "a", "c"}));
}

TEST(VocabTest, EmptyCorpus) {
  EXPECT_EQ(thrown_code([] { build_vocab({{}, {}}); }), ErrorCode::kEmptyCorpus);
}

TEST(VocabTest, JsonRoundTripAndCorruption) {
  const auto v = build_vocab({{"ഒന്ന്", "രണ്ട്", "ഒന്ന്"}});
  EXPECT_EQ(Vocab::from_json(v.to_json()), v);
  EXPECT_EQ(thrown_code([] { Vocab::from_json("[1,2]"); }), ErrorCode::kCorruptBundle);
  EXPECT_EQ(thrown_code([] { Vocab::from_json(R"({"<PAD>":0,"<UNK>":1,"a":3})"); }), ErrorCode::kCorruptBundle);
}

TEST(VocabTest, OovRate) {
  const auto v = build_vocab({{"a", "b"}});
  EXPECT_DOUBLE_EQ(oov_rate({{"a", "x"}, {"y", "b"}}, v), 0.5);
  EXPECT_DOUBLE_EQ(oov_rate({}, v), 0.0);
}

TEST(EncodeTest, Golden) {
  const Vocab ab(std::vector<std::string>{"a", "b"});
  const auto e = encode("a b", ab, 4);
  EXPECT_EQ(e.ids, (std::vector<int>{2, 3, 0, 0}));
  EXPECT_EQ(e.true_length, 2u);

  std::string forty;
  std::vector<int> expected;
  for (int i = 0; i < 40; ++i) {
    forty += i % 3 ? "a " : "b ";
    if (i < 32) expected.push_back(i % 3 ? 2 : 3);
  }
  const auto t = encode(forty, ab, 32);
  EXPECT_EQ(t.ids, expected);
  EXPECT_EQ(t.true_length, 32u);

  EXPECT_EQ(encode("a unseen", ab, 4).ids, (std::vector<int>{2, kUnkId, 0, 0}));
  EXPECT_EQ(encode("", ab, 3).true_length, 0u);
}

TEST(EncodeTest, ChooseMaxLen) {
  TokenizedCorpus corpus;
  for (int n = 1; n <= 100; ++n) corpus.push_back(std::vector<std::string>(static_cast<std::size_t>(n), "w"));
  EXPECT_EQ(choose_max_len(corpus), 32u);
  EXPECT_EQ(choose_max_len(corpus, 200), 95u);
  EXPECT_EQ(choose_max_len({{}}), 1u);
}

TokenizedCorpus fixture_corpus() {
  TokenizedCorpus corpus;
  for (const auto& r : testing::fixture_manifest()) corpus.push_back(tokenize(clean_text(r.headline)));
  return corpus;
}

double cosine(std::span<const float> a, std::span<const float> b) {
  double ab = 0, aa = 0, bb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ab += double(a[i]) * b[i];
    aa += double(a[i]) * a[i];
    bb += double(b[i]) * b[i];
  }
  return ab / std::sqrt(aa * bb);
}

TEST(EmbeddingTest, CooccurrenceSimilarity) {
  Rng rng(5);
  TokenizedCorpus corpus;
  for (int s = 0; s < 500; ++s) {
    const bool xy = s % 2 == 0;
    std::vector<std::string> sent;
    for (int k = 0; k < 8; ++k) sent.push_back((xy ? "p" : "q") + std::to_string(rng.below(20)));
    if (xy) {
      sent.insert(sent.begin() + 3, {"xx", "yy"});
    } else {
      sent.insert(sent.begin() + 3, "zz");
    }
    corpus.push_back(sent);
  }
  Word2VecParams p;
  p.dim = 50;
  const auto vocab = build_vocab(corpus);
  const auto m = train_embeddings(corpus, vocab, p);
  const auto x = m.row(static_cast<std::size_t>(vocab.id("xx")));
  EXPECT_GT(cosine(x, m.row(static_cast<std::size_t>(vocab.id("yy")))),
            cosine(x, m.row(static_cast<std::size_t>(vocab.id("zz")))));
}

TEST(EmbeddingTest, ReservedRowsAndDeterminism) {
  const auto corpus = fixture_corpus();
  const auto vocab = build_vocab(corpus);
  Word2VecParams p;
  p.dim = 16;
  const auto a = train_embeddings(corpus, vocab, p);
  const auto b = train_embeddings(corpus, vocab, p);
  ASSERT_EQ(a.matrix.size(), vocab.size() * 16);
  EXPECT_EQ(a.matrix, b.matrix);
  for (float v : a.row(kPadId)) EXPECT_EQ(v, 0.0f);
  for (std::size_t d = 0; d < 16; ++d) {
    double mean = 0;
    for (std::size_t i = 2; i < vocab.size(); ++i) mean += a.row(i)[d];
    mean /= static_cast<double>(vocab.size() - 2);
    EXPECT_NEAR(a.row(kUnkId)[d], mean, 1e-5);
  }
  p.seed = 43;
  EXPECT_NE(train_embeddings(corpus, vocab, p).matrix, a.matrix);
}

TEST(EmbeddingTest, SaveLoadRoundTrip) {
  const auto corpus = fixture_corpus();
  Word2VecParams p;
  p.dim = 8;
  const auto m = train_embeddings(corpus, build_vocab(corpus), p);
  TempDir dir;
  save_embeddings(m, dir.path());
  EXPECT_EQ(fs::file_size(dir / "embeddings.f32"), m.matrix.size() * 4);
  const auto back = load_embeddings(dir.path());
  EXPECT_EQ(back.vocab, m.vocab);
  EXPECT_EQ(back.dim, 8u);
  EXPECT_EQ(back.matrix, m.matrix);
}

TEST(EmbeddingTest, ImportTextVectors) {
  TempDir dir;
  io::write_file_atomic(dir / "v.txt", "2 3\na 1 2 3\nb 4 5 6\n");
  const Vocab vocab(std::vector<std::string>{"a", "b", "c"});
  const auto m = import_word2vec_text(dir / "v.txt", vocab);
  ASSERT_EQ(m.dim, 3u);
  EXPECT_EQ(std::vector<float>(m.row(2).begin(), m.row(2).end()), (std::vector<float>{1, 2, 3}));
  EXPECT_EQ(std::vector<float>(m.row(3).begin(), m.row(3).end()), (std::vector<float>{4, 5, 6}));
  for (float v : m.row(kPadId)) EXPECT_EQ(v, 0.0f);
  for (float v : m.row(4)) EXPECT_LT(std::abs(v), 1.0f);

  io::write_file_atomic(dir / "bad.txt", "1 3\na 1 2\n");
  EXPECT_EQ(thrown_code([&] { import_word2vec_text(dir / "bad.txt", vocab); }), ErrorCode::kInvalidArgument);
}

}  // namespace
}  // namespace vartha::text
