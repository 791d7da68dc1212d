// Copyright 2026 The tegra Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "tegra/embedding.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <cstring>
#include <sstream>

#include "tegra/error.hpp"
#include "tegra/random.hpp"
#include "tegra/text.hpp"
#include "test_util.hpp"

namespace tegra {
namespace {

using testing::TempDir;
using testing::write_file;

Eigen::VectorXd vec(std::initializer_list<double> xs) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(xs.size()));
  Eigen::Index i = 0;
  for (double x : xs) v[i++] = x;
  return v;
}

WordVectorTable small_table() {
  WordVectorTable t(3);
  t.add("alpha", vec({1, 2, 3}));
  t.add("beta", vec({3, 2, 1}));
  t.add("gamma", vec({0, -1, 5}));
  return t;
}

TEST(LoadVectors, TwoLinesInferredDim) {
  TempDir dir;
  write_file(dir / "v.txt", "cat 0.1 0.2 0.3\nDog 1 2 3\n");
  const auto t = load_vectors(dir / "v.txt");
  EXPECT_EQ(t.dim(), 3);
  EXPECT_EQ(t.size(), 2u);
  ASSERT_NE(t.find("dog"), nullptr);
  EXPECT_EQ(t.find("dog")[2], 3.0);
}

TEST(LoadVectors, HeaderAndDuplicates) {
  TempDir dir;
  write_file(dir / "v.txt", "2 2\na 1 1\na 2 2\nb 0 1\n");
  const auto t = load_vectors(dir / "v.txt");
  EXPECT_EQ(t.dim(), 2);
  EXPECT_EQ(t.size(), 2u);
  EXPECT_EQ(t.find("a")[0], 1.0);
}

TEST(LoadVectors, WrongWidthNamesTheLine) {
  TempDir dir;
  write_file(dir / "v.txt", "a 1 2 3\nb 1 2\n");
  try {
    load_vectors(dir / "v.txt");
    FAIL() << "expected FormatError";
  } catch (const FormatError& e) {
    EXPECT_NE(std::string(e.what()).find(":2"), std::string::npos) << e.what();
  }
  write_file(dir / "w.txt", "a 1 x 3\n");
  EXPECT_THROW(load_vectors(dir / "w.txt"), FormatError);
  write_file(dir / "e.txt", "");
  EXPECT_THROW(load_vectors(dir / "e.txt"), FormatError);
}

TEST(LoadVectors, RoundTripIsBitwise) {
  TempDir dir;
  Rng rng(5);
  WordVectorTable t(7);
  for (int i = 0; i < 40; ++i) {
    Eigen::VectorXd v(7);
    for (int k = 0; k < 7; ++k) v[k] = standard_normal(rng) * std::pow(10.0, k - 3);
    t.add("tok" + std::to_string(i), v);
  }
  save_vectors(t, dir / "v.txt");
  const auto back = load_vectors(dir / "v.txt");
  ASSERT_EQ(back.size(), t.size());
  ASSERT_EQ(back.tokens(), t.tokens());
  for (std::size_t i = 0; i < t.size(); ++i) {
    EXPECT_EQ(std::memcmp(back.row(i).data(), t.row(i).data(), sizeof(double) * 7), 0);
  }
}

TEST(EmbedPhrase, Examples) {
  const auto t = small_table();
  EXPECT_EQ(embed_phrase("Alpha", t), vec({1, 2, 3}));
  EXPECT_EQ(embed_phrase("alpha beta", t), vec({2, 2, 2}));
  EXPECT_EQ(embed_phrase("alpha unknown, beta!", t), vec({2, 2, 2}));
  EXPECT_EQ(embed_phrase("nothing here", t), Eigen::VectorXd::Zero(3));
  EXPECT_EQ(embed_phrase("", t), Eigen::VectorXd::Zero(3));
}

TEST(EmbedPhrase, OrderInsensitiveAndTableUnchanged) {
  const auto t = small_table();
  const auto before = t.tokens();
  EXPECT_TRUE(embed_phrase("gamma alpha beta", t).isApprox(embed_phrase("beta gamma alpha", t), 1e-15));
  EXPECT_EQ(t.tokens(), before);
  EXPECT_EQ(t.find("alpha")[0], 1.0);
}

TEST(EmbedTriple, Examples) {
  const auto t = small_table();
  const Triple same{"alpha beta", "alpha beta", "alpha beta", "d"};
  EXPECT_TRUE(embed_triple(same, t).isApprox(embed_phrase("alpha beta", t)));
  const Triple three{"alpha", "beta", "gamma", "d"};
  EXPECT_TRUE(embed_triple(three, t).isApprox((vec({1, 2, 3}) + vec({3, 2, 1}) + vec({0, -1, 5})) / 3.0));
}

TEST(EmbedTriple, MatchesTokenLevelOracle) {
  WordVectorTable t(4);
  Rng rng(9);
  std::vector<std::string> vocab;
  for (int i = 0; i < 20; ++i) {
    vocab.push_back("w" + std::to_string(i));
    if (i % 4 == 3) continue;  // out of vocabulary
    Eigen::VectorXd v(4);
    for (int k = 0; k < 4; ++k) v[k] = standard_normal(rng);
    t.add(vocab.back(), v);
  }
  auto phrase = [&] {
    std::string s;
    const auto n = uniform_index(rng, 4);
    for (std::uint64_t k = 0; k < n; ++k) s += vocab[uniform_index(rng, vocab.size())] + " ";
    return s;
  };
  auto oracle = [&](const std::string& s) {
    Eigen::VectorXd sum = Eigen::VectorXd::Zero(4);
    int n = 0;
    std::istringstream in(s);
    std::string w;
    while (in >> w) {
      if (const double* v = t.find(w)) {
        for (int k = 0; k < 4; ++k) sum[k] += v[k];
        ++n;
      }
    }
    return n ? Eigen::VectorXd(sum / n) : sum;
  };
  for (int trial = 0; trial < 50; ++trial) {
    const Triple tri{phrase(), phrase(), phrase(), "d"};
    const Eigen::VectorXd want = (oracle(tri.subject) + oracle(tri.predicate) + oracle(tri.object)) / 3.0;
    const Eigen::VectorXd got = embed_triple(tri, t);
    EXPECT_LT((got - want).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_TRUE(got.allFinite());
  }
}

TEST(EmbedText, DefaultBackendIsPhraseMean) {
  const auto t = small_table();
  const Document one{"d", "gamma", Label::kLegit};
  EXPECT_EQ(embed_text(one, t), vec({0, -1, 5}));
  const Document doc{"d", "Alpha saw beta. Then gamma!", Label::kLegit};
  EXPECT_EQ(embed_text(doc, t), embed_phrase(doc.text, t));
  const TextEncoder enc(&t);
  EXPECT_EQ(enc.encode(doc), embed_phrase(doc.text, t));
  EXPECT_EQ(enc.backend(), "word_vector_mean");
  EXPECT_EQ(enc.dim(), 3);
}

TEST(DocEmbeddings, StoreLookup) {
  DocEmbeddingStore store;
  store.add("d1", vec({0.5, -0.25}));
  const Document doc{"d1", "ignored text", Label::kLegit};
  EXPECT_EQ(embed_text(doc, store), vec({0.5, -0.25}));
  try {
    embed_text(Document{"missing", "x", Label::kLegit}, store);
    FAIL() << "expected LookupError";
  } catch (const LookupError& e) {
    EXPECT_NE(std::string(e.what()).find("missing"), std::string::npos);
  }
  EXPECT_THROW(store.add("d1", vec({1, 1})), ValidationError);
  EXPECT_THROW(store.add("d2", vec({1, 1, 1})), ShapeError);
  const auto t = small_table();
  const TextEncoder enc(&t, &store);
  EXPECT_EQ(enc.backend(), "doc_embeddings");
  EXPECT_EQ(enc.dim(), 2);
}

// The file an exporter writes: six-decimal floats, tab after the id.
TEST(DocEmbeddings, ExporterFormatLoads) {
  TempDir dir;
  write_file(dir / "e.tsv", "dim=3\ndoc-1\t0.100000 -0.200000 0.300000\ndoc 2\t1.000000 0.000000 -1.500000\n");
  const auto store = load_doc_embeddings(dir / "e.tsv");
  EXPECT_EQ(store.dim(), 3);
  EXPECT_EQ(store.size(), 2u);
  EXPECT_EQ(store.at("doc-1"), vec({0.1, -0.2, 0.3}));
  EXPECT_EQ(store.at("doc 2"), vec({1.0, 0.0, -1.5}));
}

TEST(DocEmbeddings, RoundTripAndErrors) {
  TempDir dir;
  DocEmbeddingStore store;
  store.add("b", vec({1.0 / 3.0, 2e-300, -7.25}));
  store.add("a", vec({0.0, 1e300, 0.1}));
  save_doc_embeddings(store, {"b", "a"}, dir / "e.tsv");
  const auto back = load_doc_embeddings(dir / "e.tsv");
  EXPECT_EQ(back.at("a"), store.at("a"));
  EXPECT_EQ(back.at("b"), store.at("b"));

  write_file(dir / "noheader.tsv", "a\t1 2\n");
  EXPECT_THROW(load_doc_embeddings(dir / "noheader.tsv"), FormatError);
  write_file(dir / "short.tsv", "dim=3\na\t1 2\n");
  EXPECT_THROW(load_doc_embeddings(dir / "short.tsv"), FormatError);
  write_file(dir / "dup.tsv", "dim=1\na\t1\na\t2\n");
  EXPECT_THROW(load_doc_embeddings(dir / "dup.tsv"), ValidationError);
  write_file(dir / "dim.tsv", "dim=zero\n");
  EXPECT_THROW(load_doc_embeddings(dir / "dim.tsv"), FormatError);
}

}  // namespace
}  // namespace tegra
