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

#ifndef TEGRA_EMBEDDING_HPP_
#define TEGRA_EMBEDDING_HPP_

#include <filesystem>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <Eigen/Dense>

#include "tegra/corpus.hpp"
#include "tegra/extraction.hpp"

namespace tegra {

/// Frozen static word vectors. Rows of `vectors` are tokens.
class WordVectorTable {
 public:
  WordVectorTable() = default;
  explicit WordVectorTable(int dim);

  int dim() const { return dim_; }
  std::size_t size() const { return tokens_.size(); }

  /// Keeps the first vector for a token; returns false for duplicates.
  bool add(std::string_view token, const Eigen::VectorXd& v);
  const double* find(std::string_view token) const;
  const std::vector<std::string>& tokens() const { return tokens_; }
  Eigen::Map<const Eigen::VectorXd> row(std::size_t i) const;

 private:
  int dim_ = 0;
  std::vector<std::string> tokens_;
  std::vector<double> data_;
  std::unordered_map<std::string, std::size_t> index_;
};

/// "token v1 ... vd" per line, optional "count dim" header. Tokens are
/// lowercased. Throws FormatError on a dimension mismatch.
WordVectorTable load_vectors(const std::filesystem::path& path);
/// Writes with round-trip precision, so load(save(t)) is bitwise equal.
void save_vectors(const WordVectorTable& table, const std::filesystem::path& path);

/// Mean of the in-vocabulary token vectors; zero when no token is known.
Eigen::VectorXd embed_phrase(std::string_view phrase, const WordVectorTable& table);

/// Mean of the subject, predicate and object phrase embeddings.
Eigen::VectorXd embed_triple(const Triple& t, const WordVectorTable& table);

/// Per-document vectors produced offline by an encoder language model.
class DocEmbeddingStore {
 public:
  int dim() const { return dim_; }
  std::size_t size() const { return vectors_.size(); }
  const Eigen::VectorXd& at(const std::string& doc_id) const;
  bool contains(const std::string& doc_id) const { return vectors_.count(doc_id) > 0; }
  void add(const std::string& doc_id, Eigen::VectorXd v);

  friend DocEmbeddingStore load_doc_embeddings(const std::filesystem::path& path);

 private:
  int dim_ = 0;
  std::unordered_map<std::string, Eigen::VectorXd> vectors_;
};

/// Header "dim=<d>", then "doc_id<TAB>v1 ... vd" rows.
DocEmbeddingStore load_doc_embeddings(const std::filesystem::path& path);
void save_doc_embeddings(const DocEmbeddingStore& store, const std::vector<std::string>& order,
                         const std::filesystem::path& path);

Eigen::VectorXd embed_text(const Document& doc, const WordVectorTable& table);
/// Stored vector verbatim. Throws LookupError naming a missing id.
Eigen::VectorXd embed_text(const Document& doc, const DocEmbeddingStore& store);

/// Text channel backend: word-vector average unless a store is attached.
class TextEncoder {
 public:
  explicit TextEncoder(const WordVectorTable* table, const DocEmbeddingStore* store = nullptr)
      : table_(table), store_(store) {}

  Eigen::VectorXd encode(const Document& doc) const;
  int dim() const;
  std::string backend() const { return store_ ? "doc_embeddings" : "word_vector_mean"; }

 private:
  const WordVectorTable* table_;
  const DocEmbeddingStore* store_;
};

}  // namespace tegra

#endif  // TEGRA_EMBEDDING_HPP_
