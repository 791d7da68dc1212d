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

#ifndef TEGRA_CORPUS_HPP_
#define TEGRA_CORPUS_HPP_

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

namespace tegra {

enum class Label { kLegit = 0, kMisinfo = 1 };

std::string_view to_string(Label label);
Label parse_label(std::string_view s);

inline int label_index(Label label) { return static_cast<int>(label); }

struct Document {
  std::string id;
  std::string text;
  Label label = Label::kLegit;

  bool operator==(const Document&) const = default;
};

using Corpus = std::vector<Document>;

/// Throws ValidationError when the record breaks a Document invariant.
void validate_document(const Document& doc);

/// One JSON object per line: {"id", "text", "label"}. Blank lines are skipped.
Corpus load_corpus(const std::filesystem::path& path);
void save_corpus(const Corpus& corpus, const std::filesystem::path& path);

enum class Split { kTrain, kValidation, kTest };

std::string_view to_string(Split split);
Split parse_split(std::string_view s);

struct FoldPlan {
  std::uint64_t seed = 0;
  std::map<std::string, Split> assignments;

  Split split_of(const std::string& doc_id) const;
  bool operator==(const FoldPlan&) const = default;
};

/// Documents of one split, corpus order.
std::vector<std::size_t> split_indices(const Corpus& corpus, const FoldPlan& fold, Split split);

/// One plan per seed in [base_seed, base_seed + n_folds). Each plan shuffles
/// the corpus with its own seed and cuts floor(0.8n) train, floor(0.1n)
/// validation, remainder test. With stratified=true the cut is applied per
/// label and the pieces merged.
std::vector<FoldPlan> make_folds(const Corpus& corpus, int n_folds, std::uint64_t base_seed,
                                 bool stratified = false);

nlohmann::json fold_to_json(const FoldPlan& fold);
FoldPlan fold_from_json(const nlohmann::json& j);

/// Character (UTF-8 code point) count of each document's raw text.
std::vector<std::size_t> corpus_char_lengths(const Corpus& corpus);

struct SyntheticSpec {
  int n_docs = 500;
  int n_true_facts = 400;
  int n_fake_facts = 100;
  int facts_per_doc = 3;
  int noise_sentences_per_doc = 2;
  std::uint64_t seed = 7;

  void validate() const;
};

/// A fact sentence's parts. The sentence is "<entity> <predicate> <value>."
struct SyntheticFact {
  int entity = 0;
  int value = 0;
  bool fake = false;
};

/// Vocabulary and fact pools behind a synthetic corpus.
///
/// There are n_fake_facts entities and as many values. Every entity and
/// every value occurs in exactly one fake fact and in n_true/n_fake true
/// facts, and each entity keeps a single predicate for all of its facts, so
/// the token marginals of both classes match. Only the pairing of entity and
/// value tells the classes apart.
struct SyntheticWorld {
  std::vector<std::string> entities;
  std::vector<std::string> values;
  std::vector<std::string> predicates;  // per entity
  std::vector<SyntheticFact> true_facts;
  std::vector<SyntheticFact> fake_facts;
  std::vector<std::string> noise_sentences;

  std::string sentence(const SyntheticFact& fact) const;
};

SyntheticWorld make_synthetic_world(const SyntheticSpec& spec);

/// Balanced labels; legit documents draw facts from the true pool and misinfo
/// documents from the fake pool. Fact and noise sentences are interleaved in
/// a seeded order.
Corpus generate_synthetic(const SyntheticSpec& spec);

}  // namespace tegra

#endif  // TEGRA_CORPUS_HPP_
