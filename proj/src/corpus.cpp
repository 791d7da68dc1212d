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

#include "tegra/corpus.hpp"

#include <algorithm>
#include <fstream>
#include <numeric>
#include <set>

#include "tegra/error.hpp"
#include "tegra/random.hpp"
#include "tegra/text.hpp"

namespace tegra {

using nlohmann::json;

std::string_view to_string(Label label) {
  return label == Label::kLegit ? "legit" : "misinfo";
}

Label parse_label(std::string_view s) {
  if (s == "legit") return Label::kLegit;
  if (s == "misinfo") return Label::kMisinfo;
  throw ValidationError("unknown label '" + std::string(s) + "'");
}

std::string_view to_string(Split split) {
  switch (split) {
    case Split::kTrain: return "train";
    case Split::kValidation: return "validation";
    case Split::kTest: return "test";
  }
  return "?";
}

Split parse_split(std::string_view s) {
  if (s == "train") return Split::kTrain;
  if (s == "validation") return Split::kValidation;
  if (s == "test") return Split::kTest;
  throw ValidationError("unknown split '" + std::string(s) + "'");
}

void validate_document(const Document& doc) {
  if (doc.id.empty()) throw ValidationError("document with empty id");
  if (trim(doc.text).empty()) throw ValidationError("document '" + doc.id + "' has empty text");
}

Corpus load_corpus(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open corpus " + path.string());
  Corpus corpus;
  std::set<std::string> seen;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    Document doc;
    try {
      const json j = json::parse(line);
      doc.id = j.at("id").get<std::string>();
      doc.text = j.at("text").get<std::string>();
      doc.label = parse_label(j.at("label").get<std::string>());
    } catch (const json::exception& e) {
      throw ParseError(path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    } catch (const ValidationError& e) {
      throw ParseError(path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
    validate_document(doc);
    if (!seen.insert(doc.id).second) {
      throw ValidationError("duplicate document id '" + doc.id + "' at line " +
                            std::to_string(line_no));
    }
    corpus.push_back(std::move(doc));
  }
  return corpus;
}

void save_corpus(const Corpus& corpus, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write corpus " + path.string());
  for (const auto& doc : corpus) {
    out << json{{"id", doc.id}, {"text", doc.text}, {"label", to_string(doc.label)}}.dump()
        << '\n';
  }
}

Split FoldPlan::split_of(const std::string& doc_id) const {
  auto it = assignments.find(doc_id);
  if (it == assignments.end()) {
    throw ValidationError("document '" + doc_id + "' is not assigned in fold " +
                          std::to_string(seed));
  }
  return it->second;
}

std::vector<std::size_t> split_indices(const Corpus& corpus, const FoldPlan& fold, Split split) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    if (fold.split_of(corpus[i].id) == split) out.push_back(i);
  }
  return out;
}

namespace {

void cut(const std::vector<std::size_t>& order, const Corpus& corpus, FoldPlan& plan) {
  const std::size_t n = order.size();
  const std::size_t n_train = (8 * n) / 10;
  const std::size_t n_val = n / 10;
  for (std::size_t k = 0; k < n; ++k) {
    Split s = k < n_train ? Split::kTrain : (k < n_train + n_val ? Split::kValidation : Split::kTest);
    plan.assignments[corpus[order[k]].id] = s;
  }
}

}  // namespace

std::vector<FoldPlan> make_folds(const Corpus& corpus, int n_folds, std::uint64_t base_seed,
                                 bool stratified) {
  if (n_folds < 1) throw ValidationError("n_folds must be >= 1");
  if (corpus.size() < 10) {
    throw SizeError("corpus of " + std::to_string(corpus.size()) +
                    " documents is too small for 80/10/10 splits (need >= 10)");
  }
  std::vector<FoldPlan> plans;
  for (int f = 0; f < n_folds; ++f) {
    FoldPlan plan;
    plan.seed = base_seed + static_cast<std::uint64_t>(f);
    Rng rng(plan.seed);
    if (!stratified) {
      std::vector<std::size_t> order(corpus.size());
      std::iota(order.begin(), order.end(), 0);
      shuffle(order, rng);
      cut(order, corpus, plan);
    } else {
      for (Label label : {Label::kLegit, Label::kMisinfo}) {
        std::vector<std::size_t> order;
        for (std::size_t i = 0; i < corpus.size(); ++i) {
          if (corpus[i].label == label) order.push_back(i);
        }
        if (order.size() < 10) {
          throw SizeError("stratified folds need >= 10 documents per label");
        }
        shuffle(order, rng);
        cut(order, corpus, plan);
      }
    }
    plans.push_back(std::move(plan));
  }
  return plans;
}

json fold_to_json(const FoldPlan& fold) {
  json assignments = json::object();
  for (const auto& [id, split] : fold.assignments) assignments[id] = to_string(split);
  return json{{"seed", fold.seed}, {"assignments", assignments}};
}

FoldPlan fold_from_json(const json& j) {
  FoldPlan plan;
  try {
    plan.seed = j.at("seed").get<std::uint64_t>();
    for (const auto& [id, split] : j.at("assignments").items()) {
      plan.assignments[id] = parse_split(split.get<std::string>());
    }
  } catch (const json::exception& e) {
    throw FormatError(std::string("bad fold plan: ") + e.what());
  }
  return plan;
}

std::vector<std::size_t> corpus_char_lengths(const Corpus& corpus) {
  std::vector<std::size_t> out;
  out.reserve(corpus.size());
  for (const auto& doc : corpus) {
    std::size_t n = 0;
    for (unsigned char c : doc.text) {
      if ((c & 0xC0) != 0x80) ++n;
    }
    out.push_back(n);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Synthetic corpora

void SyntheticSpec::validate() const {
  if (n_docs < 1 || n_true_facts < 1 || n_fake_facts < 1 || facts_per_doc < 1 ||
      noise_sentences_per_doc < 0) {
    throw ValidationError("synthetic spec counts must be positive");
  }
  if (n_true_facts % n_fake_facts != 0) {
    throw ValidationError("n_true_facts must be a multiple of n_fake_facts");
  }
  if (n_true_facts / n_fake_facts + 1 > n_fake_facts) {
    throw ValidationError("n_fake_facts too small for the requested true/fake ratio");
  }
  if (facts_per_doc > n_fake_facts) {
    throw ValidationError("facts_per_doc exceeds the fake fact pool");
  }
}

namespace {

const std::vector<std::string> kEntityHeads = {"Kal", "Vor", "Zen", "Mir", "Tal", "Bro",
                                               "Quen", "Dra", "Fel", "Ost", "Ryn", "Sko",
                                               "Ulm", "Yar", "Pex"};
const std::vector<std::string> kEntityTails = {"dor", "vath", "mund", "rik", "gard", "lon",
                                               "thas", "berg", "nox", "wyn", "cor", "dell",
                                               "ford", "mar", "sten"};
const std::vector<std::string> kValueHeads = {"Ari", "Belo", "Cira", "Duna", "Elsi", "Faro",
                                              "Giva", "Hela", "Isso", "Jora", "Kiru", "Lume",
                                              "Mava", "Nori", "Opa"};
const std::vector<std::string> kValueTails = {"vale", "port", "mere", "stead", "haven",
                                              "moor", "field", "crest", "brook", "wick",
                                              "holm", "shire", "ridge", "fen", "dale"};

const std::vector<std::string> kPredicates = {
    "was founded in", "is located near", "has acquired", "signed with", "belongs to",
    "was elected in", "supports", "visited", "is funded by", "opened in"};

const std::vector<std::string> kNoise = {
    "The committee met on Tuesday.",
    "Officials declined to comment.",
    "Local reporters covered the story.",
    "More details will follow.",
    "The statement was released late.",
    "Analysts expect further updates.",
    "Residents gathered downtown.",
    "Critics raised several questions.",
    "The event drew a large crowd.",
    "Sources shared additional context.",
    "Weather conditions remained mild.",
    "Observers described the mood as calm."};

std::vector<std::string> make_names(const std::vector<std::string>& heads,
                                    const std::vector<std::string>& tails, std::size_t n,
                                    Rng& rng) {
  std::vector<std::string> all;
  for (const auto& h : heads) {
    for (const auto& t : tails) all.push_back(h + t);
  }
  if (n > all.size()) throw ValidationError("synthetic name pool exhausted");
  shuffle(all, rng);
  all.resize(n);
  return all;
}

// k distinct indices from [0, n), in draw order.
std::vector<std::size_t> sample_distinct(std::size_t n, std::size_t k, Rng& rng) {
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  for (std::size_t i = 0; i < k; ++i) {
    const auto j = i + static_cast<std::size_t>(uniform_index(rng, n - i));
    std::swap(idx[i], idx[j]);
  }
  idx.resize(k);
  return idx;
}

}  // namespace

std::string SyntheticWorld::sentence(const SyntheticFact& fact) const {
  return entities[fact.entity] + " " + predicates[fact.entity] + " " + values[fact.value] + ".";
}

SyntheticWorld make_synthetic_world(const SyntheticSpec& spec) {
  spec.validate();
  Rng rng(spec.seed);
  const auto n = static_cast<std::size_t>(spec.n_fake_facts);
  const auto ratio = static_cast<std::size_t>(spec.n_true_facts / spec.n_fake_facts);

  SyntheticWorld world;
  world.entities = make_names(kEntityHeads, kEntityTails, n, rng);
  world.values = make_names(kValueHeads, kValueTails, n, rng);
  for (std::size_t e = 0; e < n; ++e) {
    world.predicates.push_back(kPredicates[uniform_index(rng, kPredicates.size())]);
  }
  world.noise_sentences = kNoise;

  // Cyclic shifts over a permuted value ring: shift s pairs entity e with
  // value perm[(e + s) mod n], so each shift is a bijection and every value
  // gets exactly one entity per shift.
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  shuffle(perm, rng);
  const auto shifts = sample_distinct(n, ratio + 1, rng);
  for (std::size_t s = 0; s <= ratio; ++s) {
    for (std::size_t e = 0; e < n; ++e) {
      SyntheticFact fact{static_cast<int>(e), static_cast<int>(perm[(e + shifts[s]) % n]),
                         s == ratio};
      (fact.fake ? world.fake_facts : world.true_facts).push_back(fact);
    }
  }
  return world;
}

Corpus generate_synthetic(const SyntheticSpec& spec) {
  const SyntheticWorld world = make_synthetic_world(spec);
  Rng rng(spec.seed ^ 0x5eed5eed5eed5eedULL);

  std::vector<Label> labels;
  for (int i = 0; i < spec.n_docs; ++i) {
    labels.push_back(i < spec.n_docs / 2 ? Label::kLegit : Label::kMisinfo);
  }
  shuffle(labels, rng);

  Corpus corpus;
  for (int i = 0; i < spec.n_docs; ++i) {
    const auto& pool = labels[i] == Label::kLegit ? world.true_facts : world.fake_facts;
    std::vector<std::string> sentences;
    for (auto k : sample_distinct(pool.size(), spec.facts_per_doc, rng)) {
      sentences.push_back(world.sentence(pool[k]));
    }
    const std::size_t n_noise =
        std::min<std::size_t>(spec.noise_sentences_per_doc, world.noise_sentences.size());
    for (auto k : sample_distinct(world.noise_sentences.size(), n_noise, rng)) {
      sentences.push_back(world.noise_sentences[k]);
    }
    shuffle(sentences, rng);

    Document doc;
    char id[32];
    std::snprintf(id, sizeof(id), "syn-%04d", i);
    doc.id = id;
    doc.label = labels[i];
    for (const auto& s : sentences) {
      if (!doc.text.empty()) doc.text.push_back(' ');
      doc.text += s;
    }
    corpus.push_back(std::move(doc));
  }
  return corpus;
}

}  // namespace tegra
