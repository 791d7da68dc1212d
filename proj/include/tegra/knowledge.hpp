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

#ifndef TEGRA_KNOWLEDGE_HPP_
#define TEGRA_KNOWLEDGE_HPP_

#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <tuple>
#include <vector>

#include <nlohmann/json.hpp>

#include "tegra/corpus.hpp"
#include "tegra/extraction.hpp"
#include "tegra/graph.hpp"
#include "tegra/linking.hpp"

namespace tegra {

struct KgTriple {
  Triple triple;
  std::optional<std::string> subject_uri;
  std::optional<std::string> object_uri;

  bool operator==(const KgTriple&) const = default;
};

/// Identity of a triple inside a KG: normalized subject, predicate, object.
using TripleKey = std::tuple<std::string, std::string, std::string>;
TripleKey triple_key(const Triple& t);

/// Triples of one class, built from one fold's training documents.
struct ClassKG {
  Label class_label = Label::kLegit;
  std::vector<KgTriple> triples;
  std::set<std::string> provenance;

  // Derived by rebuild_index(); not serialized.
  std::map<std::string, std::vector<std::size_t>> uri_index;
  std::map<std::string, std::vector<std::size_t>> norm_index;
  std::map<TripleKey, std::size_t> frequency;

  void rebuild_index();
  bool operator==(const ClassKG& other) const;
};

struct EntityKey {
  std::optional<std::string> uri;
  std::string norm;
};

/// Keys for every node of g: its URI when linked, plus its norm.
std::vector<EntityKey> entity_keys(const DocGraph& g);

/// Triples of the training documents of `class_label` in `fold`. Subject and
/// object URIs come from the document's links.
ClassKG build_class_kg(const FoldPlan& fold, const Corpus& corpus, const TriplesByDoc& triples,
                       const LinksByDoc& links, Label class_label);

/// Throws ValidationError if any provenance document is outside the fold's
/// training split.
void check_provenance(const ClassKG& kg, const FoldPlan& fold);

/// Per key: distinct triples whose subject or object matches (by URI when the
/// key has one that the KG indexes, otherwise by normalized label), ranked by
/// KG frequency then insertion order, cut to cap_per_key. Triples already
/// returned for an earlier key are dropped.
std::vector<KgTriple> retrieve(const ClassKG& kg, const std::vector<EntityKey>& keys,
                               int cap_per_key);

struct AddedTriple {
  KgTriple triple;
  int ts_group = 0;
};

struct EnrichedGraphPair {
  DocGraph g_true;
  DocGraph g_misinfo;
  std::vector<AddedTriple> added_true;
  std::vector<AddedTriple> added_misinfo;
};

/// Copy of g plus the triples retrieved from kg for g's nodes. Each retrieved
/// triple gets the next ts_group, shared by the edge and any node it creates.
DocGraph enrich_one(const DocGraph& g, const ClassKG& kg, int cap_per_key, Origin origin,
                    std::vector<AddedTriple>* added = nullptr);

EnrichedGraphPair enrich(const DocGraph& g, const std::vector<EntityLink>& links,
                         const ClassKG& kg_true, const ClassKG& kg_misinfo, int cap_per_key);

/// Versioned JSON: {version, class_label, triples, provenance}. The index is
/// rebuilt on load.
void save_kg(const ClassKG& kg, const std::filesystem::path& path);
ClassKG load_kg(const std::filesystem::path& path);

inline constexpr int kKgFormatVersion = 1;

nlohmann::json kg_triple_to_json(const KgTriple& kt);
KgTriple kg_triple_from_json(const nlohmann::json& j);

nlohmann::json enriched_to_json(const std::string& doc_id, const EnrichedGraphPair& pair);
EnrichedGraphPair enriched_from_json(const nlohmann::json& j);

/// JSONL, one {doc, g_true, g_misinfo, added_true, added_misinfo} per line.
void save_enriched(const std::map<std::string, EnrichedGraphPair>& pairs,
                   const std::filesystem::path& path);
std::map<std::string, EnrichedGraphPair> load_enriched(const std::filesystem::path& path);

}  // namespace tegra

#endif  // TEGRA_KNOWLEDGE_HPP_
