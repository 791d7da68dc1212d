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

#include "tegra/knowledge.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "tegra/error.hpp"
#include "tegra/text.hpp"

namespace tegra {

using nlohmann::json;

TripleKey triple_key(const Triple& t) {
  return {normalize(t.subject), normalize(t.predicate), normalize(t.object)};
}

void ClassKG::rebuild_index() {
  uri_index.clear();
  norm_index.clear();
  frequency.clear();
  for (std::size_t i = 0; i < triples.size(); ++i) {
    const auto& kt = triples[i];
    ++frequency[triple_key(kt.triple)];
    const std::string s = normalize(kt.triple.subject);
    const std::string o = normalize(kt.triple.object);
    norm_index[s].push_back(i);
    if (o != s) norm_index[o].push_back(i);
    if (kt.subject_uri) uri_index[*kt.subject_uri].push_back(i);
    if (kt.object_uri && kt.object_uri != kt.subject_uri) uri_index[*kt.object_uri].push_back(i);
  }
}

bool ClassKG::operator==(const ClassKG& other) const {
  return class_label == other.class_label && triples == other.triples &&
         provenance == other.provenance && uri_index == other.uri_index &&
         norm_index == other.norm_index && frequency == other.frequency;
}

std::vector<EntityKey> entity_keys(const DocGraph& g) {
  std::vector<EntityKey> keys;
  keys.reserve(g.nodes.size());
  for (const auto& n : g.nodes) keys.push_back({n.entity_uri, n.norm});
  return keys;
}

ClassKG build_class_kg(const FoldPlan& fold, const Corpus& corpus, const TriplesByDoc& triples,
                       const LinksByDoc& links, Label class_label) {
  if (fold.assignments.size() != corpus.size()) {
    throw ValidationError("fold plan assigns " + std::to_string(fold.assignments.size()) +
                          " documents but the corpus has " + std::to_string(corpus.size()));
  }
  ClassKG kg;
  kg.class_label = class_label;
  static const std::vector<EntityLink> kNoLinks;
  for (const auto& doc : corpus) {
    if (fold.split_of(doc.id) != Split::kTrain || doc.label != class_label) continue;
    auto it = triples.find(doc.id);
    if (it == triples.end()) {
      throw ValidationError("no triples for training document '" + doc.id + "'");
    }
    auto lit = links.find(doc.id);
    const DocGraph g =
        attach_links(build_graph(doc.id, it->second), lit == links.end() ? kNoLinks : lit->second);
    for (const auto& t : it->second) {
      KgTriple kt{t, std::nullopt, std::nullopt};
      if (auto s = g.find(normalize(t.subject))) kt.subject_uri = g.nodes[*s].entity_uri;
      if (auto o = g.find(normalize(t.object))) kt.object_uri = g.nodes[*o].entity_uri;
      kg.triples.push_back(std::move(kt));
    }
    kg.provenance.insert(doc.id);
  }
  kg.rebuild_index();
  return kg;
}

void check_provenance(const ClassKG& kg, const FoldPlan& fold) {
  for (const auto& id : kg.provenance) {
    auto it = fold.assignments.find(id);
    if (it == fold.assignments.end() || it->second != Split::kTrain) {
      throw ValidationError("knowledge graph for " + std::string(to_string(kg.class_label)) +
                            " uses non-training document '" + id + "'");
    }
  }
}

std::vector<KgTriple> retrieve(const ClassKG& kg, const std::vector<EntityKey>& keys,
                               int cap_per_key) {
  if (cap_per_key < 1) throw ValidationError("cap_per_key must be >= 1");
  std::vector<KgTriple> out;
  std::set<TripleKey> taken;
  for (const auto& key : keys) {
    const std::vector<std::size_t>* hits = nullptr;
    if (key.uri) {
      if (auto it = kg.uri_index.find(*key.uri); it != kg.uri_index.end()) hits = &it->second;
    }
    if (!hits) {
      if (auto it = kg.norm_index.find(key.norm); it != kg.norm_index.end()) hits = &it->second;
    }
    if (!hits) continue;

    struct Candidate {
      std::size_t first;
      std::size_t count;
      TripleKey key;
    };
    std::vector<Candidate> candidates;
    std::set<TripleKey> seen;
    for (std::size_t idx : *hits) {
      TripleKey tk = triple_key(kg.triples[idx].triple);
      if (!seen.insert(tk).second) continue;
      candidates.push_back({idx, kg.frequency.at(tk), std::move(tk)});
    }
    std::stable_sort(candidates.begin(), candidates.end(), [](const auto& a, const auto& b) {
      return a.count != b.count ? a.count > b.count : a.first < b.first;
    });
    if (candidates.size() > static_cast<std::size_t>(cap_per_key)) candidates.resize(cap_per_key);
    for (auto& c : candidates) {
      if (taken.insert(c.key).second) out.push_back(kg.triples[c.first]);
    }
  }
  return out;
}

DocGraph enrich_one(const DocGraph& g, const ClassKG& kg, int cap_per_key, Origin origin,
                    std::vector<AddedTriple>* added) {
  for (const auto& n : g.nodes) {
    if (n.origin != Origin::kBase) throw ValidationError("enrich expects a base-only graph");
  }
  DocGraph out = g;
  int group = 0;
  for (auto& kt : retrieve(kg, entity_keys(g), cap_per_key)) {
    const int s = out.intern(kt.triple.subject, origin, group);
    if (out.nodes[s].ts_group == group && kt.subject_uri) out.nodes[s].entity_uri = kt.subject_uri;
    const int o = out.intern(kt.triple.object, origin, group);
    if (out.nodes[o].ts_group == group && kt.object_uri) out.nodes[o].entity_uri = kt.object_uri;
    out.edges.push_back(EdgeRecord{s, o, kt.triple.predicate, origin, group});
    if (added) added->push_back({std::move(kt), group});
    ++group;
  }
  return out;
}

EnrichedGraphPair enrich(const DocGraph& g, const std::vector<EntityLink>& links,
                         const ClassKG& kg_true, const ClassKG& kg_misinfo, int cap_per_key) {
  const DocGraph linked = attach_links(g, links);
  EnrichedGraphPair pair;
  pair.g_true = enrich_one(linked, kg_true, cap_per_key, Origin::kAddedTrue, &pair.added_true);
  pair.g_misinfo =
      enrich_one(linked, kg_misinfo, cap_per_key, Origin::kAddedMisinfo, &pair.added_misinfo);
  return pair;
}

namespace {

json opt(const std::optional<std::string>& s) { return s ? json(*s) : json(nullptr); }

std::optional<std::string> opt_string(const json& j, const char* key) {
  if (!j.contains(key) || j[key].is_null()) return std::nullopt;
  return j[key].get<std::string>();
}

}  // namespace

json kg_triple_to_json(const KgTriple& kt) {
  return json{{"subject", kt.triple.subject},
              {"predicate", kt.triple.predicate},
              {"object", kt.triple.object},
              {"doc", kt.triple.source_doc},
              {"extractor", kt.triple.extractor == Extractor::kBuiltin ? "builtin" : "imported"},
              {"confidence", kt.triple.confidence ? json(*kt.triple.confidence) : json(nullptr)},
              {"subject_uri", opt(kt.subject_uri)},
              {"object_uri", opt(kt.object_uri)}};
}

KgTriple kg_triple_from_json(const json& jt) {
  KgTriple kt;
  kt.triple.subject = jt.at("subject").get<std::string>();
  kt.triple.predicate = jt.at("predicate").get<std::string>();
  kt.triple.object = jt.at("object").get<std::string>();
  kt.triple.source_doc = jt.at("doc").get<std::string>();
  kt.triple.extractor =
      jt.at("extractor").get<std::string>() == "builtin" ? Extractor::kBuiltin : Extractor::kImported;
  if (jt.contains("confidence") && !jt["confidence"].is_null()) {
    kt.triple.confidence = jt["confidence"].get<double>();
  }
  kt.subject_uri = opt_string(jt, "subject_uri");
  kt.object_uri = opt_string(jt, "object_uri");
  return kt;
}

void save_kg(const ClassKG& kg, const std::filesystem::path& path) {
  json triples = json::array();
  for (const auto& kt : kg.triples) triples.push_back(kg_triple_to_json(kt));
  json j{{"version", kKgFormatVersion},
         {"class_label", to_string(kg.class_label)},
         {"triples", triples},
         {"provenance", kg.provenance}};
  std::ofstream out(path);
  if (!out) throw IoError("cannot write knowledge graph " + path.string());
  out << j.dump() << '\n';
}

ClassKG load_kg(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open knowledge graph " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  ClassKG kg;
  try {
    const json j = json::parse(ss.str());
    if (j.at("version").get<int>() != kKgFormatVersion) {
      throw FormatError("knowledge graph " + path.string() + " has unsupported version " +
                        j.at("version").dump());
    }
    kg.class_label = parse_label(j.at("class_label").get<std::string>());
    for (const auto& jt : j.at("triples")) kg.triples.push_back(kg_triple_from_json(jt));
    for (const auto& id : j.at("provenance")) kg.provenance.insert(id.get<std::string>());
  } catch (const json::exception& e) {
    throw FormatError("corrupt knowledge graph " + path.string() + ": " + e.what());
  } catch (const ValidationError& e) {
    throw FormatError("corrupt knowledge graph " + path.string() + ": " + e.what());
  }
  kg.rebuild_index();
  return kg;
}

namespace {

json added_to_json(const std::vector<AddedTriple>& added) {
  json out = json::array();
  for (const auto& a : added) {
    json j = kg_triple_to_json(a.triple);
    j["ts_group"] = a.ts_group;
    out.push_back(std::move(j));
  }
  return out;
}

std::vector<AddedTriple> added_from_json(const json& j) {
  std::vector<AddedTriple> out;
  for (const auto& ja : j) out.push_back({kg_triple_from_json(ja), ja.at("ts_group").get<int>()});
  return out;
}

}  // namespace

json enriched_to_json(const std::string& doc_id, const EnrichedGraphPair& pair) {
  return json{{"doc", doc_id},
              {"g_true", graph_to_json(pair.g_true)},
              {"g_misinfo", graph_to_json(pair.g_misinfo)},
              {"added_true", added_to_json(pair.added_true)},
              {"added_misinfo", added_to_json(pair.added_misinfo)}};
}

EnrichedGraphPair enriched_from_json(const json& j) {
  EnrichedGraphPair pair;
  pair.g_true = graph_from_json(j.at("g_true"));
  pair.g_misinfo = graph_from_json(j.at("g_misinfo"));
  pair.added_true = added_from_json(j.at("added_true"));
  pair.added_misinfo = added_from_json(j.at("added_misinfo"));
  return pair;
}

void save_enriched(const std::map<std::string, EnrichedGraphPair>& pairs,
                   const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write enriched graphs " + path.string());
  for (const auto& [id, pair] : pairs) out << enriched_to_json(id, pair).dump() << '\n';
}

std::map<std::string, EnrichedGraphPair> load_enriched(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open enriched graphs " + path.string());
  std::map<std::string, EnrichedGraphPair> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    try {
      const json j = json::parse(line);
      out.emplace(j.at("doc").get<std::string>(), enriched_from_json(j));
    } catch (const json::exception& e) {
      throw FormatError(path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

}  // namespace tegra
