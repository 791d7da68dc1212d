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

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "tegra/error.hpp"
#include "tegra/text.hpp"
#include "test_util.hpp"

namespace tegra {
namespace {

using testing::TempDir;
using testing::read_file;
using testing::write_file;

Triple tr(std::string s, std::string p, std::string o, std::string doc) {
  return {std::move(s), std::move(p), std::move(o), std::move(doc)};
}

FoldPlan plan_of(std::map<std::string, Split> a) { return FoldPlan{0, std::move(a)}; }

ClassKG kg_of(std::vector<Triple> ts, Label label = Label::kLegit) {
  ClassKG kg;
  kg.class_label = label;
  for (auto& t : ts) {
    kg.provenance.insert(t.source_doc);
    kg.triples.push_back({std::move(t), std::nullopt, std::nullopt});
  }
  kg.rebuild_index();
  return kg;
}

TEST(BuildClassKg, TakesTrainingDocsOfTheClass) {
  const Corpus corpus = {{"m1", "x", Label::kMisinfo}, {"m2", "x", Label::kMisinfo},
                         {"l1", "x", Label::kLegit}};
  TriplesByDoc triples;
  triples["m1"] = {tr("A", "p", "B", "m1"), tr("B", "q", "C", "m1")};
  triples["m2"] = {tr("X", "p", "Y", "m2")};
  triples["l1"] = {tr("L", "p", "M", "l1")};
  const auto plan = plan_of({{"m1", Split::kTrain}, {"m2", Split::kTest}, {"l1", Split::kTrain}});
  const auto kg = build_class_kg(plan, corpus, triples, {}, Label::kMisinfo);
  ASSERT_EQ(kg.triples.size(), 2u);
  EXPECT_EQ(kg.provenance, std::set<std::string>{"m1"});
  EXPECT_NO_THROW(check_provenance(kg, plan));
  EXPECT_EQ(kg.class_label, Label::kMisinfo);
  EXPECT_EQ(build_class_kg(plan, corpus, triples, {}, Label::kLegit).triples.size(), 1u);
}

TEST(BuildClassKg, CarriesUrisFromLinks) {
  const Corpus corpus = {{"a", "x", Label::kLegit}};
  TriplesByDoc triples;
  triples["a"] = {tr("Paris", "is in", "France", "a")};
  LinksByDoc links;
  links["a"] = {{1, "u:france", 1.0}};
  const auto kg = build_class_kg(plan_of({{"a", Split::kTrain}}), corpus, triples, links, Label::kLegit);
  ASSERT_EQ(kg.triples.size(), 1u);
  EXPECT_FALSE(kg.triples[0].subject_uri);
  EXPECT_EQ(kg.triples[0].object_uri, "u:france");
  EXPECT_EQ(kg.uri_index.at("u:france"), std::vector<std::size_t>{0});
  EXPECT_EQ(kg.norm_index.at("paris"), std::vector<std::size_t>{0});
}

TEST(BuildClassKg, Errors) {
  const Corpus corpus = {{"a", "x", Label::kLegit}, {"b", "x", Label::kLegit}};
  EXPECT_THROW(build_class_kg(plan_of({{"a", Split::kTrain}}), corpus, {}, {}, Label::kLegit),
               ValidationError);
  EXPECT_THROW(build_class_kg(plan_of({{"a", Split::kTrain}, {"b", Split::kTest}}), corpus, {}, {},
                              Label::kLegit),
               ValidationError);
  auto kg = kg_of({tr("A", "p", "B", "b")});
  EXPECT_THROW(check_provenance(kg, plan_of({{"a", Split::kTrain}, {"b", Split::kValidation}})),
               ValidationError);
}

TEST(BuildClassKg, LeakageGuardOnEveryFold) {
  SyntheticSpec spec;
  spec.n_docs = 100;
  const Corpus corpus = generate_synthetic(spec);
  const auto triples = extract_corpus(corpus, default_lexicon());
  for (const auto& plan : make_folds(corpus, 5, 13)) {
    for (Label label : {Label::kLegit, Label::kMisinfo}) {
      const auto kg = build_class_kg(plan, corpus, triples, {}, label);
      std::size_t expected = 0;
      for (const auto& doc : corpus) {
        const Split s = plan.assignments.at(doc.id);
        if (s != Split::kTrain) EXPECT_FALSE(kg.provenance.count(doc.id)) << doc.id;
        if (s == Split::kTrain && doc.label == label) expected += triples.at(doc.id).size();
      }
      EXPECT_EQ(kg.triples.size(), expected);
    }
  }
}

TEST(Retrieve, AllMatchesUnderTheCap) {
  const auto kg = kg_of({tr("U", "p", "A", "d"), tr("B", "q", "U", "d"), tr("U", "r", "C", "d"),
                         tr("X", "p", "Y", "d")});
  EXPECT_EQ(retrieve(kg, {{std::nullopt, "u"}}, 10).size(), 3u);
  EXPECT_TRUE(retrieve(kg, {{std::nullopt, "nobody"}}, 10).empty());
  EXPECT_THROW(retrieve(kg, {{std::nullopt, "u"}}, 0), ValidationError);
}

TEST(Retrieve, FrequencyRanking) {
  std::vector<Triple> ts = {tr("U", "once", "B", "d")};
  for (int i = 0; i < 5; ++i) ts.push_back(tr("U", "often", "A", "d" + std::to_string(i)));
  const auto kg = kg_of(ts);
  const auto one = retrieve(kg, {{std::nullopt, "u"}}, 1);
  ASSERT_EQ(one.size(), 1u);
  EXPECT_EQ(one[0].triple.predicate, "often");
  const auto both = retrieve(kg, {{std::nullopt, "u"}}, 10);
  ASSERT_EQ(both.size(), 2u);
  EXPECT_EQ(both[1].triple.predicate, "once");
}

TEST(Retrieve, InsertionOrderBreaksTiesAndKeysDeduplicate) {
  const auto kg = kg_of({tr("U", "first", "A", "d"), tr("U", "second", "B", "d"), tr("A", "third", "C", "d")});
  const auto r = retrieve(kg, {{std::nullopt, "u"}, {std::nullopt, "a"}}, 10);
  ASSERT_EQ(r.size(), 3u);
  EXPECT_EQ(r[0].triple.predicate, "first");
  EXPECT_EQ(r[1].triple.predicate, "second");
  EXPECT_EQ(r[2].triple.predicate, "third");
}

TEST(Retrieve, UriPreferredOverLabel) {
  auto kg = kg_of({tr("Paris", "p", "A", "d"), tr("City of Light", "q", "B", "d")});
  kg.triples[1].subject_uri = "u:paris";
  kg.rebuild_index();
  const auto r = retrieve(kg, {{std::string("u:paris"), "paris"}}, 10);
  ASSERT_EQ(r.size(), 1u);
  EXPECT_EQ(r[0].triple.predicate, "q");
  EXPECT_EQ(retrieve(kg, {{std::string("u:unknown"), "paris"}}, 10)[0].triple.predicate, "p");
}

TEST(Enrich, EmptyKgsLeaveTheGraph) {
  const auto g = build_graph("d", {tr("X", "p", "Y", "d")});
  const auto pair = enrich(g, {}, ClassKG{}, ClassKG{}, 10);
  EXPECT_EQ(pair.g_true, g);
  EXPECT_EQ(pair.g_misinfo, g);
  EXPECT_TRUE(pair.added_true.empty());
  EXPECT_TRUE(pair.added_misinfo.empty());
}

TEST(Enrich, AddsNodeAndEdge) {
  const auto g = build_graph("d", {tr("X", "p", "Z", "d")});
  const auto pair = enrich(g, {}, kg_of({tr("X", "v", "Y", "t")}), ClassKG{}, 10);
  ASSERT_EQ(pair.g_true.nodes.size(), 3u);
  EXPECT_EQ(pair.g_true.nodes[2].label, "Y");
  EXPECT_EQ(pair.g_true.nodes[2].origin, Origin::kAddedTrue);
  EXPECT_EQ(pair.g_true.nodes[2].ts_group, 0);
  ASSERT_EQ(pair.g_true.edges.size(), 2u);
  EXPECT_EQ(pair.g_true.edges[1], (EdgeRecord{0, 2, "v", Origin::kAddedTrue, 0}));
  ASSERT_EQ(pair.added_true.size(), 1u);
  EXPECT_EQ(pair.added_true[0].ts_group, 0);
  EXPECT_EQ(pair.g_misinfo, g);
}

TEST(Enrich, ExistingEndpointsAddOnlyAnEdge) {
  const auto g = build_graph("d", {tr("X", "p", "Y", "d")});
  const auto pair = enrich(g, {}, ClassKG{}, kg_of({tr("y", "w", "x", "m")}, Label::kMisinfo), 10);
  EXPECT_EQ(pair.g_misinfo.nodes.size(), 2u);
  ASSERT_EQ(pair.g_misinfo.edges.size(), 2u);
  EXPECT_EQ(pair.g_misinfo.edges[1], (EdgeRecord{1, 0, "w", Origin::kAddedMisinfo, 0}));
}

TEST(Enrich, RejectsEnrichedInput) {
  auto g = build_graph("d", {tr("X", "p", "Y", "d")});
  g.intern("Z", Origin::kAddedTrue, 0);
  EXPECT_THROW(enrich(g, {}, ClassKG{}, ClassKG{}, 10), ValidationError);
}

TEST(Enrich, ConservationGroupsAndDeterminism) {
  SyntheticSpec spec;
  spec.n_docs = 60;
  const Corpus corpus = generate_synthetic(spec);
  const auto triples = extract_corpus(corpus, default_lexicon());
  const auto plan = make_folds(corpus, 1, 4).front();
  const auto kg_true = build_class_kg(plan, corpus, triples, {}, Label::kLegit);
  const auto kg_misinfo = build_class_kg(plan, corpus, triples, {}, Label::kMisinfo);
  std::size_t total_added = 0;
  for (const auto& doc : corpus) {
    const auto g = build_graph(doc.id, triples.at(doc.id));
    const auto pair = enrich(g, {}, kg_true, kg_misinfo, 3);
    EXPECT_EQ(oracle::base_multiset(pair.g_true), oracle::base_multiset(g));
    EXPECT_EQ(oracle::base_multiset(pair.g_misinfo), oracle::base_multiset(g));
    for (const auto* eg : {&pair.g_true, &pair.g_misinfo}) {
      const auto& added = eg == &pair.g_true ? pair.added_true : pair.added_misinfo;
      total_added += added.size();
      std::vector<int> edges_per_group(added.size(), 0);
      for (const auto& n : eg->nodes) {
        EXPECT_EQ(n.origin == Origin::kBase, !n.ts_group.has_value());
        if (n.ts_group) EXPECT_LT(*n.ts_group, static_cast<int>(added.size()));
      }
      for (const auto& e : eg->edges) {
        ASSERT_EQ(e.origin == Origin::kBase, !e.ts_group.has_value());
        if (e.ts_group) ++edges_per_group.at(*e.ts_group);
      }
      for (int c : edges_per_group) EXPECT_EQ(c, 1);
      for (std::size_t i = 0; i < added.size(); ++i) EXPECT_EQ(added[i].ts_group, static_cast<int>(i));
    }
    const auto again = enrich(g, {}, kg_true, kg_misinfo, 3);
    EXPECT_EQ(again.g_true, pair.g_true);
    EXPECT_EQ(again.g_misinfo, pair.g_misinfo);
  }
  EXPECT_GT(total_added, 0u);
}

TEST(KgFile, RoundTrip) {
  TempDir dir;
  auto kg = kg_of({tr("A", "p", "B", "d1"), tr("B", "q", "C", "d2")}, Label::kMisinfo);
  kg.triples[0].subject_uri = "u:a";
  kg.triples[1].triple.confidence = 0.75;
  kg.triples[1].triple.extractor = Extractor::kImported;
  kg.rebuild_index();
  save_kg(kg, dir / "kg.json");
  EXPECT_EQ(load_kg(dir / "kg.json"), kg);
}

TEST(KgFile, TruncatedOrWrongVersion) {
  TempDir dir;
  save_kg(kg_of({tr("A", "p", "B", "d1")}), dir / "kg.json");
  const std::string full = read_file(dir / "kg.json");
  write_file(dir / "cut.json", full.substr(0, full.size() / 2));
  EXPECT_THROW(load_kg(dir / "cut.json"), FormatError);
  auto j = nlohmann::json::parse(full);
  j["version"] = 99;
  write_file(dir / "v.json", j.dump());
  EXPECT_THROW(load_kg(dir / "v.json"), FormatError);
}

TEST(KgFile, LargeKgIndexMatchesRebuild) {
  TempDir dir;
  Rng rng(8);
  std::vector<Triple> ts;
  for (int i = 0; i < 1000; ++i) {
    ts.push_back(tr("e" + std::to_string(uniform_index(rng, 60)), "p" + std::to_string(uniform_index(rng, 5)),
                    "e" + std::to_string(uniform_index(rng, 60)), "d" + std::to_string(i % 37)));
  }
  auto kg = kg_of(ts);
  for (std::size_t i = 0; i < kg.triples.size(); i += 7) kg.triples[i].object_uri = "u:" + std::to_string(i % 11);
  kg.rebuild_index();
  save_kg(kg, dir / "kg.json");
  const auto back = load_kg(dir / "kg.json");
  EXPECT_EQ(back.triples.size(), 1000u);
  ClassKG rebuilt;
  rebuilt.triples = back.triples;
  rebuilt.rebuild_index();
  EXPECT_EQ(back.norm_index, rebuilt.norm_index);
  EXPECT_EQ(back.uri_index, kg.uri_index);
  EXPECT_EQ(back.frequency, kg.frequency);
  for (const auto& [key, idx] : back.norm_index) {
    for (auto i : idx) {
      const auto& t = back.triples[i].triple;
      EXPECT_TRUE(normalize(t.subject) == key || normalize(t.object) == key);
    }
  }
}

TEST(EnrichedFile, RoundTrip) {
  TempDir dir;
  const auto g = build_graph("d", {tr("X", "p", "Z", "d")});
  std::map<std::string, EnrichedGraphPair> pairs;
  pairs["d"] = enrich(g, {{0, "u:x", 1.0}}, kg_of({tr("X", "v", "Y", "t")}),
                      kg_of({tr("Z", "w", "Q", "m"), tr("X", "w", "Z", "m")}, Label::kMisinfo), 10);
  save_enriched(pairs, dir / "e.jsonl");
  const auto back = load_enriched(dir / "e.jsonl");
  ASSERT_EQ(back.size(), 1u);
  const auto& b = back.at("d");
  EXPECT_EQ(b.g_true, pairs["d"].g_true);
  EXPECT_EQ(b.g_misinfo, pairs["d"].g_misinfo);
  ASSERT_EQ(b.added_misinfo.size(), 2u);
  EXPECT_EQ(b.added_misinfo[1].triple, pairs["d"].added_misinfo[1].triple);
  EXPECT_EQ(b.added_misinfo[1].ts_group, 1);
  write_file(dir / "bad.jsonl", "{\"doc\":1}\n");
  EXPECT_THROW(load_enriched(dir / "bad.jsonl"), FormatError);
}

}  // namespace
}  // namespace tegra
