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

#include "tegra/extraction.hpp"

#include <gtest/gtest.h>

#include <algorithm>

#include "tegra/error.hpp"
#include "tegra/random.hpp"
#include "tegra/text.hpp"
#include "test_util.hpp"

namespace tegra {
namespace {

using testing::TempDir;
using testing::write_file;

VerbLexicon lexicon(std::set<std::string> verbs, std::set<std::string> particles = {}) {
  VerbLexicon lex;
  lex.entries = std::move(verbs);
  lex.particles = std::move(particles);
  return lex;
}

TEST(ExtractBuiltin, BornIn) {
  const auto out = extract_builtin("Barack Obama was born in Hawaii.", lexicon({"was", "born"}, {"in"}));
  ASSERT_EQ(out.size(), 1u);
  EXPECT_EQ(out[0].subject, "Barack Obama");
  EXPECT_EQ(out[0].predicate, "was born in");
  EXPECT_EQ(out[0].object, "Hawaii");
  EXPECT_EQ(out[0].extractor, Extractor::kBuiltin);
}

TEST(ExtractBuiltin, NoVerbNoTriple) {
  EXPECT_TRUE(extract_builtin("Hello world", lexicon({"sees"})).empty());
}

TEST(ExtractBuiltin, TwoSentences) {
  const auto out = extract_builtin("A sees B. C sees D.", lexicon({"sees"}), "d");
  ASSERT_EQ(out.size(), 2u);
  EXPECT_EQ(out[0].subject, "A");
  EXPECT_EQ(out[0].object, "B");
  EXPECT_EQ(out[1].subject, "C");
  EXPECT_EQ(out[1].predicate, "sees");
  EXPECT_EQ(out[1].object, "D");
  EXPECT_EQ(out[1].source_doc, "d");
}

TEST(ExtractBuiltin, ClausesSplitOnlyWhenBothSidesHaveAVerb) {
  const auto lex = lexicon({"sees", "likes"});
  const auto split = extract_builtin("A sees B and C likes D", lex);
  ASSERT_EQ(split.size(), 2u);
  EXPECT_EQ(split[0].object, "B");
  EXPECT_EQ(split[1].subject, "C");

  const auto kept = extract_builtin("A sees B and C", lex);
  ASSERT_EQ(kept.size(), 1u);
  EXPECT_EQ(kept[0].object, "B and C");

  EXPECT_EQ(extract_builtin("A sees B; C likes D, E sees F", lex).size(), 3u);
}

TEST(ExtractBuiltin, MissingSubjectOrObjectYieldsNothing) {
  const auto lex = lexicon({"sees"});
  EXPECT_TRUE(extract_builtin("sees B.", lex).empty());
  EXPECT_TRUE(extract_builtin("A sees.", lex).empty());
}

TEST(ExtractBuiltin, EmptyLexiconRejected) {
  EXPECT_THROW(extract_builtin("A sees B", VerbLexicon{}), ValidationError);
}

TEST(ExtractBuiltin, ConservationAndNoEmptyFields) {
  const std::vector<std::string> words = {"Alpha", "beta", "sees", "likes", "on", "and",
                                          "Gamma", "delta", "is", "in"};
  const auto lex = lexicon({"sees", "likes", "is"}, {"on", "in"});
  Rng rng(3);
  for (int trial = 0; trial < 300; ++trial) {
    std::string text;
    const auto n = 1 + uniform_index(rng, 12);
    for (std::uint64_t k = 0; k < n; ++k) text += words[uniform_index(rng, words.size())] + " ";
    const auto toks = split_whitespace(text);
    const auto out = extract_builtin(text, lex);
    EXPECT_EQ(out, extract_builtin(text, lex));
    for (const auto& t : out) {
      for (const auto* phrase : {&t.subject, &t.predicate, &t.object}) {
        ASSERT_FALSE(normalize(*phrase).empty()) << text;
        const auto p = split_whitespace(*phrase);
        EXPECT_NE(std::search(toks.begin(), toks.end(), p.begin(), p.end()), toks.end())
            << *phrase << " not contiguous in " << text;
      }
    }
  }
}

TEST(Lexicon, ParseSectionsAndComments) {
  const auto lex = parse_lexicon("# verbs\n[verbs]\nsees\n\n[particles]\non\n");
  EXPECT_TRUE(lex.is_verb("Sees"));
  EXPECT_TRUE(lex.is_particle("on,"));
  EXPECT_FALSE(lex.is_verb("on"));
  EXPECT_THROW(parse_lexicon("[verbs]\nTwo Words\n"), ValidationError);
  EXPECT_THROW(parse_lexicon("# nothing\n"), ValidationError);
}

TEST(Lexicon, DefaultIsUsable) {
  const auto& lex = default_lexicon();
  EXPECT_GT(lex.entries.size(), 100u);
  EXPECT_TRUE(lex.is_verb("was"));
}

TEST(ImportTriples, SingleRecord) {
  TempDir dir;
  write_file(dir / "t.jsonl", "{\"doc\":\"d1\",\"subject\":\"A\",\"predicate\":\"p\",\"object\":\"B\"}\n");
  const auto t = import_triples(dir / "t.jsonl");
  ASSERT_EQ(t.size(), 1u);
  ASSERT_EQ(t.at("d1").size(), 1u);
  EXPECT_EQ(t.at("d1")[0].extractor, Extractor::kImported);
  EXPECT_FALSE(t.at("d1")[0].confidence.has_value());
}

TEST(ImportTriples, EmptyPredicateReportsRecordIndex) {
  TempDir dir;
  write_file(dir / "t.jsonl",
             "{\"doc\":\"d1\",\"subject\":\"A\",\"predicate\":\"p\",\"object\":\"B\"}\n"
             "{\"doc\":\"d1\",\"subject\":\"A\",\"predicate\":\" \",\"object\":\"B\"}\n");
  try {
    import_triples(dir / "t.jsonl");
    FAIL() << "expected ValidationError";
  } catch (const ValidationError& e) {
    EXPECT_NE(std::string(e.what()).find("record 1"), std::string::npos) << e.what();
  }
}

TEST(ImportTriples, GroupsAndKeepsFileOrder) {
  TempDir dir;
  std::string content;
  const std::vector<std::pair<std::string, std::string>> recs = {
      {"d1", "a"}, {"d2", "b"}, {"d1", "c"}, {"d2", "d"}, {"d1", "e"}};
  for (const auto& [doc, s] : recs) {
    content += "{\"doc\":\"" + doc + "\",\"subject\":\"" + s +
               "\",\"predicate\":\"p\",\"object\":\"o\",\"confidence\":0.5}\n";
  }
  write_file(dir / "t.jsonl", content);
  const auto t = import_triples(dir / "t.jsonl");
  ASSERT_EQ(t.at("d1").size(), 3u);
  ASSERT_EQ(t.at("d2").size(), 2u);
  EXPECT_EQ(t.at("d1")[0].subject, "a");
  EXPECT_EQ(t.at("d1")[1].subject, "c");
  EXPECT_EQ(t.at("d1")[2].subject, "e");
  EXPECT_EQ(t.at("d2")[1].subject, "d");
  EXPECT_EQ(t.at("d2")[0].confidence, 0.5);
}

TEST(ImportTriples, MalformedJsonIsParseError) {
  TempDir dir;
  write_file(dir / "t.jsonl", "{\"doc\":\"d1\",\n");
  EXPECT_THROW(import_triples(dir / "t.jsonl"), ParseError);
  EXPECT_THROW(import_triples(dir / "missing.jsonl"), IoError);
}

TEST(ImportTriples, ExportRoundTrip) {
  TempDir dir;
  const Corpus corpus = {{"a", "Alice sees Bob. Carol likes Dan, Eve sees Frank.", Label::kLegit},
                         {"b", "Nothing here", Label::kMisinfo}};
  auto triples = extract_corpus(corpus, lexicon({"sees", "likes"}));
  ASSERT_EQ(triples.at("a").size(), 3u);
  triples["a"][1].confidence = 0.25;
  export_triples(triples, dir / "t.jsonl");
  auto back = import_triples(dir / "t.jsonl");
  align_triples(back, corpus);
  ASSERT_EQ(back.size(), triples.size());
  for (const auto& [doc, list] : triples) {
    ASSERT_EQ(back.at(doc).size(), list.size());
    for (std::size_t i = 0; i < list.size(); ++i) {
      EXPECT_EQ(back[doc][i].subject, list[i].subject);
      EXPECT_EQ(back[doc][i].predicate, list[i].predicate);
      EXPECT_EQ(back[doc][i].object, list[i].object);
      EXPECT_EQ(back[doc][i].source_doc, doc);
      EXPECT_EQ(back[doc][i].confidence, list[i].confidence);
    }
  }
}

TEST(AlignTriples, RejectsUnknownDocuments) {
  TriplesByDoc t;
  t["ghost"].push_back({"A", "p", "B", "ghost"});
  EXPECT_THROW(align_triples(t, {{"a", "x", Label::kLegit}}), ValidationError);
}

}  // namespace
}  // namespace tegra
