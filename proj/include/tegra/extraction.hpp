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

#ifndef TEGRA_EXTRACTION_HPP_
#define TEGRA_EXTRACTION_HPP_

#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "tegra/corpus.hpp"

namespace tegra {

enum class Extractor { kBuiltin, kImported };

struct Triple {
  std::string subject;
  std::string predicate;
  std::string object;
  std::string source_doc;
  Extractor extractor = Extractor::kBuiltin;
  std::optional<double> confidence;  // carried through, never used

  bool operator==(const Triple&) const = default;
};

using TriplesByDoc = std::map<std::string, std::vector<Triple>>;

struct VerbLexicon {
  std::set<std::string> entries;
  std::set<std::string> particles;

  bool is_verb(std::string_view token) const;
  bool is_particle(std::string_view token) const;
  void validate() const;
};

/// Lexicon text: "[verbs]" and "[particles]" sections, one token per line,
/// '#' comments.
VerbLexicon parse_lexicon(std::string_view text);
VerbLexicon load_lexicon(const std::filesystem::path& path);

/// The lexicon shipped in data/lexicon.txt, compiled into the library.
const VerbLexicon& default_lexicon();

/// Shallow rule extractor. Sentences end at [.?!]; a sentence is cut into
/// clauses at ',', ';' or "and" when both sides hold a lexicon verb. In each
/// clause the predicate is the first run of lexicon verbs plus any particles
/// that directly follow; the tokens before and after it are subject and
/// object. At most one triple per clause.
std::vector<Triple> extract_builtin(std::string_view text, const VerbLexicon& lexicon,
                                    const std::string& doc_id = "");

/// Built-in extraction over a whole corpus; every document gets an entry.
TriplesByDoc extract_corpus(const Corpus& corpus, const VerbLexicon& lexicon);

/// JSONL records {"doc","subject","predicate","object","confidence"?}.
/// Triples keep file order within each document.
TriplesByDoc import_triples(const std::filesystem::path& path);
void export_triples(const TriplesByDoc& triples, const std::filesystem::path& path);

/// Rejects triples whose source document is not in the corpus and adds empty
/// entries for documents without triples.
void align_triples(TriplesByDoc& triples, const Corpus& corpus);

}  // namespace tegra

#endif  // TEGRA_EXTRACTION_HPP_
