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

#include <cctype>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "tegra/error.hpp"
#include "tegra/text.hpp"

namespace tegra {

extern const char* const kDefaultLexiconText;

namespace {

// Lowercased token with non-word characters stripped from both ends.
std::string match_key(std::string_view token) {
  auto word = [](unsigned char c) { return std::isalnum(c) || c >= 0x80; };
  while (!token.empty() && !word(token.front())) token.remove_prefix(1);
  while (!token.empty() && !word(token.back())) token.remove_suffix(1);
  return to_lower(token);
}

bool is_separator(std::string_view tok) { return tok == "," || tok == ";"; }

bool is_boundary(std::string_view tok) {
  return is_separator(tok) || to_lower(tok) == "and";
}

// Whitespace tokens with ',' and ';' split off as tokens of their own.
std::vector<std::string> clause_tokens(std::string_view sentence) {
  std::vector<std::string> out;
  for (const auto& raw : split_whitespace(sentence)) {
    std::string cur;
    for (char c : raw) {
      if (c == ',' || c == ';') {
        if (!cur.empty()) out.push_back(std::move(cur));
        cur.clear();
        out.emplace_back(1, c);
      } else {
        cur.push_back(c);
      }
    }
    if (!cur.empty()) out.push_back(std::move(cur));
  }
  return out;
}

std::string join_phrase(const std::vector<std::string>& toks, std::size_t begin, std::size_t end) {
  std::string out;
  for (std::size_t i = begin; i < end; ++i) {
    if (!out.empty() && !is_separator(toks[i])) out.push_back(' ');
    out += toks[i];
  }
  return out;
}

}  // namespace

bool VerbLexicon::is_verb(std::string_view token) const {
  return entries.count(match_key(token)) > 0;
}

bool VerbLexicon::is_particle(std::string_view token) const {
  return particles.count(match_key(token)) > 0;
}

void VerbLexicon::validate() const {
  if (entries.empty()) throw ValidationError("verb lexicon is empty");
  for (const auto* set : {&entries, &particles}) {
    for (const auto& e : *set) {
      if (e.empty() || e != to_lower(e) || split_whitespace(e).size() != 1) {
        throw ValidationError("lexicon entry '" + e + "' must be a single lowercase token");
      }
    }
  }
}

VerbLexicon parse_lexicon(std::string_view text) {
  VerbLexicon lex;
  std::set<std::string>* target = &lex.entries;
  std::istringstream in{std::string(text)};
  std::string line;
  while (std::getline(in, line)) {
    auto t = trim(line);
    if (t.empty() || t.front() == '#') continue;
    if (t == "[verbs]") {
      target = &lex.entries;
    } else if (t == "[particles]") {
      target = &lex.particles;
    } else {
      target->insert(std::string(t));
    }
  }
  lex.validate();
  return lex;
}

VerbLexicon load_lexicon(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open lexicon " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_lexicon(ss.str());
}

const VerbLexicon& default_lexicon() {
  static const VerbLexicon lex = parse_lexicon(kDefaultLexiconText);
  return lex;
}

std::vector<Triple> extract_builtin(std::string_view text, const VerbLexicon& lexicon,
                                    const std::string& doc_id) {
  lexicon.validate();
  std::vector<Triple> out;

  auto has_verb = [&](const std::vector<std::string>& toks, std::size_t b, std::size_t e) {
    for (std::size_t i = b; i < e; ++i) {
      if (lexicon.is_verb(toks[i])) return true;
    }
    return false;
  };

  auto emit_clause = [&](const std::vector<std::string>& toks, std::size_t b, std::size_t e) {
    std::size_t i = b;
    while (i < e && !lexicon.is_verb(toks[i])) ++i;
    if (i == e) return;
    std::size_t j = i;
    while (j < e && lexicon.is_verb(toks[j])) ++j;
    while (j < e && lexicon.is_particle(toks[j])) ++j;
    Triple t;
    t.subject = join_phrase(toks, b, i);
    t.predicate = join_phrase(toks, i, j);
    t.object = join_phrase(toks, j, e);
    if (normalize(t.subject).empty() || normalize(t.object).empty()) return;
    t.source_doc = doc_id;
    t.extractor = Extractor::kBuiltin;
    out.push_back(std::move(t));
  };

  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t stop = text.find_first_of(".?!", start);
    if (stop == std::string_view::npos) stop = text.size();
    const auto toks = clause_tokens(text.substr(start, stop - start));

    std::size_t clause_begin = 0;
    std::size_t i = 0;
    while (i < toks.size()) {
      if (!is_boundary(toks[i])) {
        ++i;
        continue;
      }
      std::size_t group_end = i;
      while (group_end < toks.size() && is_boundary(toks[group_end])) ++group_end;
      if (has_verb(toks, clause_begin, i) && has_verb(toks, group_end, toks.size())) {
        emit_clause(toks, clause_begin, i);
        clause_begin = group_end;
      }
      i = group_end;
    }
    emit_clause(toks, clause_begin, toks.size());
    start = stop + 1;
  }
  return out;
}

TriplesByDoc extract_corpus(const Corpus& corpus, const VerbLexicon& lexicon) {
  TriplesByDoc out;
  for (const auto& doc : corpus) out[doc.id] = extract_builtin(doc.text, lexicon, doc.id);
  return out;
}

TriplesByDoc import_triples(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open triples file " + path.string());
  TriplesByDoc out;
  std::string line;
  std::size_t record = 0;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    Triple t;
    try {
      const auto j = nlohmann::json::parse(line);
      t.source_doc = j.at("doc").get<std::string>();
      t.subject = j.at("subject").get<std::string>();
      t.predicate = j.at("predicate").get<std::string>();
      t.object = j.at("object").get<std::string>();
      if (j.contains("confidence") && !j["confidence"].is_null()) {
        t.confidence = j["confidence"].get<double>();
      }
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
    for (const auto* field : {&t.subject, &t.predicate, &t.object}) {
      if (normalize(*field).empty()) {
        throw ValidationError("triple record " + std::to_string(record) + " (line " +
                              std::to_string(line_no) + ") has an empty phrase");
      }
    }
    t.extractor = Extractor::kImported;
    out[t.source_doc].push_back(std::move(t));
    ++record;
  }
  return out;
}

void export_triples(const TriplesByDoc& triples, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write triples file " + path.string());
  for (const auto& [doc, list] : triples) {
    for (const auto& t : list) {
      nlohmann::json j{{"doc", doc},
                       {"subject", t.subject},
                       {"predicate", t.predicate},
                       {"object", t.object}};
      if (t.confidence) j["confidence"] = *t.confidence;
      out << j.dump() << '\n';
    }
  }
}

void align_triples(TriplesByDoc& triples, const Corpus& corpus) {
  std::set<std::string> ids;
  for (const auto& doc : corpus) ids.insert(doc.id);
  for (const auto& [doc, list] : triples) {
    if (!ids.count(doc)) {
      throw ValidationError("triples reference unknown document '" + doc + "'");
    }
  }
  for (const auto& id : ids) triples[id];
}

}  // namespace tegra
