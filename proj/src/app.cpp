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

#include "tegra/app.hpp"

#include <openssl/evp.h>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <mutex>
#include <set>
#include <sstream>

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_sinks.h>
#include <spdlog/spdlog.h>

#include "tegra/error.hpp"
#include "tegra/extraction.hpp"
#include "tegra/graph.hpp"
#include "tegra/knowledge.hpp"
#include "tegra/random.hpp"
#include "tegra/text.hpp"

namespace tegra {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// Reads typed fields out of one JSON object, collecting every problem.
class FieldReader {
 public:
  FieldReader(const json& j, std::string prefix, std::vector<std::string>& errors)
      : j_(j), prefix_(std::move(prefix)), errors_(errors) {
    if (!j_.is_object()) errors_.push_back(name("") + " must be an object");
  }

  template <typename T>
  void get(const char* key, T& out) {
    if (!take(key)) return;
    try {
      out = j_[key].get<T>();
    } catch (const json::exception&) {
      errors_.push_back(name(key) + ": unexpected value " + j_[key].dump());
    }
  }

  void path(const char* key, std::optional<fs::path>& out, const fs::path& base) {
    if (!take(key) || j_[key].is_null()) return;
    if (!j_[key].is_string()) {
      errors_.push_back(name(key) + ": expected a path string");
      return;
    }
    fs::path p = j_[key].get<std::string>();
    out = p.is_relative() && !base.empty() ? base / p : p;
  }

  const json* object(const char* key) {
    if (!take(key)) return nullptr;
    return &j_[key];
  }

  void finish() {
    if (!j_.is_object()) return;
    for (const auto& [key, _] : j_.items()) {
      if (!seen_.count(key)) errors_.push_back(name(key.c_str()) + ": unknown field");
    }
  }

  std::string name(const char* key) const {
    return prefix_.empty() ? std::string(key) : prefix_ + (*key ? "." : "") + key;
  }

 private:
  bool take(const char* key) {
    seen_.insert(key);
    return j_.is_object() && j_.contains(key);
  }

  const json& j_;
  std::string prefix_;
  std::vector<std::string>& errors_;
  std::set<std::string> seen_;
};

json opt_path(const std::optional<fs::path>& p) { return p ? json(p->string()) : json(nullptr); }

std::string join(const std::vector<std::string>& items, const std::string& sep) {
  std::string out;
  for (const auto& s : items) {
    if (!out.empty()) out += sep;
    out += s;
  }
  return out;
}

}  // namespace

RunConfig run_config_from_json(const json& j, const fs::path& base_dir) {
  RunConfig c;
  c.train.lr = 1e-3;
  std::vector<std::string> errors;
  FieldReader top(j, "", errors);
  if (const json* p = top.object("paths")) {
    FieldReader r(*p, "paths", errors);
    r.path("corpus", c.paths.corpus, base_dir);
    r.path("triples", c.paths.triples, base_dir);
    r.path("vectors", c.paths.vectors, base_dir);
    r.path("doc_embeddings", c.paths.doc_embeddings, base_dir);
    r.path("gazetteer", c.paths.gazetteer, base_dir);
    r.path("lexicon", c.paths.lexicon, base_dir);
    r.path("links", c.paths.links, base_dir);
    r.path("kg_true", c.paths.kg_true, base_dir);
    r.path("kg_misinfo", c.paths.kg_misinfo, base_dir);
    r.path("enriched", c.paths.enriched, base_dir);
    r.path("fold_plan", c.paths.fold_plan, base_dir);
    std::optional<fs::path> out;
    r.path("output_dir", out, base_dir);
    if (out) c.paths.output_dir = *out;
    r.finish();
  }
  top.get("extraction", c.extraction);
  if (const json* p = top.object("linker")) {
    FieldReader r(*p, "linker", errors);
    r.get("kind", c.linker.kind);
    r.get("endpoint", c.linker.endpoint);
    r.get("threshold", c.linker.threshold);
    r.get("min_span", c.linker.min_span);
    r.get("retries", c.linker.retries);
    r.get("in_flight", c.linker.in_flight);
    r.finish();
  }
  std::string mode = std::string(to_string(c.model.mode));
  top.get("mode", mode);
  try {
    c.model.mode = parse_mode(mode);
  } catch (const ConfigError& e) {
    errors.push_back(std::string("mode: ") + e.what());
  }
  top.get("ts", c.model.ts_enabled);
  if (const json* p = top.object("model")) {
    FieldReader r(*p, "model", errors);
    r.get("gat_layers", c.model.n_gat_layers);
    r.get("d_out", c.model.d_out);
    r.get("d_h", c.model.d_h);
    r.get("d_hidden", c.model.d_hidden);
    r.get("slope", c.model.slope);
    r.finish();
  }
  if (const json* p = top.object("train")) {
    FieldReader r(*p, "train", errors);
    r.get("lr", c.train.lr);
    r.get("max_epochs", c.train.max_epochs);
    r.get("patience", c.train.patience);
    r.get("batch_size", c.train.batch_size);
    r.get("beta1", c.train.beta1);
    r.get("beta2", c.train.beta2);
    r.get("eps", c.train.eps);
    r.finish();
  }
  if (const json* p = top.object("folds")) {
    FieldReader r(*p, "folds", errors);
    r.get("count", c.n_folds);
    r.get("stratified", c.stratified);
    r.get("fold", c.fold);
    r.finish();
  }
  top.get("seed", c.seed);
  top.get("retrieval_cap", c.retrieval_cap);
  top.get("configs", c.configs);
  top.get("jobs", c.jobs);
  if (const json* p = top.object("synth"); p && !p->is_null()) {
    SynthConfig s;
    FieldReader r(*p, "synth", errors);
    r.get("n_docs", s.spec.n_docs);
    r.get("n_true_facts", s.spec.n_true_facts);
    r.get("n_fake_facts", s.spec.n_fake_facts);
    r.get("facts_per_doc", s.spec.facts_per_doc);
    r.get("noise_sentences_per_doc", s.spec.noise_sentences_per_doc);
    r.get("seed", s.spec.seed);
    r.get("vector_dim", s.vector_dim);
    r.finish();
    c.synth = s;
  }
  top.finish();
  if (!errors.empty()) throw ConfigError("invalid config: " + join(errors, "; "));
  return c;
}

RunConfig load_run_config(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  json j;
  try {
    j = json::parse(ss.str());
  } catch (const json::exception& e) {
    throw ConfigError("config " + path.string() + " is not valid JSON: " + e.what());
  }
  return run_config_from_json(j, fs::absolute(path).parent_path());
}

json run_config_to_json(const RunConfig& c) {
  json j;
  j["paths"] = {{"corpus", opt_path(c.paths.corpus)},
                {"triples", opt_path(c.paths.triples)},
                {"vectors", opt_path(c.paths.vectors)},
                {"doc_embeddings", opt_path(c.paths.doc_embeddings)},
                {"gazetteer", opt_path(c.paths.gazetteer)},
                {"lexicon", opt_path(c.paths.lexicon)},
                {"links", opt_path(c.paths.links)},
                {"kg_true", opt_path(c.paths.kg_true)},
                {"kg_misinfo", opt_path(c.paths.kg_misinfo)},
                {"enriched", opt_path(c.paths.enriched)},
                {"fold_plan", opt_path(c.paths.fold_plan)},
                {"output_dir", c.paths.output_dir.string()}};
  j["extraction"] = c.extraction;
  j["linker"] = {{"kind", c.linker.kind},           {"endpoint", c.linker.endpoint},
                 {"threshold", c.linker.threshold}, {"min_span", c.linker.min_span},
                 {"retries", c.linker.retries},     {"in_flight", c.linker.in_flight}};
  j["mode"] = to_string(c.model.mode);
  j["ts"] = c.model.ts_enabled;
  j["model"] = {{"gat_layers", c.model.n_gat_layers},
                {"d_out", c.model.d_out},
                {"d_h", c.model.d_h},
                {"d_hidden", c.model.d_hidden},
                {"slope", c.model.slope}};
  json train = train_config_to_json(c.train);
  train.erase("seed");
  j["train"] = train;
  j["folds"] = {{"count", c.n_folds}, {"stratified", c.stratified}, {"fold", c.fold}};
  j["seed"] = c.seed;
  j["retrieval_cap"] = c.retrieval_cap;
  j["configs"] = c.configs;
  j["jobs"] = c.jobs;
  if (c.synth) {
    const auto& s = c.synth->spec;
    j["synth"] = {{"n_docs", s.n_docs},
                  {"n_true_facts", s.n_true_facts},
                  {"n_fake_facts", s.n_fake_facts},
                  {"facts_per_doc", s.facts_per_doc},
                  {"noise_sentences_per_doc", s.noise_sentences_per_doc},
                  {"seed", s.seed},
                  {"vector_dim", c.synth->vector_dim}};
  }
  return j;
}

NamedConfig named_config(const std::string& name, const ModelConfig& base) {
  NamedConfig nc{name, base};
  nc.model.dropped.reset();
  if (name == "text_only") {
    nc.model.mode = Mode::kTextOnly;
  } else if (name == "teg") {
    nc.model.mode = Mode::kTeg;
  } else if (name == "tegra") {
    nc.model.mode = Mode::kTegra;
    nc.model.ts_enabled = true;
  } else if (name == "tegra-no-ts") {
    nc.model.mode = Mode::kTegra;
    nc.model.ts_enabled = false;
  } else if (name == "tegra-no-g_true" || name == "tegra-no-g_misinfo") {
    nc.model.mode = Mode::kTegra;
    nc.model.ts_enabled = true;
    nc.model.dropped = name.ends_with("g_true") ? Channel::kTrue : Channel::kMisinfo;
  } else {
    throw ConfigError("unknown experiment configuration '" + name + "'");
  }
  return nc;
}

WordVectorTable synthetic_vectors(const Corpus& corpus, int dim, std::uint64_t seed) {
  std::set<std::string> vocab;
  for (const auto& doc : corpus) {
    for (auto& tok : tokenize(doc.text)) vocab.insert(std::move(tok));
  }
  WordVectorTable table(dim);
  Rng rng(seed ^ 0x7ec7025eedULL);
  for (const auto& tok : vocab) {
    Eigen::VectorXd v(dim);
    for (int k = 0; k < dim; ++k) v[k] = standard_normal(rng);
    table.add(tok, v);
  }
  return table;
}

Gazetteer synthetic_gazetteer(const SyntheticSpec& spec) {
  const SyntheticWorld world = make_synthetic_world(spec);
  Gazetteer gaz;
  for (const auto& e : world.entities) gaz.add(e, "syn:entity/" + e);
  for (const auto& v : world.values) gaz.add(v, "syn:value/" + v);
  return gaz;
}

std::string sha256_hex(std::string_view data) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (!EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr)) {
    throw Error("internal", "sha256 failed");
  }
  std::ostringstream out;
  for (unsigned int i = 0; i < len; ++i) {
    out << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(digest[i]);
  }
  return out.str();
}

std::string sha256_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return sha256_hex(ss.str());
}

namespace {

// ---------------------------------------------------------------------------
// Command session: resolves inputs (explicit path, then the file an earlier
// stage wrote into the output directory, then in-memory construction) and
// records what was read.

class Session {
 public:
  Session(RunConfig config, fs::path out) : c_(std::move(config)), out_(std::move(out)) {}

  const RunConfig& config() const { return c_; }
  const fs::path& out() const { return out_; }
  const std::vector<fs::path>& inputs() const { return inputs_; }
  std::vector<std::string>& outputs() { return outputs_; }

  fs::path output(const std::string& name) {
    fs::create_directories(out_);
    outputs_.push_back(name);
    return out_ / name;
  }

  std::optional<fs::path> find(const std::optional<fs::path>& explicit_path, const char* stage_file) {
    if (explicit_path) return read(*explicit_path);
    const fs::path p = out_ / stage_file;
    if (fs::exists(p)) {
      spdlog::info("using {} from an earlier stage", p.string());
      return read(p);
    }
    return std::nullopt;
  }

  const Corpus& corpus() {
    if (!corpus_) {
      if (c_.paths.corpus) {
        corpus_ = load_corpus(read(*c_.paths.corpus));
      } else if (c_.synth) {
        corpus_ = generate_synthetic(c_.synth->spec);
      } else {
        throw ConfigError("paths.corpus is required (or a synth section)");
      }
    }
    return *corpus_;
  }

  WordVectorTable vectors() {
    if (c_.paths.vectors) return load_vectors(read(*c_.paths.vectors));
    if (c_.synth) return synthetic_vectors(corpus(), c_.synth->vector_dim, c_.synth->spec.seed);
    throw ConfigError("paths.vectors is required (or a synth section)");
  }

  std::optional<DocEmbeddingStore> doc_embeddings() {
    if (!c_.paths.doc_embeddings) return std::nullopt;
    return load_doc_embeddings(read(*c_.paths.doc_embeddings));
  }

  TriplesByDoc extract() {
    if (c_.extraction == "import") {
      if (!c_.paths.triples) throw ConfigError("paths.triples is required when extraction is import");
      auto t = import_triples(read(*c_.paths.triples));
      align_triples(t, corpus());
      return t;
    }
    if (c_.extraction != "builtin") {
      throw ConfigError("extraction must be builtin or import, got '" + c_.extraction + "'");
    }
    if (c_.paths.lexicon) return extract_corpus(corpus(), load_lexicon(read(*c_.paths.lexicon)));
    return extract_corpus(corpus(), default_lexicon());
  }

  const TriplesByDoc& triples() {
    if (!triples_) {
      const auto p = c_.extraction == "import" ? std::nullopt : find(c_.paths.triples, "triples.jsonl");
      if (p) {
        triples_ = import_triples(*p);
        align_triples(*triples_, corpus());
      } else {
        triples_ = extract();
      }
    }
    return *triples_;
  }

  LinksByDoc link() {
    LinksByDoc links;
    const auto& linker = c_.linker;
    if (linker.kind == "none") return links;
    if (linker.kind == "gazetteer") {
      Gazetteer gaz;
      if (c_.paths.gazetteer) {
        gaz = load_gazetteer(read(*c_.paths.gazetteer));
      } else if (c_.synth) {
        gaz = synthetic_gazetteer(c_.synth->spec);
      } else {
        throw ConfigError("linker.kind gazetteer needs paths.gazetteer");
      }
      for (const auto& doc : corpus()) {
        auto l = link_gazetteer(build_graph(doc.id, triples().at(doc.id)), gaz, linker.min_span);
        if (!l.empty()) links[doc.id] = std::move(l);
      }
      return links;
    }
    if (linker.kind == "remote") {
      if (linker.endpoint.empty()) throw ConfigError("linker.endpoint is required for the remote linker");
      RemoteLinkerOptions opt;
      opt.endpoint = linker.endpoint;
      opt.confidence_threshold = linker.threshold;
      opt.max_retries = linker.retries;
      opt.in_flight = linker.in_flight;
      for (const auto& doc : corpus()) {
        auto r = link_remote(build_graph(doc.id, triples().at(doc.id)), opt);
        if (r.retries) spdlog::info("{}: {} retried requests", doc.id, r.retries);
        if (!r.links.empty()) links[doc.id] = std::move(r.links);
      }
      return links;
    }
    throw ConfigError("linker.kind must be none, gazetteer or remote, got '" + linker.kind + "'");
  }

  const LinksByDoc& links() {
    if (!links_) {
      if (auto p = find(c_.paths.links, "links.jsonl")) {
        links_ = load_links(*p);
      } else {
        links_ = link();
      }
    }
    return *links_;
  }

  Artifacts artifacts() {
    const auto& corpus_ref = corpus();
    const auto& t = triples();
    const auto& l = links();
    return make_artifacts(corpus_ref, t, l, vectors(), doc_embeddings(), c_.retrieval_cap);
  }

  FoldPlan fold_plan() {
    if (auto p = find(c_.paths.fold_plan, "fold.json")) {
      std::ifstream in(*p);
      std::stringstream ss;
      ss << in.rdbuf();
      try {
        return fold_from_json(json::parse(ss.str()));
      } catch (const json::exception& e) {
        throw FormatError("corrupt fold plan " + p->string() + ": " + e.what());
      }
    }
    return folds().at(static_cast<std::size_t>(c_.fold));
  }

  std::vector<FoldPlan> folds() {
    return make_folds(corpus(), c_.n_folds, c_.seed, c_.stratified);
  }

 private:
  fs::path read(const fs::path& p) {
    if (!fs::exists(p)) throw IoError("input file " + p.string() + " does not exist");
    inputs_.push_back(p);
    return p;
  }

  RunConfig c_;
  fs::path out_;
  std::vector<fs::path> inputs_;
  std::vector<std::string> outputs_;
  std::optional<Corpus> corpus_;
  std::optional<TriplesByDoc> triples_;
  std::optional<LinksByDoc> links_;
};

std::vector<std::string> validate_for(const std::string& command, const RunConfig& c,
                                      const fs::path& out) {
  std::vector<std::string> errors;
  auto exists_or = [&](const std::optional<fs::path>& p, const char* stage_file) {
    return p.has_value() || fs::exists(out / stage_file);
  };
  if (command == "synth") {
    if (!c.synth) errors.push_back("synth: section is required");
    return errors;
  }
  if (!c.paths.corpus && !c.synth) errors.push_back("paths.corpus: required");
  const bool trains = command == "train" || command == "experiment" || command == "ablate";
  if (trains && !c.paths.vectors && !c.synth) errors.push_back("paths.vectors: required");
  if (c.extraction != "builtin" && c.extraction != "import") {
    errors.push_back("extraction: must be builtin or import");
  }
  if (c.extraction == "import" && !c.paths.triples) {
    errors.push_back("paths.triples: required when extraction is import");
  }
  if (c.linker.kind == "gazetteer" && !c.paths.gazetteer && !c.synth) {
    errors.push_back("paths.gazetteer: required by the gazetteer linker");
  } else if (c.linker.kind == "remote" && c.linker.endpoint.empty()) {
    errors.push_back("linker.endpoint: required by the remote linker");
  } else if (c.linker.kind != "none" && c.linker.kind != "gazetteer" && c.linker.kind != "remote") {
    errors.push_back("linker.kind: must be none, gazetteer or remote");
  }
  if (c.n_folds < 1) errors.push_back("folds.count: must be >= 1");
  if (c.fold < 0 || c.fold >= c.n_folds) errors.push_back("folds.fold: must be in [0, folds.count)");
  if (c.retrieval_cap < 1) errors.push_back("retrieval_cap: must be >= 1");
  if (c.jobs < 1) errors.push_back("jobs: must be >= 1");
  if (trains) {
    try {
      c.train.validate();
    } catch (const ConfigError& e) {
      errors.push_back(e.what());
    }
  }
  const bool needs_kg = command == "enrich" || (command == "train" && c.model.mode == Mode::kTegra);
  if (needs_kg) {
    if (!exists_or(c.paths.kg_true, "kg_true.json")) errors.push_back("paths.kg_true: required");
    if (!exists_or(c.paths.kg_misinfo, "kg_misinfo.json")) errors.push_back("paths.kg_misinfo: required");
  }
  if (command == "experiment") {
    for (const auto& name : c.configs) {
      try {
        named_config(name, c.model);
      } catch (const ConfigError& e) {
        errors.push_back(std::string("configs: ") + e.what());
      }
    }
  }
  return errors;
}

// ---------------------------------------------------------------------------
// Commands

void cmd_synth(Session& s, std::ostream& out) {
  const auto& c = s.config();
  const Corpus& corpus = s.corpus();
  save_corpus(corpus, s.output("corpus.jsonl"));
  save_vectors(synthetic_vectors(corpus, c.synth->vector_dim, c.synth->spec.seed),
               s.output("vectors.txt"));
  save_gazetteer(synthetic_gazetteer(c.synth->spec), s.output("gazetteer.tsv"));
  out << "synth: " << corpus.size() << " documents\n";
}

void cmd_extract(Session& s, std::ostream& out) {
  const auto triples = s.extract();
  export_triples(triples, s.output("triples.jsonl"));
  std::size_t n = 0;
  for (const auto& [_, list] : triples) n += list.size();
  out << "extract: " << n << " triples from " << triples.size() << " documents\n";
}

void cmd_link(Session& s, std::ostream& out) {
  s.triples();
  const auto links = s.link();
  save_links(links, s.output("links.jsonl"));
  std::size_t n = 0;
  for (const auto& [_, list] : links) n += list.size();
  out << "link: " << n << " links\n";
}

void cmd_build_kg(Session& s, std::ostream& out) {
  const auto& c = s.config();
  const FoldPlan plan = s.folds().at(static_cast<std::size_t>(c.fold));
  const auto kg_true = build_class_kg(plan, s.corpus(), s.triples(), s.links(), Label::kLegit);
  const auto kg_misinfo = build_class_kg(plan, s.corpus(), s.triples(), s.links(), Label::kMisinfo);
  check_provenance(kg_true, plan);
  check_provenance(kg_misinfo, plan);
  save_kg(kg_true, s.output("kg_true.json"));
  save_kg(kg_misinfo, s.output("kg_misinfo.json"));
  std::ofstream(s.output("fold.json")) << fold_to_json(plan).dump() << '\n';
  out << "build-kg: fold " << c.fold << ": " << kg_true.triples.size() << " legit triples, "
      << kg_misinfo.triples.size() << " misinfo triples\n";
}

std::pair<ClassKG, ClassKG> load_kgs(Session& s) {
  const auto& c = s.config();
  const auto t = s.find(c.paths.kg_true, "kg_true.json");
  const auto m = s.find(c.paths.kg_misinfo, "kg_misinfo.json");
  if (!t || !m) throw ConfigError("paths.kg_true and paths.kg_misinfo are required");
  return {load_kg(*t), load_kg(*m)};
}

std::map<std::string, EnrichedGraphPair> enrich_all(Session& s, const ClassKG& kg_true,
                                                     const ClassKG& kg_misinfo) {
  static const std::vector<EntityLink> kNoLinks;
  std::map<std::string, EnrichedGraphPair> out;
  for (const auto& doc : s.corpus()) {
    auto lit = s.links().find(doc.id);
    const auto& links = lit == s.links().end() ? kNoLinks : lit->second;
    const auto g = attach_links(build_graph(doc.id, s.triples().at(doc.id)), links);
    out.emplace(doc.id, enrich(g, links, kg_true, kg_misinfo, s.config().retrieval_cap));
  }
  return out;
}

void cmd_enrich(Session& s, std::ostream& out) {
  const auto [kg_true, kg_misinfo] = load_kgs(s);
  const auto pairs = enrich_all(s, kg_true, kg_misinfo);
  save_enriched(pairs, s.output("enriched.jsonl"));
  out << "enrich: " << pairs.size() << " documents\n";
}

void cmd_stats(Session& s, std::ostream& out) {
  const auto& corpus = s.corpus();
  const auto chars = corpus_char_lengths(corpus);
  std::ofstream csv(s.output("graph_stats.csv"));
  csv << "doc,label,chars,words,triples,nodes,components,max_degree,mean_degree,linked_entities\n";
  static const std::vector<EntityLink> kNoLinks;
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    const auto& doc = corpus[i];
    auto lit = s.links().find(doc.id);
    const auto g = build_graph(doc.id, s.triples().at(doc.id));
    const auto st = graph_stats(g, lit == s.links().end() ? kNoLinks : lit->second);
    int max_degree = 0;
    double sum = 0.0;
    for (int d : st.degrees) {
      max_degree = std::max(max_degree, d);
      sum += d;
    }
    csv << doc.id << ',' << to_string(doc.label) << ',' << chars[i] << ',' << word_count(doc.text)
        << ',' << st.n_triples << ',' << st.n_nodes << ',' << st.n_components << ',' << max_degree
        << ',' << (st.degrees.empty() ? 0.0 : sum / static_cast<double>(st.degrees.size())) << ','
        << st.n_linked_entities << '\n';
  }
  out << "stats: " << corpus.size() << " documents\n";
}

void cmd_train(Session& s, std::ostream& out) {
  const auto& c = s.config();
  Artifacts a = s.artifacts();
  FoldArtifacts fold;
  fold.plan = s.fold_plan();
  ModelConfig model = resolve_widths(c.model, a);
  model.seed = fold.plan.seed;
  if (model.mode == Mode::kTegra) {
    auto [kg_true, kg_misinfo] = load_kgs(s);
    check_provenance(kg_true, fold.plan);
    check_provenance(kg_misinfo, fold.plan);
    if (auto p = s.find(c.paths.enriched, "enriched.jsonl")) {
      fold.enriched = load_enriched(*p);
    } else {
      fold.enriched = enrich_all(s, kg_true, kg_misinfo);
    }
    fold.kg_true = std::move(kg_true);
    fold.kg_misinfo = std::move(kg_misinfo);
  }
  TrainConfig tc = c.train;
  tc.seed = fold.plan.seed;
  ModelParams<double> best;
  FoldResult r = train_fold(make_fold_data(a, fold, model), tc, model, &best);
  r.config = std::string(to_string(model.mode)) + (model.has_ts() ? "" : model.mode == Mode::kTegra ? "-no-ts" : "");
  r.fold = c.fold;
  r.seed = fold.plan.seed;
  ExperimentResult er{r.config, model, {r}};
  er.aggregate();
  write_results_csv({er}, s.output("train_results.csv"));
  write_predictions_csv({er}, s.output("train_predictions.csv"));
  save_checkpoint(best, model, s.output("checkpoint.json"));
  out << "train: " << r.config << " fold " << r.fold << " accuracy=" << r.test_accuracy
      << " macro_f1=" << r.test_macro_f1 << " best_epoch=" << r.best_epoch << '\n';
}

void write_records(Session& s, const Artifacts& a, const std::vector<FoldPlan>& folds) {
  std::ofstream csv(s.output("enrichment_records.csv"));
  csv << "fold,doc,words,base_triples,added_true,added_misinfo\n";
  for (std::size_t f = 0; f < folds.size(); ++f) {
    for (const auto& r : enrichment_records(a, prepare_fold(a, folds[f]))) {
      csv << f << ',' << r.doc_id << ',' << r.words << ',' << r.base_triples << ','
          << r.added_true << ',' << r.added_misinfo << '\n';
    }
  }
}

void cmd_experiment(Session& s, std::ostream& out) {
  const auto& c = s.config();
  const Artifacts a = s.artifacts();
  const auto folds = s.folds();
  std::vector<NamedConfig> configs;
  for (const auto& name : c.configs) configs.push_back(named_config(name, c.model));
  const auto results = run_experiment(a, folds, configs, c.train, c.jobs);
  write_results_csv(results, s.output("results.csv"));
  write_summary_csv(results, s.output("summary.csv"));
  write_predictions_csv(results, s.output("predictions.csv"));
  write_records(s, a, folds);
  out << summary_table(results);
}

void cmd_ablate(Session& s, std::ostream& out, const std::string& drop) {
  const auto& c = s.config();
  if (c.model.mode != Mode::kTegra) throw ConfigError("ablate needs mode tegra");
  const Channel channel = parse_drop(drop);
  const Artifacts a = s.artifacts();
  const auto folds = s.folds();
  const NamedConfig full = named_config(c.model.ts_enabled ? "tegra" : "tegra-no-ts", c.model);
  const auto results =
      run_experiment(a, folds, {full, ablation_config(full, channel)}, c.train, c.jobs);
  write_results_csv(results, s.output("ablation_results.csv"));
  write_summary_csv(results, s.output("ablation_summary.csv"));
  out << summary_table(results);
  out << "delta accuracy: " << results[1].mean_accuracy - results[0].mean_accuracy << '\n';
}

std::vector<std::vector<std::string>> read_csv(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  std::vector<std::vector<std::string>> rows;
  std::string line;
  std::getline(in, line);
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    rows.push_back(std::move(cells));
  }
  return rows;
}

void cmd_error_report(Session& s, std::ostream& out, const std::string& a_name,
                      const std::string& b_name) {
  if (a_name.empty() || b_name.empty()) throw UsageError("error-report needs --a and --b");
  const auto pred_path = s.find(std::nullopt, "predictions.csv");
  const auto rec_path = s.find(std::nullopt, "enrichment_records.csv");
  if (!pred_path || !rec_path) {
    throw ConfigError("error-report needs predictions.csv and enrichment_records.csv in " +
                      s.out().string() + " (run experiment first)");
  }
  std::vector<Prediction> pa, pb;
  for (const auto& row : read_csv(*pred_path)) {
    if (row.size() != 7) throw FormatError("bad row in " + pred_path->string());
    Prediction p{row[1] + "/" + row[2], std::stoi(row[3]), std::stoi(row[4]),
                 {std::stod(row[5]), std::stod(row[6])}};
    if (row[0] == a_name) pa.push_back(p);
    if (row[0] == b_name) pb.push_back(p);
  }
  if (pa.empty()) throw ValidationError("no predictions for configuration '" + a_name + "'");
  if (pb.empty()) throw ValidationError("no predictions for configuration '" + b_name + "'");
  std::vector<EnrichmentRecord> records;
  for (const auto& row : read_csv(*rec_path)) {
    if (row.size() != 6) throw FormatError("bad row in " + rec_path->string());
    records.push_back({row[0] + "/" + row[1], std::stoi(row[2]), std::stoi(row[3]),
                       std::stoi(row[4]), std::stoi(row[5])});
  }
  const ErrorReport report = error_report(pa, pb, records);
  json j = error_report_to_json(report);
  j["a"] = a_name;
  j["b"] = b_name;
  std::ofstream(s.output("error_report.json")) << j.dump(2) << '\n';
  out << std::fixed << std::setprecision(2);
  out << "bucket         n    words          base           consistency    contradiction\n";
  for (const auto& b : report.buckets) {
    auto ms = [](const MeanStd& m) {
      std::ostringstream o;
      o << std::fixed << std::setprecision(2) << m.mean << "+-" << m.std;
      return o.str();
    };
    out << std::left << std::setw(15) << b.name << std::setw(5) << b.n << std::setw(15)
        << ms(b.words) << std::setw(15) << ms(b.base_triples) << std::setw(15)
        << ms(b.added_true) << ms(b.added_misinfo) << '\n';
  }
  out << "flips: " << report.flips.size() << '\n';
}

// ---------------------------------------------------------------------------
// Manifest

json input_checksums(const std::vector<fs::path>& inputs) {
  json j = json::object();
  for (const auto& p : inputs) j[fs::absolute(p).string()] = sha256_file(p);
  return j;
}

void append_manifest(const fs::path& out, const std::string& command, const RunConfig& c,
                     const std::vector<fs::path>& inputs, const std::vector<std::string>& outputs,
                     const std::vector<FoldPlan>& folds) {
  fs::create_directories(out);
  const fs::path path = out / "run_manifest.json";
  json manifest{{"version", 1}, {"runs", json::array()}};
  if (fs::exists(path)) {
    std::ifstream in(path);
    std::stringstream ss;
    ss << in.rdbuf();
    try {
      manifest = json::parse(ss.str());
    } catch (const json::exception& e) {
      throw FormatError("corrupt run manifest " + path.string() + ": " + e.what());
    }
  }
  const json config = run_config_to_json(c);
  json fold_seeds = json::array();
  for (const auto& f : folds) fold_seeds.push_back(f.seed);
  manifest["runs"].push_back({{"command", command},
                              {"config", config},
                              {"config_hash", sha256_hex(config.dump())},
                              {"seeds", {{"base", c.seed}, {"folds", fold_seeds}}},
                              {"inputs", input_checksums(inputs)},
                              {"outputs", outputs}});
  std::ofstream(path) << manifest.dump(2) << '\n';
}

RunConfig config_from_manifest(const fs::path& path, const std::string& command) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open manifest " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  json manifest;
  try {
    manifest = json::parse(ss.str());
  } catch (const json::exception& e) {
    throw FormatError("corrupt run manifest " + path.string() + ": " + e.what());
  }
  const auto& runs = manifest.at("runs");
  for (auto it = runs.rbegin(); it != runs.rend(); ++it) {
    if (it->at("command") != command) continue;
    const json& config = it->at("config");
    if (sha256_hex(config.dump()) != it->at("config_hash").get<std::string>()) {
      throw ConsistencyError("manifest config does not match its hash");
    }
    for (const auto& [file, digest] : it->at("inputs").items()) {
      if (!fs::exists(file) || sha256_file(file) != digest.get<std::string>()) {
        throw ConsistencyError("input " + file + " changed since the manifest was written");
      }
    }
    return run_config_from_json(config);
  }
  throw ConfigError("manifest " + path.string() + " has no '" + command + "' run");
}

void setup_logging() {
  static std::once_flag once;
  std::call_once(once, [] {
    auto logger = spdlog::stderr_logger_mt("tegra");
    spdlog::set_default_logger(logger);
  });
  const char* env = std::getenv("TEGRA_LOG");
  spdlog::set_level(env ? spdlog::level::from_str(env) : spdlog::level::warn);
}

std::string one_line(std::string s) {
  for (char& ch : s) {
    if (ch == '\n' || ch == '\r') ch = ' ';
  }
  return s;
}

}  // namespace

Artifacts load_artifacts(const RunConfig& c) {
  Session s(c, c.paths.output_dir);
  return s.artifacts();
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  setup_logging();
  CLI::App app{"tegra: knowledge-augmented misinformation classifier"};
  app.require_subcommand(1);

  std::string config_path, out_dir, mode, ts, drop, a_name, b_name, manifest_path;
  std::uint64_t seed = 0;
  int jobs = 1, fold = 0;
  struct Opts {
    CLI::Option *config, *out, *seed, *jobs, *mode, *ts, *fold, *manifest;
  };
  std::map<CLI::App*, Opts> opts;
  const std::vector<std::pair<std::string, std::string>> commands = {
      {"extract", "extract triples from the corpus"},
      {"link", "link graph nodes to entity URIs"},
      {"build-kg", "build the class knowledge graphs of one fold"},
      {"enrich", "enrich document graphs from the class knowledge graphs"},
      {"stats", "per-document graph statistics"},
      {"train", "train and evaluate one fold"},
      {"experiment", "train every configuration on every fold"},
      {"ablate", "tegra with one graph channel removed"},
      {"error-report", "compare two configurations' test predictions"},
      {"synth", "write the synthetic corpus, vectors and gazetteer"}};
  for (const auto& [name, help] : commands) {
    CLI::App* sub = app.add_subcommand(name, help);
    Opts o;
    o.config = sub->add_option("--config", config_path, "run config (JSON)");
    o.out = sub->add_option("--out", out_dir, "output directory");
    o.seed = sub->add_option("--seed", seed, "base seed for fold plans");
    o.jobs = sub->add_option("--jobs", jobs, "parallel training jobs");
    o.mode = sub->add_option("--mode", mode, "text_only|teg|tegra");
    o.ts = sub->add_option("--ts", ts, "on|off");
    o.fold = sub->add_option("--fold", fold, "fold index");
    o.manifest = sub->add_option("--from-manifest", manifest_path, "replay a recorded run");
    if (name == "ablate") sub->add_option("--drop", drop, "g_true or g_misinfo")->required();
    if (name == "error-report") {
      sub->add_option("--a", a_name, "first configuration")->required();
      sub->add_option("--b", b_name, "second configuration")->required();
    }
    opts[sub] = o;
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error kind=usage msg=" << one_line(e.what()) << '\n';
    return 2;
  }

  CLI::App* sub = app.get_subcommands().front();
  const std::string command = sub->get_name();
  const Opts& o = opts[sub];
  try {
    RunConfig c;
    c.train.lr = 1e-3;
    if (o.manifest->count()) {
      c = config_from_manifest(manifest_path, command);
    } else if (o.config->count()) {
      c = load_run_config(config_path);
    } else {
      throw UsageError("--config or --from-manifest is required");
    }
    if (o.seed->count()) c.seed = seed;
    if (o.jobs->count()) c.jobs = jobs;
    if (o.fold->count()) c.fold = fold;
    if (o.mode->count()) c.model.mode = parse_mode(mode);
    if (o.ts->count()) {
      if (ts != "on" && ts != "off") throw UsageError("--ts must be on or off");
      c.model.ts_enabled = ts == "on";
    }
    if (o.out->count()) c.paths.output_dir = out_dir;
    const fs::path out_path = c.paths.output_dir;

    const auto errors = validate_for(command, c, out_path);
    if (!errors.empty()) throw ConfigError("invalid config: " + join(errors, "; "));

    Session s(c, out_path);
    if (command == "synth") cmd_synth(s, out);
    else if (command == "extract") cmd_extract(s, out);
    else if (command == "link") cmd_link(s, out);
    else if (command == "build-kg") cmd_build_kg(s, out);
    else if (command == "enrich") cmd_enrich(s, out);
    else if (command == "stats") cmd_stats(s, out);
    else if (command == "train") cmd_train(s, out);
    else if (command == "experiment") cmd_experiment(s, out);
    else if (command == "ablate") cmd_ablate(s, out, drop);
    else if (command == "error-report") cmd_error_report(s, out, a_name, b_name);

    std::vector<FoldPlan> folds;
    if (command == "experiment" || command == "ablate") folds = s.folds();
    append_manifest(out_path, command, c, s.inputs(), s.outputs(), folds);
    return 0;
  } catch (const Error& e) {
    err << "error kind=" << e.kind() << " msg=" << one_line(e.what()) << '\n';
    return 1;
  } catch (const std::exception& e) {
    err << "error kind=internal msg=" << one_line(e.what()) << '\n';
    return 1;
  }
}

}  // namespace tegra
