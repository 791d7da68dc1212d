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

#include "tegra/training.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <fstream>
#include <iomanip>
#include <limits>
#include <numeric>
#include <set>
#include <sstream>
#include <thread>

#include <spdlog/spdlog.h>

#include "tegra/error.hpp"
#include "tegra/features.hpp"
#include "tegra/random.hpp"
#include "tegra/text.hpp"

namespace tegra {

using nlohmann::json;

void TrainConfig::validate() const {
  if (!(lr > 0.0)) throw ConfigError("train.lr must be > 0");
  if (max_epochs < 1) throw ConfigError("train.max_epochs must be >= 1");
  if (patience < 1 || patience >= max_epochs) {
    throw ConfigError("train.patience must be in [1, max_epochs)");
  }
  if (batch_size < 1) throw ConfigError("train.batch_size must be >= 1");
  if (!(beta1 >= 0.0 && beta1 < 1.0 && beta2 >= 0.0 && beta2 < 1.0 && eps > 0.0)) {
    throw ConfigError("train adam settings out of range");
  }
}

json train_config_to_json(const TrainConfig& c) {
  return json{{"lr", c.lr},       {"max_epochs", c.max_epochs}, {"patience", c.patience},
              {"batch_size", c.batch_size}, {"beta1", c.beta1}, {"beta2", c.beta2},
              {"eps", c.eps},     {"seed", c.seed}};
}

TrainConfig train_config_from_json(const json& j) {
  TrainConfig c;
  c.lr = j.value("lr", c.lr);
  c.max_epochs = j.value("max_epochs", c.max_epochs);
  c.patience = j.value("patience", c.patience);
  c.batch_size = j.value("batch_size", c.batch_size);
  c.beta1 = j.value("beta1", c.beta1);
  c.beta2 = j.value("beta2", c.beta2);
  c.eps = j.value("eps", c.eps);
  c.seed = j.value("seed", c.seed);
  return c;
}

Metrics metrics(std::span<const int> golds, std::span<const int> preds) {
  if (golds.size() != preds.size()) {
    throw ValidationError("metrics: " + std::to_string(golds.size()) + " golds but " +
                          std::to_string(preds.size()) + " predictions");
  }
  if (golds.empty()) throw ValidationError("metrics: no predictions");
  // confusion[gold][pred]
  long confusion[2][2] = {{0, 0}, {0, 0}};
  for (std::size_t i = 0; i < golds.size(); ++i) {
    if ((golds[i] != 0 && golds[i] != 1) || (preds[i] != 0 && preds[i] != 1)) {
      throw ValidationError("metrics: labels must be 0 or 1");
    }
    ++confusion[golds[i]][preds[i]];
  }
  Metrics m;
  m.accuracy = static_cast<double>(confusion[0][0] + confusion[1][1]) /
               static_cast<double>(golds.size());
  double f1_sum = 0.0;
  for (int k = 0; k < 2; ++k) {
    const long tp = confusion[k][k];
    const long predicted = confusion[0][k] + confusion[1][k];
    const long actual = confusion[k][0] + confusion[k][1];
    const double precision = predicted ? static_cast<double>(tp) / static_cast<double>(predicted) : 0.0;
    const double recall = actual ? static_cast<double>(tp) / static_cast<double>(actual) : 0.0;
    f1_sum += precision + recall > 0.0 ? 2.0 * precision * recall / (precision + recall) : 0.0;
  }
  m.macro_f1 = f1_sum / 2.0;
  return m;
}

Metrics metrics(std::span<const Prediction> predictions) {
  std::vector<int> golds, preds;
  for (const auto& p : predictions) {
    golds.push_back(p.gold);
    preds.push_back(p.predicted);
  }
  return metrics(golds, preds);
}

EarlyStopping::EarlyStopping(int patience)
    : patience_(patience), best_score_(-std::numeric_limits<double>::infinity()) {
  if (patience < 1) throw ConfigError("patience must be >= 1");
}

bool EarlyStopping::observe(int epoch, double score) {
  if (score > best_score_) {
    best_score_ = score;
    best_epoch_ = epoch;
    since_best_ = 0;
    return true;
  }
  ++since_best_;
  return false;
}

Adam::Adam(const ModelParams<double>& shape, const TrainConfig& c)
    : c_(c), m_(zeros_like(shape)), v_(zeros_like(shape)) {}

void Adam::step(ModelParams<double>& params, ModelParams<double>& grads) {
  ++t_;
  const double correct1 = 1.0 - std::pow(c_.beta1, t_);
  const double correct2 = 1.0 - std::pow(c_.beta2, t_);
  auto p = flat_views(params);
  auto g = flat_views(grads);
  auto m = flat_views(m_);
  auto v = flat_views(v_);
  for (std::size_t k = 0; k < p.size(); ++k) {
    for (std::size_t i = 0; i < p[k].size(); ++i) {
      const double gi = g[k][i];
      m[k][i] = c_.beta1 * m[k][i] + (1.0 - c_.beta1) * gi;
      v[k][i] = c_.beta2 * v[k][i] + (1.0 - c_.beta2) * gi * gi;
      const double m_hat = m[k][i] / correct1;
      const double v_hat = v[k][i] / correct2;
      p[k][i] -= c_.lr * m_hat / (std::sqrt(v_hat) + c_.eps);
    }
  }
}

std::vector<Prediction> predict(std::span<const Example<double>> examples,
                                const ModelParams<double>& p, const ModelConfig& c) {
  std::vector<Prediction> out;
  out.reserve(examples.size());
  for (const auto& ex : examples) {
    const Vec<double> probs = forward(ex, p, c);
    out.push_back({ex.doc_id, ex.label, probs[1] > probs[0] ? 1 : 0, {probs[0], probs[1]}});
  }
  return out;
}

FoldResult train_fold(const FoldData& data, const TrainConfig& train, const ModelConfig& model,
                      ModelParams<double>* best) {
  train.validate();
  if (data.train.empty() || data.validation.empty() || data.test.empty()) {
    throw ValidationError("every split of a fold needs at least one document");
  }
  auto params = init_params<double>(model);
  auto best_params = params;
  Adam adam(params, train);
  EarlyStopping stopper(train.patience);
  Rng rng(train.seed ^ 0x7a11ed5eedULL);
  std::vector<std::size_t> order(data.train.size());
  std::iota(order.begin(), order.end(), 0);

  FoldResult result;
  for (int epoch = 1; epoch <= train.max_epochs; ++epoch) {
    shuffle(order, rng);
    for (std::size_t b = 0; b < order.size(); b += static_cast<std::size_t>(train.batch_size)) {
      std::vector<const Example<double>*> batch;
      for (std::size_t i = b; i < std::min(order.size(), b + train.batch_size); ++i) {
        batch.push_back(&data.train[order[i]]);
      }
      auto lg = loss_and_grads<double>(batch, params, model);
      if (!std::isfinite(lg.loss)) {
        throw NumericError("non-finite loss at epoch " + std::to_string(epoch));
      }
      adam.step(params, lg.grads);
    }
    const double val_f1 = metrics(predict(data.validation, params, model)).macro_f1;
    if (stopper.observe(epoch, val_f1)) best_params = params;
    result.epochs_run = epoch;
    if (stopper.should_stop()) break;
  }
  result.best_epoch = stopper.best_epoch();
  result.best_val_f1 = stopper.best_score();
  result.predictions = predict(data.test, best_params, model);
  const Metrics m = metrics(result.predictions);
  result.test_accuracy = m.accuracy;
  result.test_macro_f1 = m.macro_f1;
  if (best) *best = std::move(best_params);
  return result;
}

MeanStd mean_std(std::span<const double> xs) {
  MeanStd out;
  if (xs.empty()) return out;
  const double n = static_cast<double>(xs.size());
  out.mean = std::accumulate(xs.begin(), xs.end(), 0.0) / n;
  double ss = 0.0;
  for (double x : xs) ss += (x - out.mean) * (x - out.mean);
  out.std = std::sqrt(ss / n);
  return out;
}

void ExperimentResult::aggregate() {
  std::vector<double> acc, f1;
  for (const auto& f : folds) {
    acc.push_back(f.test_accuracy);
    f1.push_back(f.test_macro_f1);
  }
  const auto a = mean_std(acc);
  const auto m = mean_std(f1);
  mean_accuracy = a.mean;
  std_accuracy = a.std;
  mean_macro_f1 = m.mean;
  std_macro_f1 = m.std;
}

Artifacts make_artifacts(Corpus corpus, TriplesByDoc triples, LinksByDoc links,
                         WordVectorTable table, std::optional<DocEmbeddingStore> doc_embeddings,
                         int retrieval_cap) {
  if (retrieval_cap < 1) throw ConfigError("retrieval_cap must be >= 1");
  Artifacts a;
  a.corpus = std::move(corpus);
  a.triples = std::move(triples);
  a.links = std::move(links);
  a.table = std::move(table);
  a.doc_embeddings = std::move(doc_embeddings);
  a.retrieval_cap = retrieval_cap;
  for (const auto& doc : a.corpus) {
    auto it = a.triples.find(doc.id);
    if (it == a.triples.end()) {
      throw ValidationError("document '" + doc.id + "' has no triple entry");
    }
    auto g = build_graph(doc.id, it->second);
    auto lit = a.links.find(doc.id);
    a.graphs.push_back(lit == a.links.end() ? std::move(g) : attach_links(g, lit->second));
  }
  if (a.doc_embeddings) {
    for (const auto& doc : a.corpus) a.doc_embeddings->at(doc.id);
  }
  return a;
}

FoldArtifacts prepare_fold(const Artifacts& a, const FoldPlan& plan) {
  FoldArtifacts f;
  f.plan = plan;
  f.kg_true = build_class_kg(plan, a.corpus, a.triples, a.links, Label::kLegit);
  f.kg_misinfo = build_class_kg(plan, a.corpus, a.triples, a.links, Label::kMisinfo);
  check_provenance(f.kg_true, plan);
  check_provenance(f.kg_misinfo, plan);
  static const std::vector<EntityLink> kNoLinks;
  for (std::size_t i = 0; i < a.corpus.size(); ++i) {
    const auto& id = a.corpus[i].id;
    auto lit = a.links.find(id);
    f.enriched.emplace(id, enrich(a.graphs[i], lit == a.links.end() ? kNoLinks : lit->second,
                                  f.kg_true, f.kg_misinfo, a.retrieval_cap));
  }
  return f;
}

ModelConfig resolve_widths(ModelConfig c, const Artifacts& a) {
  c.d_text = a.encoder().dim();
  c.d_feat = a.table.dim();
  return c;
}

FoldData make_fold_data(const Artifacts& a, const FoldArtifacts& fold, const ModelConfig& c) {
  const TextEncoder encoder = a.encoder();
  FoldData data;
  for (std::size_t i = 0; i < a.corpus.size(); ++i) {
    const auto& doc = a.corpus[i];
    const EnrichedGraphPair* pair = nullptr;
    if (c.mode == Mode::kTegra) {
      auto it = fold.enriched.find(doc.id);
      if (it == fold.enriched.end()) {
        throw ValidationError("document '" + doc.id + "' has no enriched graphs");
      }
      pair = &it->second;
    }
    auto ex = make_example(doc, encoder.encode(doc), a.graphs[i], pair, c, a.table);
    switch (fold.plan.split_of(doc.id)) {
      case Split::kTrain: data.train.push_back(std::move(ex)); break;
      case Split::kValidation: data.validation.push_back(std::move(ex)); break;
      case Split::kTest: data.test.push_back(std::move(ex)); break;
    }
  }
  return data;
}

namespace {

// Runs task(i) for i in [0, n) on up to `jobs` threads; rethrows the failure
// of the lowest index.
template <typename F>
void parallel_for(std::size_t n, int jobs, F&& task) {
  std::vector<std::exception_ptr> errors(n);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        task(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const std::size_t n_threads = std::min<std::size_t>(n, static_cast<std::size_t>(std::max(1, jobs)));
  if (n_threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> threads;
    for (std::size_t t = 0; t < n_threads; ++t) threads.emplace_back(worker);
    for (auto& t : threads) t.join();
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

}  // namespace

std::vector<ExperimentResult> run_experiment(const Artifacts& a, const std::vector<FoldPlan>& folds,
                                             const std::vector<NamedConfig>& configs,
                                             const TrainConfig& train, int jobs) {
  if (folds.empty()) throw ConfigError("experiment needs at least one fold");
  if (configs.empty()) throw ConfigError("experiment needs at least one configuration");
  train.validate();
  std::set<std::string> names;
  for (const auto& nc : configs) {
    if (!names.insert(nc.name).second) throw ConfigError("duplicate configuration '" + nc.name + "'");
    resolve_widths(nc.model, a).validate();
  }

  std::vector<FoldArtifacts> prepared(folds.size());
  parallel_for(folds.size(), jobs, [&](std::size_t f) { prepared[f] = prepare_fold(a, folds[f]); });

  std::vector<ExperimentResult> results(configs.size());
  for (std::size_t c = 0; c < configs.size(); ++c) {
    results[c].config = configs[c].name;
    results[c].model = resolve_widths(configs[c].model, a);
    results[c].folds.resize(folds.size());
  }
  parallel_for(configs.size() * folds.size(), jobs, [&](std::size_t job) {
    const std::size_t c = job / folds.size();
    const std::size_t f = job % folds.size();
    ModelConfig model = results[c].model;
    model.seed = folds[f].seed;
    TrainConfig tc = train;
    tc.seed = folds[f].seed;
    const FoldData data = make_fold_data(a, prepared[f], model);
    FoldResult r = train_fold(data, tc, model);
    r.config = configs[c].name;
    r.fold = static_cast<int>(f);
    r.seed = folds[f].seed;
    spdlog::info("{} fold {}: acc={:.4f} f1={:.4f} best_epoch={} epochs={}", r.config, f,
                 r.test_accuracy, r.test_macro_f1, r.best_epoch, r.epochs_run);
    results[c].folds[f] = std::move(r);
  });
  for (auto& r : results) r.aggregate();
  return results;
}

NamedConfig ablation_config(const NamedConfig& tegra, Channel drop) {
  if (tegra.model.mode != Mode::kTegra) throw ConfigError("ablation needs a tegra configuration");
  if (drop == Channel::kBase) throw ConfigError("only g_true or g_misinfo can be dropped");
  NamedConfig out = tegra;
  out.model.dropped = drop;
  out.name = tegra.name + "-no-" + std::string(to_string(drop));
  return out;
}

Channel parse_drop(std::string_view s) {
  std::vector<Channel> drops;
  std::string item;
  for (char ch : std::string(s) + ",") {
    if (ch != ',') {
      item += ch;
      continue;
    }
    const auto t = trim(item);
    if (!t.empty()) drops.push_back(parse_channel(t));
    item.clear();
  }
  std::sort(drops.begin(), drops.end());
  drops.erase(std::unique(drops.begin(), drops.end()), drops.end());
  if (drops.size() > 1) {
    throw ConfigError("dropping both g_true and g_misinfo leaves no graph; run mode text_only instead");
  }
  if (drops.empty()) throw ConfigError("--drop needs g_true or g_misinfo");
  if (drops[0] == Channel::kBase) throw ConfigError("only g_true or g_misinfo can be dropped");
  return drops[0];
}

ExperimentResult ablate(const Artifacts& a, const std::vector<FoldPlan>& folds,
                        const NamedConfig& tegra, Channel drop, const TrainConfig& train, int jobs) {
  return run_experiment(a, folds, {ablation_config(tegra, drop)}, train, jobs).front();
}

std::vector<EnrichmentRecord> enrichment_records(const Artifacts& a, const FoldArtifacts& fold,
                                                 Split split) {
  std::vector<EnrichmentRecord> out;
  for (std::size_t i : split_indices(a.corpus, fold.plan, split)) {
    const auto& doc = a.corpus[i];
    EnrichmentRecord r;
    r.doc_id = doc.id;
    r.words = static_cast<int>(word_count(doc.text));
    r.base_triples = static_cast<int>(a.triples.at(doc.id).size());
    const auto& pair = fold.enriched.at(doc.id);
    r.added_true = static_cast<int>(pair.added_true.size());
    r.added_misinfo = static_cast<int>(pair.added_misinfo.size());
    out.push_back(std::move(r));
  }
  return out;
}

ErrorReport error_report(std::span<const Prediction> a, std::span<const Prediction> b,
                         const std::vector<EnrichmentRecord>& records) {
  std::map<std::string, const Prediction*> by_a, by_b;
  for (const auto& p : a) by_a[p.doc_id] = &p;
  for (const auto& p : b) by_b[p.doc_id] = &p;
  if (by_a.size() != a.size() || by_b.size() != b.size()) {
    throw ValidationError("error report: duplicate document in predictions");
  }
  std::set<std::string> ids_a, ids_b;
  for (const auto& [id, _] : by_a) ids_a.insert(id);
  for (const auto& [id, _] : by_b) ids_b.insert(id);
  if (ids_a != ids_b) throw ValidationError("error report: the two results cover different test splits");
  std::map<std::string, const EnrichmentRecord*> rec;
  for (const auto& r : records) rec[r.doc_id] = &r;

  struct Acc {
    std::vector<double> words, base, added_true, added_misinfo;
  };
  std::array<Acc, 4> acc;
  ErrorReport report;
  for (const auto& [id, pa] : by_a) {
    const Prediction* pb = by_b.at(id);
    auto it = rec.find(id);
    if (it == rec.end()) throw ValidationError("error report: no enrichment record for '" + id + "'");
    const EnrichmentRecord& r = *it->second;
    for (int bucket : {pa->predicted == pa->gold ? 0 : 1, pb->predicted == pb->gold ? 2 : 3}) {
      acc[bucket].words.push_back(r.words);
      acc[bucket].base.push_back(r.base_triples);
      acc[bucket].added_true.push_back(r.added_true);
      acc[bucket].added_misinfo.push_back(r.added_misinfo);
    }
    if (pa->predicted != pb->predicted) report.flips.push_back({id, pa->gold, pa->predicted, pb->predicted});
  }
  const char* names[] = {"A correct", "A incorrect", "B correct", "B incorrect"};
  for (int k = 0; k < 4; ++k) {
    ErrorBucket bkt;
    bkt.name = names[k];
    bkt.n = static_cast<int>(acc[k].words.size());
    bkt.words = mean_std(acc[k].words);
    bkt.base_triples = mean_std(acc[k].base);
    bkt.added_true = mean_std(acc[k].added_true);
    bkt.added_misinfo = mean_std(acc[k].added_misinfo);
    report.buckets.push_back(std::move(bkt));
  }
  return report;
}

json error_report_to_json(const ErrorReport& r) {
  auto ms = [](const MeanStd& m) { return json{{"mean", m.mean}, {"std", m.std}}; };
  json buckets = json::array();
  for (const auto& b : r.buckets) {
    buckets.push_back({{"bucket", b.name},
                       {"n", b.n},
                       {"words", ms(b.words)},
                       {"base_triples", ms(b.base_triples)},
                       {"consistency", ms(b.added_true)},
                       {"contradiction", ms(b.added_misinfo)}});
  }
  json flips = json::array();
  for (const auto& f : r.flips) {
    flips.push_back({{"doc", f.doc_id}, {"gold", f.gold}, {"pred_a", f.pred_a}, {"pred_b", f.pred_b}});
  }
  return json{{"buckets", buckets}, {"flips", flips}};
}

namespace {

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << std::setprecision(17);
  return out;
}

}  // namespace

void write_results_csv(const std::vector<ExperimentResult>& results, const std::filesystem::path& path) {
  auto out = open_out(path);
  out << "config,fold,seed,accuracy,macro_f1,best_epoch\n";
  for (const auto& r : results) {
    for (const auto& f : r.folds) {
      out << r.config << ',' << f.fold << ',' << f.seed << ',' << f.test_accuracy << ','
          << f.test_macro_f1 << ',' << f.best_epoch << '\n';
    }
  }
}

void write_summary_csv(const std::vector<ExperimentResult>& results, const std::filesystem::path& path) {
  auto out = open_out(path);
  out << "config,folds,mean_accuracy,std_accuracy,mean_macro_f1,std_macro_f1\n";
  for (const auto& r : results) {
    out << r.config << ',' << r.folds.size() << ',' << r.mean_accuracy << ',' << r.std_accuracy
        << ',' << r.mean_macro_f1 << ',' << r.std_macro_f1 << '\n';
  }
}

void write_predictions_csv(const std::vector<ExperimentResult>& results,
                           const std::filesystem::path& path) {
  auto out = open_out(path);
  out << "config,fold,doc,gold,predicted,p_legit,p_misinfo\n";
  for (const auto& r : results) {
    for (const auto& f : r.folds) {
      for (const auto& p : f.predictions) {
        out << r.config << ',' << f.fold << ',' << p.doc_id << ',' << p.gold << ',' << p.predicted
            << ',' << p.probs[0] << ',' << p.probs[1] << '\n';
      }
    }
  }
}

std::string summary_table(const std::vector<ExperimentResult>& results) {
  std::ostringstream out;
  out << std::left << std::setw(24) << "config" << std::setw(20) << "accuracy"
      << "macro_f1\n";
  out << std::fixed << std::setprecision(4);
  for (const auto& r : results) {
    std::ostringstream acc, f1;
    acc << std::fixed << std::setprecision(4) << r.mean_accuracy << " +- " << r.std_accuracy;
    f1 << std::fixed << std::setprecision(4) << r.mean_macro_f1 << " +- " << r.std_macro_f1;
    out << std::setw(24) << r.config << std::setw(20) << acc.str() << f1.str() << '\n';
  }
  return out.str();
}

}  // namespace tegra
