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

#ifndef TEGRA_TRAINING_HPP_
#define TEGRA_TRAINING_HPP_

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "tegra/corpus.hpp"
#include "tegra/embedding.hpp"
#include "tegra/extraction.hpp"
#include "tegra/graph.hpp"
#include "tegra/knowledge.hpp"
#include "tegra/linking.hpp"
#include "tegra/model.hpp"

namespace tegra {

struct TrainConfig {
  double lr = 1e-5;
  int max_epochs = 300;
  int patience = 20;
  int batch_size = 16;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  std::uint64_t seed = 0;

  void validate() const;
  bool operator==(const TrainConfig&) const = default;
};

nlohmann::json train_config_to_json(const TrainConfig& c);
TrainConfig train_config_from_json(const nlohmann::json& j);

struct Metrics {
  double accuracy = 0.0;
  double macro_f1 = 0.0;
};

/// Accuracy and the unweighted mean of the two per-class F1 scores. A class
/// that is never predicted and never present scores F1 = 0.
Metrics metrics(std::span<const int> golds, std::span<const int> preds);

/// Stops once `patience` epochs pass without a strict improvement. Ties keep
/// the earlier epoch.
class EarlyStopping {
 public:
  explicit EarlyStopping(int patience);

  /// Records the score of `epoch`; true when it is the new best.
  bool observe(int epoch, double score);
  bool should_stop() const { return since_best_ >= patience_; }
  int best_epoch() const { return best_epoch_; }
  double best_score() const { return best_score_; }

 private:
  int patience_;
  int best_epoch_ = 0;
  int since_best_ = 0;
  double best_score_;
};

class Adam {
 public:
  Adam(const ModelParams<double>& shape, const TrainConfig& c);
  void step(ModelParams<double>& params, ModelParams<double>& grads);

 private:
  TrainConfig c_;
  ModelParams<double> m_, v_;
  int t_ = 0;
};

struct Prediction {
  std::string doc_id;
  int gold = 0;
  int predicted = 0;
  std::array<double, 2> probs{};
};

std::vector<Prediction> predict(std::span<const Example<double>> examples,
                                const ModelParams<double>& p, const ModelConfig& c);
Metrics metrics(std::span<const Prediction> predictions);

struct FoldData {
  std::vector<Example<double>> train;
  std::vector<Example<double>> validation;
  std::vector<Example<double>> test;
};

struct FoldResult {
  std::string config;
  int fold = 0;
  std::uint64_t seed = 0;
  int best_epoch = 0;
  int epochs_run = 0;
  double best_val_f1 = 0.0;
  double test_accuracy = 0.0;
  double test_macro_f1 = 0.0;
  std::vector<Prediction> predictions;  // test split
};

/// Trains from init_params(model) with seeded shuffling, keeps the epoch with
/// the best validation macro-F1, and evaluates it on the test split. The
/// restored parameters are written to *best when given.
FoldResult train_fold(const FoldData& data, const TrainConfig& train, const ModelConfig& model,
                      ModelParams<double>* best = nullptr);

struct ExperimentResult {
  std::string config;
  ModelConfig model;
  std::vector<FoldResult> folds;
  double mean_accuracy = 0.0;
  double std_accuracy = 0.0;
  double mean_macro_f1 = 0.0;
  double std_macro_f1 = 0.0;

  /// Recomputes the aggregates (population std) from `folds`.
  void aggregate();
};

/// Inputs shared by every fold and configuration.
struct Artifacts {
  Corpus corpus;
  TriplesByDoc triples;
  LinksByDoc links;
  std::vector<DocGraph> graphs;  // corpus order, links attached
  WordVectorTable table;
  std::optional<DocEmbeddingStore> doc_embeddings;
  int retrieval_cap = 10;

  TextEncoder encoder() const { return TextEncoder(&table, doc_embeddings ? &*doc_embeddings : nullptr); }
};

/// Builds the linked base graphs. Every corpus document must have an entry in
/// `triples`.
Artifacts make_artifacts(Corpus corpus, TriplesByDoc triples, LinksByDoc links,
                         WordVectorTable table, std::optional<DocEmbeddingStore> doc_embeddings,
                         int retrieval_cap);

/// Class KGs and enriched graphs of one fold.
struct FoldArtifacts {
  FoldPlan plan;
  ClassKG kg_true;
  ClassKG kg_misinfo;
  std::map<std::string, EnrichedGraphPair> enriched;
};

/// Builds both class KGs from the fold's training split, checks provenance,
/// and enriches every document.
FoldArtifacts prepare_fold(const Artifacts& a, const FoldPlan& plan);

/// Fills in the data-dependent widths (d_text, d_feat).
ModelConfig resolve_widths(ModelConfig c, const Artifacts& a);

FoldData make_fold_data(const Artifacts& a, const FoldArtifacts& fold, const ModelConfig& c);

struct NamedConfig {
  std::string name;
  ModelConfig model;
};

/// Every configuration on every fold; fold f trains with model and shuffle
/// seed plan.seed. Jobs run on up to `jobs` threads and results are
/// independent of the thread count.
std::vector<ExperimentResult> run_experiment(const Artifacts& a, const std::vector<FoldPlan>& folds,
                                             const std::vector<NamedConfig>& configs,
                                             const TrainConfig& train, int jobs = 1);

/// The full tegra configuration with one graph channel left out.
NamedConfig ablation_config(const NamedConfig& tegra, Channel drop);
/// Parses a comma list of channels to drop; rejects dropping both.
Channel parse_drop(std::string_view s);

ExperimentResult ablate(const Artifacts& a, const std::vector<FoldPlan>& folds,
                        const NamedConfig& tegra, Channel drop, const TrainConfig& train,
                        int jobs = 1);

/// Per-document counts behind the error analysis.
struct EnrichmentRecord {
  std::string doc_id;
  int words = 0;
  int base_triples = 0;
  int added_true = 0;     // "Consistency"
  int added_misinfo = 0;  // "Contradiction"
};

std::vector<EnrichmentRecord> enrichment_records(const Artifacts& a, const FoldArtifacts& fold,
                                                 Split split = Split::kTest);

struct MeanStd {
  double mean = 0.0;
  double std = 0.0;
};
MeanStd mean_std(std::span<const double> xs);

struct ErrorBucket {
  std::string name;
  int n = 0;
  MeanStd words, base_triples, added_true, added_misinfo;
};

struct Flip {
  std::string doc_id;
  int gold = 0;
  int pred_a = 0;
  int pred_b = 0;
};

struct ErrorReport {
  std::vector<ErrorBucket> buckets;  // A correct, A incorrect, B correct, B incorrect
  std::vector<Flip> flips;
};

/// Both prediction lists must cover the same documents.
ErrorReport error_report(std::span<const Prediction> a, std::span<const Prediction> b,
                         const std::vector<EnrichmentRecord>& records);

nlohmann::json error_report_to_json(const ErrorReport& r);

// Output tables.
void write_results_csv(const std::vector<ExperimentResult>& results, const std::filesystem::path& path);
void write_summary_csv(const std::vector<ExperimentResult>& results, const std::filesystem::path& path);
void write_predictions_csv(const std::vector<ExperimentResult>& results,
                           const std::filesystem::path& path);
std::string summary_table(const std::vector<ExperimentResult>& results);

}  // namespace tegra

#endif  // TEGRA_TRAINING_HPP_
