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

#ifndef TEGRA_APP_HPP_
#define TEGRA_APP_HPP_

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "tegra/corpus.hpp"
#include "tegra/embedding.hpp"
#include "tegra/linking.hpp"
#include "tegra/model.hpp"
#include "tegra/training.hpp"

namespace tegra {

struct PathsConfig {
  std::optional<std::filesystem::path> corpus, triples, vectors, doc_embeddings, gazetteer,
      lexicon, links, kg_true, kg_misinfo, enriched, fold_plan;
  std::filesystem::path output_dir = "out";
};

struct LinkerConfig {
  std::string kind = "gazetteer";  // none | gazetteer | remote
  std::string endpoint;
  double threshold = 0.5;
  int min_span = 2;
  int retries = 3;
  int in_flight = 4;
};

struct SynthConfig {
  SyntheticSpec spec;
  int vector_dim = 32;
};

struct RunConfig {
  PathsConfig paths;
  std::string extraction = "builtin";  // builtin | import
  LinkerConfig linker;
  ModelConfig model;
  TrainConfig train;
  int n_folds = 5;
  bool stratified = false;
  int fold = 0;
  std::uint64_t seed = 13;
  int retrieval_cap = 10;
  std::vector<std::string> configs = {"text_only", "teg", "tegra", "tegra-no-ts"};
  std::optional<SynthConfig> synth;
  int jobs = 1;
};

/// Relative paths are resolved against `base_dir`. Unknown keys and bad
/// values are collected and reported together as one ConfigError.
RunConfig run_config_from_json(const nlohmann::json& j,
                               const std::filesystem::path& base_dir = {});
RunConfig load_run_config(const std::filesystem::path& path);
nlohmann::json run_config_to_json(const RunConfig& c);

/// Model configuration behind an experiment configuration name: text_only,
/// teg, tegra, tegra-no-ts, tegra-no-g_true, tegra-no-g_misinfo.
NamedConfig named_config(const std::string& name, const ModelConfig& base);

/// Deterministic stand-ins for the synthetic corpus: one standard-normal
/// vector per corpus token, and a gazetteer of its entities.
WordVectorTable synthetic_vectors(const Corpus& corpus, int dim, std::uint64_t seed);
Gazetteer synthetic_gazetteer(const SyntheticSpec& spec);

/// Loads or builds everything run_experiment needs, as the CLI does.
Artifacts load_artifacts(const RunConfig& c);

std::string sha256_hex(std::string_view data);
std::string sha256_file(const std::filesystem::path& path);

/// Entry point of the command-line tool. Returns the process exit code.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace tegra

#endif  // TEGRA_APP_HPP_
