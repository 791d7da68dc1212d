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

#ifndef TEGRA_TESTS_MODEL_FIXTURES_HPP_
#define TEGRA_TESTS_MODEL_FIXTURES_HPP_

// Small model instances and a central-difference gradient checker, shared by
// the model tests and the acceptance binary.

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "tegra/features.hpp"
#include "tegra/knowledge.hpp"
#include "tegra/model.hpp"
#include "tegra/random.hpp"

namespace tegra::fixture {

inline WordVectorTable random_table(const std::vector<std::string>& vocab, int dim, Rng& rng) {
  WordVectorTable t(dim);
  for (const auto& w : vocab) {
    Eigen::VectorXd v(dim);
    for (int k = 0; k < dim; ++k) v[k] = standard_normal(rng);
    t.add(w, v);
  }
  return t;
}

inline Eigen::VectorXd random_vector(int dim, Rng& rng) {
  Eigen::VectorXd v(dim);
  for (int k = 0; k < dim; ++k) v[k] = standard_normal(rng);
  return v;
}

inline ClassKG kg_from(std::vector<Triple> triples, Label label) {
  ClassKG kg;
  kg.class_label = label;
  for (auto& t : triples) kg.triples.push_back({std::move(t), std::nullopt, std::nullopt});
  kg.rebuild_index();
  return kg;
}

// A document with a 10-node base graph (a ring of e0..e9 plus two chords)
// and two retrieved triples per class KG. In each channel the first triple
// creates a node that the second triple also touches, so that node belongs
// to two ts_groups.
struct TegraInstance {
  ModelConfig config;
  WordVectorTable table;
  std::vector<Example<double>> examples;  // one per label
  std::vector<EnrichedGraphPair> pairs;
};

inline TegraInstance tegra_instance(std::uint64_t seed, int d_feat = 4, int d_text = 5) {
  Rng rng(seed);
  std::vector<std::string> vocab = {"rel", "chord", "v", "w", "u", "x", "y", "new", "old"};
  for (int i = 0; i < 10; ++i) vocab.push_back("e" + std::to_string(i));
  TegraInstance inst;
  inst.table = random_table(vocab, d_feat, rng);
  inst.config.mode = Mode::kTegra;
  inst.config.n_gat_layers = 2;
  inst.config.d_out = 3;
  inst.config.d_h = 3;
  inst.config.d_hidden = 4;
  inst.config.ts_enabled = true;
  inst.config.d_text = d_text;
  inst.config.d_feat = d_feat;
  inst.config.seed = seed;

  const ClassKG kg_true = kg_from({{"e0", "v", "x new", "t"}, {"x new", "w", "e3", "t"}}, Label::kLegit);
  const ClassKG kg_misinfo =
      kg_from({{"e5", "u", "y old", "m"}, {"e7", "v", "y old", "m"}}, Label::kMisinfo);
  for (int label = 0; label < 2; ++label) {
    const std::string id = "doc" + std::to_string(label);
    std::vector<Triple> triples;
    for (int i = 0; i < 10; ++i) {
      triples.push_back({"e" + std::to_string(i), "rel", "e" + std::to_string((i + 1) % 10), id});
    }
    triples.push_back({"e2", "chord", "e6", id});
    triples.push_back({"e4", "rel chord", "e4", id});
    const DocGraph g = build_graph(id, triples);
    auto pair = enrich(g, {}, kg_true, kg_misinfo, 10);
    const Document doc{id, "text", label == 0 ? Label::kLegit : Label::kMisinfo};
    inst.examples.push_back(
        make_example(doc, random_vector(d_text, rng), g, &pair, inst.config, inst.table));
    inst.pairs.push_back(std::move(pair));
  }
  return inst;
}

// Random parameters with non-zero biases, so every tensor gets exercised.
inline ModelParams<double> random_params(const ModelConfig& c, std::uint64_t seed) {
  auto p = init_params<double>(c);
  Rng rng(seed);
  visit_tensors(p, [&](const std::string& name, auto& t) {
    for (Eigen::Index i = 0; i < t.size(); ++i) {
      t.data()[i] = name.ends_with("bias") ? 0.3 * standard_normal(rng)
                                           : t.data()[i] + 0.2 * standard_normal(rng);
    }
  });
  return p;
}

struct GradCheck {
  std::size_t coordinates = 0;
  double max_rel_error = 0.0;
  std::string worst;
};

// Relative error |a - n| / max(|a|, |n|, floor); the floor keeps coordinates
// whose true gradient is zero from dividing by rounding noise.
inline GradCheck check_gradients(const std::vector<Example<double>>& batch, ModelParams<double> p,
                                 const ModelConfig& c, double step = 1e-5, double floor = 1e-6) {
  std::vector<const Example<double>*> ptrs;
  for (const auto& ex : batch) ptrs.push_back(&ex);
  const std::span<const Example<double>* const> span(ptrs);
  const auto analytic = loss_and_grads<double>(span, p, c).grads;

  std::vector<std::pair<std::string, std::span<const double>>> grads;
  visit_tensors(analytic, [&](const std::string& name, const auto& t) {
    grads.emplace_back(name, std::span<const double>(t.data(), static_cast<std::size_t>(t.size())));
  });
  auto views = flat_views(p);
  GradCheck out;
  for (std::size_t v = 0; v < views.size(); ++v) {
    for (std::size_t i = 0; i < views[v].size(); ++i) {
      double& x = views[v][i];
      const double saved = x;
      x = saved + step;
      const double up = loss_and_grads<double>(span, p, c).loss;
      x = saved - step;
      const double down = loss_and_grads<double>(span, p, c).loss;
      x = saved;
      const double numeric = (up - down) / (2 * step);
      const double a = grads[v].second[i];
      const double rel = std::abs(a - numeric) / std::max({std::abs(a), std::abs(numeric), floor});
      ++out.coordinates;
      if (rel > out.max_rel_error) {
        out.max_rel_error = rel;
        out.worst = grads[v].first + "[" + std::to_string(i) + "] analytic=" + std::to_string(a) +
                    " numeric=" + std::to_string(numeric);
      }
    }
  }
  return out;
}

// Attention weights of one layer as a dense row-stochastic matrix target x
// entry, read back from the layer cache.
inline std::vector<double> attention_row_sums(const Neighborhood& hood, const std::vector<double>& alpha) {
  std::vector<double> sums;
  for (std::size_t i = 0; i + 1 < hood.offsets.size(); ++i) {
    double s = 0.0;
    for (int k = hood.offsets[i]; k < hood.offsets[i + 1]; ++k) s += alpha[k];
    sums.push_back(s);
  }
  return sums;
}

// Random graph input with `n` nodes, random features and no retrieved
// elements.
inline GraphInput<double> random_graph_input(Rng& rng, int n, int m, int d_feat) {
  GraphInput<double> g;
  g.n_nodes = n;
  for (int k = 0; k < m; ++k) {
    g.edges.emplace_back(static_cast<int>(uniform_index(rng, n)), static_cast<int>(uniform_index(rng, n)));
  }
  g.hood = Neighborhood::build(n, g.edges);
  g.node_feats = Mat<double>(n, d_feat);
  g.edge_feats = Mat<double>(m, d_feat);
  for (Eigen::Index i = 0; i < g.node_feats.size(); ++i) g.node_feats.data()[i] = standard_normal(rng);
  for (Eigen::Index i = 0; i < g.edge_feats.size(); ++i) g.edge_feats.data()[i] = standard_normal(rng);
  g.edge_group.assign(m, -1);
  g.node_groups.assign(n, {});
  g.triple_feats = Mat<double>(0, d_feat);
  return g;
}

}  // namespace tegra::fixture

#endif  // TEGRA_TESTS_MODEL_FIXTURES_HPP_
