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

#ifndef TEGRA_TESTS_ORACLES_HPP_
#define TEGRA_TESTS_ORACLES_HPP_

// Independent reference computations shared by the unit tests and the
// acceptance binary. Deliberately written without the library's helpers.

#include <algorithm>
#include <array>
#include <numeric>
#include <set>
#include <string>
#include <vector>

#include "tegra/graph.hpp"
#include "tegra/random.hpp"

namespace tegra::oracle {

class UnionFind {
 public:
  explicit UnionFind(int n) : parent_(n) { std::iota(parent_.begin(), parent_.end(), 0); }
  int root(int x) {
    while (parent_[x] != x) x = parent_[x] = parent_[parent_[x]];
    return x;
  }
  void unite(int a, int b) { parent_[root(a)] = root(b); }

 private:
  std::vector<int> parent_;
};

inline int components(int n_nodes, const std::vector<std::pair<int, int>>& edges) {
  UnionFind uf(n_nodes);
  for (const auto& [a, b] : edges) uf.unite(a, b);
  std::set<int> roots;
  for (int i = 0; i < n_nodes; ++i) roots.insert(uf.root(i));
  return static_cast<int>(roots.size());
}

// Random multigraph with distinct node phrases "n<i>", built through
// build_graph so node order is first appearance. Some nodes may stay isolated
// when `isolated` is set, which build_graph cannot produce.
struct RandomGraph {
  DocGraph graph;
  std::vector<std::pair<int, int>> edges;
};

inline RandomGraph random_graph(Rng& rng, int max_nodes, int max_edges, bool isolated = true) {
  RandomGraph r;
  r.graph.doc_id = "g";
  const int n = 1 + static_cast<int>(uniform_index(rng, static_cast<std::uint64_t>(max_nodes)));
  for (int i = 0; i < n; ++i) r.graph.intern("n" + std::to_string(i), Origin::kBase);
  const int m = static_cast<int>(uniform_index(rng, static_cast<std::uint64_t>(max_edges) + 1));
  for (int k = 0; k < m; ++k) {
    int a = static_cast<int>(uniform_index(rng, n));
    int b = static_cast<int>(uniform_index(rng, n));
    if (!isolated && k == 0) a = b = 0;
    r.graph.edges.push_back({a, b, "p" + std::to_string(k % 3), Origin::kBase, std::nullopt});
    r.edges.emplace_back(a, b);
  }
  return r;
}

// Accuracy and macro-F1 from an explicit 2x2 confusion matrix.
inline std::array<double, 2> metrics(const std::vector<int>& golds, const std::vector<int>& preds) {
  long long cm[2][2] = {{0, 0}, {0, 0}};
  for (std::size_t i = 0; i < golds.size(); ++i) ++cm[golds[i]][preds[i]];
  const double total = static_cast<double>(golds.size());
  const double acc = static_cast<double>(cm[0][0] + cm[1][1]) / total;
  double f1_sum = 0.0;
  for (int c = 0; c < 2; ++c) {
    const long long tp = cm[c][c];
    const long long fp = cm[1 - c][c];
    const long long fn = cm[c][1 - c];
    if (tp == 0) continue;  // precision or recall is 0 (or undefined): F1 = 0
    const double p = static_cast<double>(tp) / static_cast<double>(tp + fp);
    const double r = static_cast<double>(tp) / static_cast<double>(tp + fn);
    f1_sum += 2 * p * r / (p + r);
  }
  return {acc, f1_sum / 2};
}

// Base-origin nodes and edges as sorted multisets keyed by phrase, so the
// comparison does not depend on node ids.
struct BaseMultiset {
  std::vector<std::string> nodes;
  std::vector<std::string> edges;
  bool operator==(const BaseMultiset&) const = default;
};

inline BaseMultiset base_multiset(const DocGraph& g) {
  BaseMultiset m;
  for (const auto& n : g.nodes) {
    if (n.origin == Origin::kBase) m.nodes.push_back(n.label + "|" + n.norm + "|" + n.entity_uri.value_or("-"));
  }
  for (const auto& e : g.edges) {
    if (e.origin != Origin::kBase) continue;
    m.edges.push_back(g.nodes[e.src].norm + "|" + e.label + "|" + g.nodes[e.dst].norm);
  }
  std::sort(m.nodes.begin(), m.nodes.end());
  std::sort(m.edges.begin(), m.edges.end());
  return m;
}

}  // namespace tegra::oracle

#endif  // TEGRA_TESTS_ORACLES_HPP_
