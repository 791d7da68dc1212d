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

#include "tegra/features.hpp"

#include <algorithm>

#include "tegra/error.hpp"

namespace tegra {

GraphInput<double> make_graph_input(const DocGraph& g, const std::vector<AddedTriple>& added,
                                    const WordVectorTable& table) {
  const int d = table.dim();
  GraphInput<double> in;
  in.n_nodes = static_cast<int>(g.nodes.size());
  in.node_feats = Mat<double>(in.n_nodes, d);
  for (int i = 0; i < in.n_nodes; ++i) {
    in.node_feats.row(i) = embed_phrase(g.nodes[i].label, table).transpose();
  }
  in.edge_feats = Mat<double>(static_cast<Eigen::Index>(g.edges.size()), d);
  in.node_groups.assign(in.n_nodes, {});
  for (std::size_t k = 0; k < g.edges.size(); ++k) {
    const auto& e = g.edges[k];
    in.edges.emplace_back(e.src, e.dst);
    in.edge_feats.row(static_cast<Eigen::Index>(k)) = embed_phrase(e.label, table).transpose();
    const int group = e.ts_group.value_or(-1);
    if (e.origin != Origin::kBase && group < 0) {
      throw ConsistencyError("added edge without ts_group in '" + g.doc_id + "'");
    }
    in.edge_group.push_back(e.origin == Origin::kBase ? -1 : group);
    if (group < 0) continue;
    for (int node : {e.src, e.dst}) {
      if (g.nodes[node].origin != Origin::kBase) in.node_groups[node].push_back(group);
    }
  }
  for (auto& groups : in.node_groups) {
    std::sort(groups.begin(), groups.end());
    groups.erase(std::unique(groups.begin(), groups.end()), groups.end());
  }
  in.hood = Neighborhood::build(in.n_nodes, in.edges);

  in.triple_feats = Mat<double>(static_cast<Eigen::Index>(added.size()), d);
  for (std::size_t k = 0; k < added.size(); ++k) {
    if (added[k].ts_group != static_cast<int>(k)) {
      throw ConsistencyError("retrieved triples of '" + g.doc_id + "' are not in ts_group order");
    }
    in.triple_feats.row(static_cast<Eigen::Index>(k)) =
        embed_triple(added[k].triple.triple, table).transpose();
  }
  for (int grp : in.edge_group) {
    if (grp >= static_cast<int>(added.size())) {
      throw ConsistencyError("ts_group " + std::to_string(grp) + " has no retrieved triple");
    }
  }
  return in;
}

Example<double> make_example(const Document& doc, const Eigen::VectorXd& text,
                             const DocGraph& base, const EnrichedGraphPair* pair,
                             const ModelConfig& config, const WordVectorTable& table) {
  Example<double> ex;
  ex.doc_id = doc.id;
  ex.label = label_index(doc.label);
  ex.text = text;
  static const std::vector<AddedTriple> kNone;
  for (Channel ch : config.channels()) {
    if (ch == Channel::kBase) {
      ex.graphs.push_back(make_graph_input(base, kNone, table));
      continue;
    }
    if (!pair) throw ConfigError("tegra mode needs enriched graphs for '" + doc.id + "'");
    if (ch == Channel::kTrue) {
      ex.graphs.push_back(make_graph_input(pair->g_true, pair->added_true, table));
    } else {
      ex.graphs.push_back(make_graph_input(pair->g_misinfo, pair->added_misinfo, table));
    }
  }
  return ex;
}

}  // namespace tegra
