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

#ifndef TEGRA_GRAPH_HPP_
#define TEGRA_GRAPH_HPP_

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "tegra/extraction.hpp"

namespace tegra {

enum class Origin { kBase, kAddedTrue, kAddedMisinfo };

std::string_view to_string(Origin origin);
Origin parse_origin(std::string_view s);

struct NodeRecord {
  int node_id = 0;
  std::string label;
  std::string norm;
  Origin origin = Origin::kBase;
  std::optional<std::string> entity_uri;
  // Retrieved triple that created the node; unset for base nodes.
  std::optional<int> ts_group;

  bool operator==(const NodeRecord&) const = default;
};

struct EdgeRecord {
  int src = 0;
  int dst = 0;
  std::string label;
  Origin origin = Origin::kBase;
  // Retrieved triple the edge materializes; unset for base edges.
  std::optional<int> ts_group;

  bool operator==(const EdgeRecord&) const = default;
};

/// Directed multigraph over deduplicated phrase nodes. node_id equals the
/// node's position in `nodes`.
struct DocGraph {
  std::string doc_id;
  std::vector<NodeRecord> nodes;
  std::vector<EdgeRecord> edges;

  std::optional<int> find(std::string_view norm) const;
  /// Existing node with this normalized label, or a new one appended with
  /// the given origin and group.
  int intern(const std::string& label, Origin origin, std::optional<int> ts_group = std::nullopt);

  bool operator==(const DocGraph&) const = default;
};

/// One node per distinct normalized subject/object (first-seen casing kept),
/// one edge per triple. Triples whose subject or object normalizes to empty
/// are skipped and counted in *skipped.
DocGraph build_graph(const std::string& doc_id, const std::vector<Triple>& triples,
                     std::size_t* skipped = nullptr);

/// Components of the graph with edge direction ignored; isolated nodes count.
int connected_components(const DocGraph& g);

/// Undirected multigraph degrees; a self-loop adds 2.
std::vector<int> node_degrees(const DocGraph& g);

struct EntityLink;

struct GraphStats {
  int n_triples = 0;
  int n_nodes = 0;
  int n_components = 0;
  int n_linked_entities = 0;
  std::vector<int> degrees;
};

GraphStats graph_stats(const DocGraph& g, const std::vector<EntityLink>& links = {});

nlohmann::json graph_to_json(const DocGraph& g);
DocGraph graph_from_json(const nlohmann::json& j);

}  // namespace tegra

#endif  // TEGRA_GRAPH_HPP_
