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

#include "tegra/graph.hpp"

#include <queue>
#include <set>

#include "tegra/error.hpp"
#include "tegra/linking.hpp"
#include "tegra/text.hpp"

namespace tegra {

using nlohmann::json;

std::string_view to_string(Origin origin) {
  switch (origin) {
    case Origin::kBase: return "base";
    case Origin::kAddedTrue: return "added_true";
    case Origin::kAddedMisinfo: return "added_misinfo";
  }
  return "?";
}

Origin parse_origin(std::string_view s) {
  if (s == "base") return Origin::kBase;
  if (s == "added_true") return Origin::kAddedTrue;
  if (s == "added_misinfo") return Origin::kAddedMisinfo;
  throw FormatError("unknown origin '" + std::string(s) + "'");
}

std::optional<int> DocGraph::find(std::string_view norm) const {
  for (const auto& n : nodes) {
    if (n.norm == norm) return n.node_id;
  }
  return std::nullopt;
}

int DocGraph::intern(const std::string& label, Origin origin, std::optional<int> ts_group) {
  std::string norm = normalize(label);
  if (auto id = find(norm)) return *id;
  NodeRecord node;
  node.node_id = static_cast<int>(nodes.size());
  node.label = label;
  node.norm = std::move(norm);
  node.origin = origin;
  node.ts_group = ts_group;
  nodes.push_back(std::move(node));
  return nodes.back().node_id;
}

DocGraph build_graph(const std::string& doc_id, const std::vector<Triple>& triples,
                     std::size_t* skipped) {
  DocGraph g;
  g.doc_id = doc_id;
  std::size_t n_skipped = 0;
  for (const auto& t : triples) {
    if (t.source_doc != doc_id) {
      throw ValidationError("triple from '" + t.source_doc + "' passed to graph of '" + doc_id +
                            "'");
    }
    if (normalize(t.subject).empty() || normalize(t.object).empty()) {
      ++n_skipped;
      continue;
    }
    const int src = g.intern(t.subject, Origin::kBase);
    const int dst = g.intern(t.object, Origin::kBase);
    g.edges.push_back(EdgeRecord{src, dst, t.predicate, Origin::kBase, std::nullopt});
  }
  if (skipped) *skipped = n_skipped;
  return g;
}

int connected_components(const DocGraph& g) {
  const auto n = g.nodes.size();
  std::vector<std::vector<int>> adj(n);
  for (const auto& e : g.edges) {
    adj[e.src].push_back(e.dst);
    adj[e.dst].push_back(e.src);
  }
  std::vector<bool> seen(n, false);
  int components = 0;
  for (std::size_t s = 0; s < n; ++s) {
    if (seen[s]) continue;
    ++components;
    std::queue<int> q;
    q.push(static_cast<int>(s));
    seen[s] = true;
    while (!q.empty()) {
      const int u = q.front();
      q.pop();
      for (int v : adj[u]) {
        if (!seen[v]) {
          seen[v] = true;
          q.push(v);
        }
      }
    }
  }
  return components;
}

std::vector<int> node_degrees(const DocGraph& g) {
  std::vector<int> deg(g.nodes.size(), 0);
  for (const auto& e : g.edges) {
    ++deg[e.src];
    ++deg[e.dst];
  }
  return deg;
}

GraphStats graph_stats(const DocGraph& g, const std::vector<EntityLink>& links) {
  GraphStats s;
  for (const auto& e : g.edges) {
    if (e.origin == Origin::kBase) ++s.n_triples;
  }
  s.n_nodes = static_cast<int>(g.nodes.size());
  s.n_components = connected_components(g);
  std::set<int> linked;
  for (const auto& n : g.nodes) {
    if (n.entity_uri) linked.insert(n.node_id);
  }
  for (const auto& l : links) {
    if (l.node_id >= 0 && l.node_id < s.n_nodes) linked.insert(l.node_id);
  }
  s.n_linked_entities = static_cast<int>(linked.size());
  s.degrees = node_degrees(g);
  return s;
}

json graph_to_json(const DocGraph& g) {
  json nodes = json::array();
  for (const auto& n : g.nodes) {
    json jn{{"id", n.node_id},
            {"label", n.label},
            {"norm", n.norm},
            {"origin", to_string(n.origin)},
            {"uri", n.entity_uri ? json(*n.entity_uri) : json(nullptr)}};
    if (n.ts_group) jn["ts_group"] = *n.ts_group;
    nodes.push_back(std::move(jn));
  }
  json edges = json::array();
  for (const auto& e : g.edges) {
    json je{{"src", e.src}, {"dst", e.dst}, {"label", e.label}, {"origin", to_string(e.origin)}};
    if (e.ts_group) je["ts_group"] = *e.ts_group;
    edges.push_back(std::move(je));
  }
  return json{{"doc", g.doc_id}, {"nodes", nodes}, {"edges", edges}};
}

DocGraph graph_from_json(const json& j) {
  DocGraph g;
  try {
    g.doc_id = j.at("doc").get<std::string>();
    for (const auto& jn : j.at("nodes")) {
      NodeRecord n;
      n.node_id = jn.at("id").get<int>();
      n.label = jn.at("label").get<std::string>();
      n.norm = jn.at("norm").get<std::string>();
      n.origin = parse_origin(jn.at("origin").get<std::string>());
      if (!jn.at("uri").is_null()) n.entity_uri = jn["uri"].get<std::string>();
      if (jn.contains("ts_group")) n.ts_group = jn["ts_group"].get<int>();
      if (n.node_id != static_cast<int>(g.nodes.size())) {
        throw FormatError("graph node ids must be dense and ordered");
      }
      g.nodes.push_back(std::move(n));
    }
    for (const auto& je : j.at("edges")) {
      EdgeRecord e;
      e.src = je.at("src").get<int>();
      e.dst = je.at("dst").get<int>();
      e.label = je.at("label").get<std::string>();
      e.origin = parse_origin(je.at("origin").get<std::string>());
      if (je.contains("ts_group")) e.ts_group = je["ts_group"].get<int>();
      const int n = static_cast<int>(g.nodes.size());
      if (e.src < 0 || e.src >= n || e.dst < 0 || e.dst >= n) {
        throw FormatError("dangling edge in graph of '" + g.doc_id + "'");
      }
      g.edges.push_back(std::move(e));
    }
  } catch (const json::exception& e) {
    throw FormatError(std::string("bad graph json: ") + e.what());
  }
  return g;
}

}  // namespace tegra
