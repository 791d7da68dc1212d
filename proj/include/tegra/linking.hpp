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

#ifndef TEGRA_LINKING_HPP_
#define TEGRA_LINKING_HPP_

#include <chrono>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "tegra/graph.hpp"

namespace tegra {

struct EntityLink {
  int node_id = 0;
  std::string uri;
  double confidence = 1.0;

  bool operator==(const EntityLink&) const = default;
};

using LinksByDoc = std::map<std::string, std::vector<EntityLink>>;

struct Gazetteer {
  std::map<std::string, std::string> entries;  // normalized surface -> uri

  void add(const std::string& surface, const std::string& uri);
};

/// TSV lines "surface<TAB>uri". Surfaces are normalized on load; the first
/// entry for a surface wins.
Gazetteer load_gazetteer(const std::filesystem::path& path);
void save_gazetteer(const Gazetteer& gaz, const std::filesystem::path& path);

/// Links a node when its whole norm is a key, otherwise the longest token
/// sub-span of at least min_span tokens that is a key (leftmost on ties).
/// Confidence is always 1.
std::vector<EntityLink> link_gazetteer(const DocGraph& g, const Gazetteer& gaz, int min_span = 2);

struct RemoteLinkerOptions {
  std::string endpoint;  // e.g. http://localhost:2222/rest/annotate
  double confidence_threshold = 0.5;
  int max_retries = 3;
  std::chrono::milliseconds backoff{100};  // doubled after each failed attempt
  int in_flight = 4;
  std::chrono::seconds timeout{10};
};

struct RemoteLinkResult {
  std::vector<EntityLink> links;  // sorted by node_id
  int retries = 0;                // transient failures that were retried
};

/// One form-encoded POST (text=<label>, confidence=<threshold>) per node.
/// Accepts Spotlight-style JSON: an annotation array under "Resources" whose
/// items carry "@URI"/"URI" and "@similarityScore"/"similarityScore". The
/// best-scoring resource at or above the threshold becomes the node's link.
/// Throws RemoteError once retries are exhausted and ProtocolError on an
/// unparseable body.
RemoteLinkResult link_remote(const DocGraph& g, const RemoteLinkerOptions& options);

/// Parses one annotation response body. Exposed for tests.
std::optional<EntityLink> parse_annotation(const std::string& body, int node_id,
                                           double confidence_threshold);

/// Copy of g with each link's URI set on its node. attach(attach(g)) == attach(g).
DocGraph attach_links(const DocGraph& g, const std::vector<EntityLink>& links);

/// JSONL records {"doc","node","uri","confidence"}.
void save_links(const LinksByDoc& links, const std::filesystem::path& path);
LinksByDoc load_links(const std::filesystem::path& path);

}  // namespace tegra

#endif  // TEGRA_LINKING_HPP_
