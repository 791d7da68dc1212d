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

#ifndef TEGRA_FEATURES_HPP_
#define TEGRA_FEATURES_HPP_

#include <vector>

#include "tegra/embedding.hpp"
#include "tegra/graph.hpp"
#include "tegra/knowledge.hpp"
#include "tegra/model.hpp"

namespace tegra {

/// Frozen phrase embeddings of g's nodes and edges plus the gating layout.
/// `added` lists the retrieved triples behind g's added elements, indexed by
/// ts_group; pass an empty list for a base graph.
GraphInput<double> make_graph_input(const DocGraph& g, const std::vector<AddedTriple>& added,
                                    const WordVectorTable& table);

/// Model inputs for one document under a configuration. `pair` may be null
/// unless the mode is tegra.
Example<double> make_example(const Document& doc, const Eigen::VectorXd& text,
                             const DocGraph& base, const EnrichedGraphPair* pair,
                             const ModelConfig& config, const WordVectorTable& table);

}  // namespace tegra

#endif  // TEGRA_FEATURES_HPP_
