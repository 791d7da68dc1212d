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

#ifndef TEGRA_MODEL_HPP_
#define TEGRA_MODEL_HPP_

// Text + graph classifier: a graph attention encoder per graph channel,
// max/mean pooling, optional Triple Selection gating of retrieved elements,
// and a two-layer softmax head. Forward and backward passes are written out
// by hand over Eigen dense types and are generic in the scalar type.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "tegra/error.hpp"
#include "tegra/random.hpp"

namespace tegra {

template <typename S>
using Mat = Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic>;
template <typename S>
using Vec = Eigen::Matrix<S, Eigen::Dynamic, 1>;

enum class Mode { kTextOnly, kTeg, kTegra };
enum class Channel { kBase, kTrue, kMisinfo };

std::string_view to_string(Mode mode);
Mode parse_mode(std::string_view s);
std::string_view to_string(Channel channel);
Channel parse_channel(std::string_view s);

struct ModelConfig {
  Mode mode = Mode::kTegra;
  int n_gat_layers = 2;
  int d_out = 64;
  int d_h = 64;
  int d_hidden = 128;
  bool ts_enabled = true;
  double slope = 0.2;
  std::uint64_t seed = 0;
  // Ablation: a tegra channel left out of the concatenation.
  std::optional<Channel> dropped;
  // Input widths, fixed by the data: text embedding and phrase embedding.
  int d_text = 0;
  int d_feat = 0;

  /// Graph channels fed to the head, in concatenation order.
  std::vector<Channel> channels() const;
  bool has_ts() const { return mode == Mode::kTegra && ts_enabled; }
  int pooled_width() const { return 2 * d_out; }
  int concat_width() const;
  void validate() const;
  bool operator==(const ModelConfig&) const = default;
};

nlohmann::json config_to_json(const ModelConfig& c);
ModelConfig config_from_json(const nlohmann::json& j);

// ---------------------------------------------------------------------------
// Parameters

template <typename S>
struct GatLayerParams {
  Mat<S> weight;       // d_in x d_out
  Mat<S> edge_weight;  // d_feat x d_out
  Vec<S> attention;    // 3 d_out: [target | source | edge]
  S slope = S(0.2);
};

template <typename S>
struct TsParams {
  Mat<S> text_proj;    // d_text x d_h
  Vec<S> text_bias;
  Mat<S> triple_proj;  // d_feat x d_h
  Vec<S> triple_bias;
  Mat<S> shared;       // d_h x d_h
  Vec<S> shared_bias;
};

template <typename S>
struct HeadParams {
  Mat<S> hidden_weight;  // d_concat x d_hidden
  Vec<S> hidden_bias;
  Mat<S> out_weight;     // d_hidden x 2
  Vec<S> out_bias;
};

template <typename S>
struct ChannelParams {
  std::vector<GatLayerParams<S>> layers;
  std::optional<TsParams<S>> ts;
};

template <typename S>
struct ModelParams {
  std::vector<ChannelParams<S>> channels;
  HeadParams<S> head;
};

/// Calls f(name, tensor) for every trainable tensor in a fixed order. The
/// tensor is a Mat<S>& or Vec<S>& (const when P is const).
template <typename P, typename F>
void visit_tensors(P& p, F&& f) {
  for (std::size_t c = 0; c < p.channels.size(); ++c) {
    auto& ch = p.channels[c];
    const std::string cp = "channel" + std::to_string(c) + ".";
    for (std::size_t l = 0; l < ch.layers.size(); ++l) {
      const std::string lp = cp + "gat" + std::to_string(l) + ".";
      f(lp + "weight", ch.layers[l].weight);
      f(lp + "edge_weight", ch.layers[l].edge_weight);
      f(lp + "attention", ch.layers[l].attention);
    }
    if (ch.ts) {
      f(cp + "ts.text_proj", ch.ts->text_proj);
      f(cp + "ts.text_bias", ch.ts->text_bias);
      f(cp + "ts.triple_proj", ch.ts->triple_proj);
      f(cp + "ts.triple_bias", ch.ts->triple_bias);
      f(cp + "ts.shared", ch.ts->shared);
      f(cp + "ts.shared_bias", ch.ts->shared_bias);
    }
  }
  f(std::string("head.hidden_weight"), p.head.hidden_weight);
  f(std::string("head.hidden_bias"), p.head.hidden_bias);
  f(std::string("head.out_weight"), p.head.out_weight);
  f(std::string("head.out_bias"), p.head.out_bias);
}

/// Flat views of every tensor, in visit order.
template <typename S>
std::vector<std::span<S>> flat_views(ModelParams<S>& p) {
  std::vector<std::span<S>> out;
  visit_tensors(p, [&](const std::string&, auto& t) {
    out.emplace_back(t.data(), static_cast<std::size_t>(t.size()));
  });
  return out;
}

template <typename S>
std::size_t parameter_count(const ModelParams<S>& p) {
  std::size_t n = 0;
  visit_tensors(p, [&](const std::string&, const auto& t) { n += static_cast<std::size_t>(t.size()); });
  return n;
}

/// Closed-form parameter count for a configuration:
///   per GAT layer  d_in*d_out + d_feat*d_out + 3*d_out
///   per TS         d_text*d_h + d_feat*d_h + d_h*d_h + 3*d_h
///   head           d_concat*d_hidden + d_hidden + 2*d_hidden + 2
std::size_t expected_parameter_count(const ModelConfig& c);

template <typename S>
ModelParams<S> zeros_like(const ModelParams<S>& p) {
  ModelParams<S> z = p;
  visit_tensors(z, [](const std::string&, auto& t) { t.setZero(); });
  return z;
}

/// Fan-balanced uniform init, U(+-sqrt(6 / (fan_in + fan_out))) for matrices
/// (rows = fan_in) and attention vectors (fan_in = length, fan_out = 1);
/// biases zero. Deterministic in config.seed.
template <typename S>
ModelParams<S> init_params(const ModelConfig& c) {
  c.validate();
  ModelParams<S> p;
  auto mat = [](int r, int cols) { return Mat<S>(r, cols); };
  for (std::size_t ch = 0; ch < c.channels().size(); ++ch) {
    ChannelParams<S> cp;
    int d_in = c.d_feat;
    for (int l = 0; l < c.n_gat_layers; ++l) {
      GatLayerParams<S> layer;
      layer.weight = mat(d_in, c.d_out);
      layer.edge_weight = mat(c.d_feat, c.d_out);
      layer.attention = Vec<S>(3 * c.d_out);
      layer.slope = static_cast<S>(c.slope);
      cp.layers.push_back(std::move(layer));
      d_in = c.d_out;
    }
    if (c.has_ts()) {
      TsParams<S> ts;
      ts.text_proj = mat(c.d_text, c.d_h);
      ts.text_bias = Vec<S>::Zero(c.d_h);
      ts.triple_proj = mat(c.d_feat, c.d_h);
      ts.triple_bias = Vec<S>::Zero(c.d_h);
      ts.shared = mat(c.d_h, c.d_h);
      ts.shared_bias = Vec<S>::Zero(c.d_h);
      cp.ts = std::move(ts);
    }
    p.channels.push_back(std::move(cp));
  }
  p.head.hidden_weight = mat(c.concat_width(), c.d_hidden);
  p.head.hidden_bias = Vec<S>::Zero(c.d_hidden);
  p.head.out_weight = mat(c.d_hidden, 2);
  p.head.out_bias = Vec<S>::Zero(2);

  Rng rng(c.seed);
  visit_tensors(p, [&](const std::string& name, auto& t) {
    if (name.ends_with("bias")) return;
    const double fan_sum = t.cols() == 1 && name.ends_with("attention")
                               ? static_cast<double>(t.rows()) + 1.0
                               : static_cast<double>(t.rows() + t.cols());
    const double bound = std::sqrt(6.0 / fan_sum);
    for (Eigen::Index i = 0; i < t.size(); ++i) {
      t.data()[i] = static_cast<S>(uniform_real(rng, -bound, bound));
    }
  });
  return p;
}

// ---------------------------------------------------------------------------
// Inputs

/// Attention neighbourhoods grouped by target node (CSR). For every node the
/// first entry is its self-loop (edge -1); every edge then contributes one
/// entry in each direction, in edge order.
struct Neighborhood {
  std::vector<int> offsets;  // n + 1
  std::vector<int> source;
  std::vector<int> edge;

  static Neighborhood build(int n_nodes, const std::vector<std::pair<int, int>>& edges);
  int size() const { return static_cast<int>(source.size()); }
};

/// Frozen features and gating structure of one graph channel.
template <typename S>
struct GraphInput {
  int n_nodes = 0;
  std::vector<std::pair<int, int>> edges;
  Neighborhood hood;
  Mat<S> node_feats;  // n x d_feat
  Mat<S> edge_feats;  // m x d_feat
  // Retrieved-triple bookkeeping: -1 for base edges, empty for base nodes.
  std::vector<int> edge_group;
  std::vector<std::vector<int>> node_groups;
  Mat<S> triple_feats;  // n_groups x d_feat

  int n_groups() const { return static_cast<int>(triple_feats.rows()); }
};

template <typename S>
struct Example {
  std::string doc_id;
  int label = 0;  // 0 legit, 1 misinfo
  Vec<S> text;
  std::vector<GraphInput<S>> graphs;  // one per ModelConfig::channels()
};

// ---------------------------------------------------------------------------
// Building blocks

template <typename S>
S sigmoid(S x) {
  return x >= S(0) ? S(1) / (S(1) + std::exp(-x)) : std::exp(x) / (S(1) + std::exp(x));
}

template <typename S>
struct GatedFeatures {
  Mat<S> nodes;
  Mat<S> edges;
  Vec<S> node_scale;
  Vec<S> edge_scale;
};

/// Scales each added edge by its group's relevance and each added node by
/// the mean relevance of the groups it takes part in. Base rows are copied.
template <typename S>
GatedFeatures<S> apply_ts(const GraphInput<S>& g, const Vec<S>& mu) {
  GatedFeatures<S> out;
  out.node_scale = Vec<S>::Ones(g.n_nodes);
  out.edge_scale = Vec<S>::Ones(static_cast<Eigen::Index>(g.edges.size()));
  auto check = [&](int group) {
    if (group < 0 || group >= mu.size()) {
      throw ConsistencyError("no relevance score for ts_group " + std::to_string(group));
    }
  };
  for (int i = 0; i < g.n_nodes; ++i) {
    const auto& groups = g.node_groups[i];
    if (groups.empty()) continue;
    S sum = S(0);
    for (int grp : groups) {
      check(grp);
      sum += mu[grp];
    }
    out.node_scale[i] = sum / static_cast<S>(groups.size());
  }
  for (std::size_t k = 0; k < g.edges.size(); ++k) {
    if (g.edge_group[k] < 0) continue;
    check(g.edge_group[k]);
    out.edge_scale[k] = mu[g.edge_group[k]];
  }
  out.nodes = out.node_scale.asDiagonal() * g.node_feats;
  out.edges = out.edge_scale.asDiagonal() * g.edge_feats;
  return out;
}

template <typename S>
struct TsCache {
  Vec<S> text_pre, text_hidden, text_out;  // d_h
  Mat<S> triple_pre, triple_hidden, triple_out;  // G x d_h
  Vec<S> mu;  // G
};

/// Relevance of every retrieved triple to the document text:
/// mu = sigmoid(<shared(relu(text_proj t)), shared(relu(triple_proj e))>).
template <typename S>
TsCache<S> ts_forward(const Vec<S>& text, const Mat<S>& triples, const TsParams<S>& p) {
  if (text.size() != p.text_proj.rows() || triples.cols() != p.triple_proj.rows()) {
    throw ShapeError("triple selection input width mismatch");
  }
  TsCache<S> c;
  c.text_pre = p.text_proj.transpose() * text + p.text_bias;
  c.text_hidden = c.text_pre.cwiseMax(S(0));
  c.text_out = p.shared.transpose() * c.text_hidden + p.shared_bias;
  c.triple_pre = (triples * p.triple_proj).rowwise() + p.triple_bias.transpose();
  c.triple_hidden = c.triple_pre.cwiseMax(S(0));
  c.triple_out = (c.triple_hidden * p.shared).rowwise() + p.shared_bias.transpose();
  const Vec<S> logits = c.triple_out * c.text_out;
  c.mu = logits.unaryExpr([](S x) { return sigmoid(x); });
  return c;
}

template <typename S>
S ts_score(const Vec<S>& text, const Vec<S>& triple, const TsParams<S>& p) {
  return ts_forward<S>(text, triple.transpose(), p).mu[0];
}

/// Accumulates parameter gradients of the TS module given d loss / d mu.
template <typename S>
void ts_backward(const Vec<S>& text, const Mat<S>& triples, const TsParams<S>& p,
                 const TsCache<S>& c, const Vec<S>& d_mu, TsParams<S>& g) {
  if (triples.rows() == 0) return;
  const Vec<S> d_logit = d_mu.cwiseProduct(c.mu.cwiseProduct((Vec<S>::Ones(c.mu.size()) - c.mu)));
  const Mat<S> d_triple_out = d_logit * c.text_out.transpose();
  const Vec<S> d_text_out = c.triple_out.transpose() * d_logit;

  g.shared.noalias() += c.triple_hidden.transpose() * d_triple_out;
  g.shared.noalias() += c.text_hidden * d_text_out.transpose();
  g.shared_bias += d_triple_out.colwise().sum().transpose() + d_text_out;

  const Mat<S> d_triple_hidden = d_triple_out * p.shared.transpose();
  const Mat<S> d_triple_pre =
      d_triple_hidden.cwiseProduct(c.triple_pre.unaryExpr([](S x) { return x > S(0) ? S(1) : S(0); }));
  g.triple_proj.noalias() += triples.transpose() * d_triple_pre;
  g.triple_bias += d_triple_pre.colwise().sum().transpose();

  const Vec<S> d_text_hidden = p.shared * d_text_out;
  const Vec<S> d_text_pre =
      d_text_hidden.cwiseProduct(c.text_pre.unaryExpr([](S x) { return x > S(0) ? S(1) : S(0); }));
  g.text_proj.noalias() += text * d_text_pre.transpose();
  g.text_bias += d_text_pre;
}

template <typename S>
struct GatLayerCache {
  Mat<S> input;   // n x d_in
  Mat<S> z;       // n x d_out
  Mat<S> f;       // m x d_out
  std::vector<S> score;  // per neighbourhood entry, before the leaky rectifier
  std::vector<S> alpha;  // per neighbourhood entry
  Mat<S> pre;     // n x d_out
  Mat<S> output;  // relu(pre)
};

/// One attention layer. For target i and entry (j, e):
///   logit = leaky(a_t.z_i + a_s.z_j + a_e.f_e), alpha = softmax over i's entries,
///   h_i' = relu(sum alpha (z_j + f_e)), z = H W, f = E W_e, f_self = 0.
template <typename S>
GatLayerCache<S> gat_layer_forward(const Neighborhood& hood, const Mat<S>& input,
                                   const Mat<S>& edge_feats, const GatLayerParams<S>& p) {
  if (input.cols() != p.weight.rows() || edge_feats.cols() != p.edge_weight.rows()) {
    throw ShapeError("attention layer input width mismatch");
  }
  const Eigen::Index d = p.weight.cols();
  const Eigen::Index n = input.rows();
  GatLayerCache<S> c;
  c.input = input;
  c.z = input * p.weight;
  c.f = edge_feats * p.edge_weight;
  const Vec<S> tgt_score = c.z * p.attention.head(d);
  const Vec<S> src_score = c.z * p.attention.segment(d, d);
  const Vec<S> edge_score = c.f * p.attention.tail(d);

  c.score.resize(hood.size());
  c.alpha.resize(hood.size());
  c.pre = Mat<S>::Zero(n, d);
  for (Eigen::Index i = 0; i < n; ++i) {
    const int b = hood.offsets[i];
    const int e = hood.offsets[i + 1];
    S max_logit = -std::numeric_limits<S>::infinity();
    for (int k = b; k < e; ++k) {
      S s = tgt_score[i] + src_score[hood.source[k]];
      if (hood.edge[k] >= 0) s += edge_score[hood.edge[k]];
      c.score[k] = s;
      max_logit = std::max(max_logit, s > S(0) ? s : p.slope * s);
    }
    S total = S(0);
    for (int k = b; k < e; ++k) {
      const S s = c.score[k];
      c.alpha[k] = std::exp((s > S(0) ? s : p.slope * s) - max_logit);
      total += c.alpha[k];
    }
    for (int k = b; k < e; ++k) {
      c.alpha[k] /= total;
      c.pre.row(i) += c.alpha[k] * c.z.row(hood.source[k]);
      if (hood.edge[k] >= 0) c.pre.row(i) += c.alpha[k] * c.f.row(hood.edge[k]);
    }
  }
  c.output = c.pre.cwiseMax(S(0));
  return c;
}

/// Returns d loss / d input; accumulates parameter gradients and adds
/// d loss / d edge_feats into *d_edge_feats.
template <typename S>
Mat<S> gat_layer_backward(const Neighborhood& hood, const Mat<S>& edge_feats,
                          const GatLayerParams<S>& p, const GatLayerCache<S>& c,
                          const Mat<S>& d_output, GatLayerParams<S>& g, Mat<S>* d_edge_feats) {
  const Eigen::Index d = p.weight.cols();
  const Eigen::Index n = c.input.rows();
  const Eigen::Index m = edge_feats.rows();
  const Mat<S> d_pre =
      d_output.cwiseProduct(c.pre.unaryExpr([](S x) { return x > S(0) ? S(1) : S(0); }));
  Mat<S> d_z = Mat<S>::Zero(n, d);
  Mat<S> d_f = Mat<S>::Zero(m, d);
  Vec<S> d_tgt = Vec<S>::Zero(n);
  Vec<S> d_src = Vec<S>::Zero(n);
  Vec<S> d_edge = Vec<S>::Zero(m);

  std::vector<S> d_alpha(hood.size());
  for (Eigen::Index i = 0; i < n; ++i) {
    const int b = hood.offsets[i];
    const int e = hood.offsets[i + 1];
    S weighted = S(0);
    for (int k = b; k < e; ++k) {
      const int j = hood.source[k];
      const int edge = hood.edge[k];
      S da = d_pre.row(i).dot(c.z.row(j));
      if (edge >= 0) da += d_pre.row(i).dot(c.f.row(edge));
      d_alpha[k] = da;
      weighted += c.alpha[k] * da;
      d_z.row(j) += c.alpha[k] * d_pre.row(i);
      if (edge >= 0) d_f.row(edge) += c.alpha[k] * d_pre.row(i);
    }
    for (int k = b; k < e; ++k) {
      const S d_logit = c.alpha[k] * (d_alpha[k] - weighted);
      const S d_score = d_logit * (c.score[k] > S(0) ? S(1) : p.slope);
      d_tgt[i] += d_score;
      d_src[hood.source[k]] += d_score;
      if (hood.edge[k] >= 0) d_edge[hood.edge[k]] += d_score;
    }
  }

  g.attention.head(d) += c.z.transpose() * d_tgt;
  g.attention.segment(d, d) += c.z.transpose() * d_src;
  g.attention.tail(d) += c.f.transpose() * d_edge;
  d_z.noalias() += d_tgt * p.attention.head(d).transpose();
  d_z.noalias() += d_src * p.attention.segment(d, d).transpose();
  d_f.noalias() += d_edge * p.attention.tail(d).transpose();

  g.weight.noalias() += c.input.transpose() * d_z;
  g.edge_weight.noalias() += edge_feats.transpose() * d_f;
  if (d_edge_feats) d_edge_feats->noalias() += d_f * p.edge_weight.transpose();
  return d_z * p.weight.transpose();
}

template <typename S>
struct PoolCache {
  Vec<S> pooled;                  // [max | mean], 2 d
  std::vector<Eigen::Index> argmax;  // per column
  Eigen::Index n_nodes = 0;
};

/// [elementwise max | elementwise mean] over node states; zeros for an empty
/// graph. Ties in the max go to the lowest node index.
template <typename S>
PoolCache<S> pool(const Mat<S>& states) {
  const Eigen::Index d = states.cols();
  PoolCache<S> c;
  c.n_nodes = states.rows();
  c.pooled = Vec<S>::Zero(2 * d);
  c.argmax.assign(static_cast<std::size_t>(d), 0);
  if (c.n_nodes == 0) return c;
  for (Eigen::Index col = 0; col < d; ++col) {
    Eigen::Index best = 0;
    for (Eigen::Index r = 1; r < c.n_nodes; ++r) {
      if (states(r, col) > states(best, col)) best = r;
    }
    c.argmax[col] = best;
    c.pooled[col] = states(best, col);
  }
  c.pooled.tail(d) = states.colwise().mean().transpose();
  return c;
}

template <typename S>
Mat<S> pool_backward(const PoolCache<S>& c, const Vec<S>& d_pooled, Eigen::Index d) {
  Mat<S> d_states = Mat<S>::Zero(c.n_nodes, d);
  if (c.n_nodes == 0) return d_states;
  for (Eigen::Index col = 0; col < d; ++col) d_states(c.argmax[col], col) += d_pooled[col];
  d_states.rowwise() += (d_pooled.tail(d) / static_cast<S>(c.n_nodes)).transpose();
  return d_states;
}

// ---------------------------------------------------------------------------
// Whole model

template <typename S>
struct ChannelTrace {
  std::optional<TsCache<S>> ts;
  GatedFeatures<S> features;
  std::vector<GatLayerCache<S>> layers;
  PoolCache<S> pool;
};

template <typename S>
struct ForwardTrace {
  std::vector<ChannelTrace<S>> channels;
  Vec<S> concat;
  Vec<S> hidden_pre;
  Vec<S> hidden;
  Vec<S> logits;
  Vec<S> probs;
};

/// Encodes one graph channel. With TS parameters the retrieved elements are
/// gated by their relevance; otherwise features pass unchanged.
template <typename S>
ChannelTrace<S> channel_forward(const Vec<S>& text, const GraphInput<S>& g,
                                const ChannelParams<S>& p) {
  ChannelTrace<S> t;
  if (p.ts) {
    t.ts = ts_forward(text, g.triple_feats, *p.ts);
    t.features = apply_ts(g, t.ts->mu);
  } else {
    t.features.nodes = g.node_feats;
    t.features.edges = g.edge_feats;
  }
  const Mat<S>* h = &t.features.nodes;
  for (const auto& layer : p.layers) {
    t.layers.push_back(gat_layer_forward(g.hood, *h, t.features.edges, layer));
    h = &t.layers.back().output;
  }
  t.pool = pool(*h);
  return t;
}

template <typename S>
ForwardTrace<S> forward_trace(const Example<S>& ex, const ModelParams<S>& p, const ModelConfig& c) {
  if (ex.graphs.size() != p.channels.size()) {
    throw ConfigError("example '" + ex.doc_id + "' has " + std::to_string(ex.graphs.size()) +
                      " graphs but the model expects " + std::to_string(p.channels.size()));
  }
  if (ex.text.size() != c.d_text) throw ShapeError("text embedding width mismatch");
  ForwardTrace<S> t;
  t.concat = Vec<S>(c.concat_width());
  t.concat.head(c.d_text) = ex.text;
  Eigen::Index offset = c.d_text;
  for (std::size_t ch = 0; ch < p.channels.size(); ++ch) {
    t.channels.push_back(channel_forward(ex.text, ex.graphs[ch], p.channels[ch]));
    const auto& pooled = t.channels.back().pool.pooled;
    t.concat.segment(offset, pooled.size()) = pooled;
    offset += pooled.size();
  }
  t.hidden_pre = p.head.hidden_weight.transpose() * t.concat + p.head.hidden_bias;
  t.hidden = t.hidden_pre.cwiseMax(S(0));
  t.logits = p.head.out_weight.transpose() * t.hidden + p.head.out_bias;
  const S top = t.logits.maxCoeff();
  t.probs = (t.logits.array() - top).exp().matrix();
  t.probs /= t.probs.sum();
  return t;
}

/// Class probabilities (legit, misinfo).
template <typename S>
Vec<S> forward(const Example<S>& ex, const ModelParams<S>& p, const ModelConfig& c) {
  return forward_trace(ex, p, c).probs;
}

/// Cross-entropy of one example; adds its gradients into g.
template <typename S>
S backward(const Example<S>& ex, const ForwardTrace<S>& t, const ModelParams<S>& p,
           const ModelConfig& c, ModelParams<S>& g) {
  Eigen::Index arg = 0;
  const S top = t.logits.maxCoeff(&arg);
  S rest = S(0);
  for (Eigen::Index k = 0; k < t.logits.size(); ++k) {
    if (k != arg) rest += std::exp(t.logits[k] - top);
  }
  const S loss = (top - t.logits[ex.label]) + std::log1p(rest);
  if (!std::isfinite(static_cast<double>(loss))) {
    throw NumericError("non-finite loss on document '" + ex.doc_id + "'");
  }

  Vec<S> d_logits = t.probs;
  d_logits[ex.label] -= S(1);
  g.head.out_weight.noalias() += t.hidden * d_logits.transpose();
  g.head.out_bias += d_logits;
  const Vec<S> d_hidden = (p.head.out_weight * d_logits)
                              .cwiseProduct(t.hidden_pre.unaryExpr(
                                  [](S x) { return x > S(0) ? S(1) : S(0); }));
  g.head.hidden_weight.noalias() += t.concat * d_hidden.transpose();
  g.head.hidden_bias += d_hidden;
  const Vec<S> d_concat = p.head.hidden_weight * d_hidden;

  Eigen::Index offset = c.d_text;
  for (std::size_t ch = 0; ch < p.channels.size(); ++ch) {
    const auto& trace = t.channels[ch];
    const auto& graph = ex.graphs[ch];
    const auto& cp = p.channels[ch];
    auto& cg = g.channels[ch];
    const Eigen::Index width = trace.pool.pooled.size();
    const Vec<S> d_pooled = d_concat.segment(offset, width);
    offset += width;

    Mat<S> d_h = pool_backward(trace.pool, d_pooled, width / 2);
    Mat<S> d_edges = Mat<S>::Zero(trace.features.edges.rows(), trace.features.edges.cols());
    for (std::size_t l = cp.layers.size(); l-- > 0;) {
      d_h = gat_layer_backward(graph.hood, trace.features.edges, cp.layers[l], trace.layers[l], d_h,
                               cg.layers[l], &d_edges);
    }
    if (!trace.ts) continue;

    // d loss / d mu through the scaled node and edge features.
    Vec<S> d_mu = Vec<S>::Zero(graph.n_groups());
    for (std::size_t k = 0; k < graph.edges.size(); ++k) {
      if (graph.edge_group[k] >= 0) {
        d_mu[graph.edge_group[k]] += d_edges.row(k).dot(graph.edge_feats.row(k));
      }
    }
    for (int i = 0; i < graph.n_nodes; ++i) {
      const auto& groups = graph.node_groups[i];
      if (groups.empty()) continue;
      const S share = d_h.row(i).dot(graph.node_feats.row(i)) / static_cast<S>(groups.size());
      for (int grp : groups) d_mu[grp] += share;
    }
    ts_backward(ex.text, graph.triple_feats, *cp.ts, *trace.ts, d_mu, *cg.ts);
  }
  return loss;
}

template <typename S>
struct LossAndGrads {
  S loss = S(0);
  ModelParams<S> grads;
};

/// Mean cross-entropy over the batch and its exact gradient. Examples are
/// accumulated in batch order.
template <typename S>
LossAndGrads<S> loss_and_grads(std::span<const Example<S>* const> batch, const ModelParams<S>& p,
                               const ModelConfig& c) {
  LossAndGrads<S> out;
  out.grads = zeros_like(p);
  if (batch.empty()) return out;
  for (const Example<S>* ex : batch) {
    if (ex->label != 0 && ex->label != 1) throw ValidationError("label must be 0 or 1");
    out.loss += backward(*ex, forward_trace(*ex, p, c), p, c, out.grads);
  }
  const S scale = S(1) / static_cast<S>(batch.size());
  out.loss *= scale;
  visit_tensors(out.grads, [&](const std::string&, auto& t) { t *= scale; });
  return out;
}

// ---------------------------------------------------------------------------
// Checkpoints (double precision)

void save_checkpoint(const ModelParams<double>& p, const ModelConfig& c,
                     const std::filesystem::path& path);
/// Throws FormatError when the stored config differs from `expected`.
ModelParams<double> load_checkpoint(const std::filesystem::path& path, const ModelConfig& expected);

}  // namespace tegra

#endif  // TEGRA_MODEL_HPP_
