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

#include "tegra/model.hpp"

#include <fstream>
#include <sstream>

namespace tegra {

using nlohmann::json;

std::string_view to_string(Mode mode) {
  switch (mode) {
    case Mode::kTextOnly: return "text_only";
    case Mode::kTeg: return "teg";
    case Mode::kTegra: return "tegra";
  }
  return "?";
}

Mode parse_mode(std::string_view s) {
  if (s == "text_only") return Mode::kTextOnly;
  if (s == "teg") return Mode::kTeg;
  if (s == "tegra") return Mode::kTegra;
  throw ConfigError("unknown mode '" + std::string(s) + "' (expected text_only|teg|tegra)");
}

std::string_view to_string(Channel channel) {
  switch (channel) {
    case Channel::kBase: return "g";
    case Channel::kTrue: return "g_true";
    case Channel::kMisinfo: return "g_misinfo";
  }
  return "?";
}

Channel parse_channel(std::string_view s) {
  if (s == "g") return Channel::kBase;
  if (s == "g_true") return Channel::kTrue;
  if (s == "g_misinfo") return Channel::kMisinfo;
  throw ConfigError("unknown graph channel '" + std::string(s) + "'");
}

std::vector<Channel> ModelConfig::channels() const {
  switch (mode) {
    case Mode::kTextOnly: return {};
    case Mode::kTeg: return {Channel::kBase};
    case Mode::kTegra: {
      std::vector<Channel> out;
      for (Channel ch : {Channel::kTrue, Channel::kMisinfo}) {
        if (dropped != ch) out.push_back(ch);
      }
      return out;
    }
  }
  return {};
}

int ModelConfig::concat_width() const {
  return d_text + static_cast<int>(channels().size()) * pooled_width();
}

void ModelConfig::validate() const {
  if (d_text < 1) throw ConfigError("model.d_text must be >= 1");
  if (d_hidden < 1) throw ConfigError("model.d_hidden must be >= 1");
  if (mode != Mode::kTextOnly) {
    if (n_gat_layers < 1) throw ConfigError("model.gat_layers must be >= 1");
    if (d_out < 1 || d_feat < 1) throw ConfigError("model.d_out and d_feat must be >= 1");
    if (has_ts() && d_h < 1) throw ConfigError("model.d_h must be >= 1");
  }
  if (dropped) {
    if (mode != Mode::kTegra || *dropped == Channel::kBase) {
      throw ConfigError("only g_true or g_misinfo can be dropped, and only in tegra mode");
    }
  }
}

json config_to_json(const ModelConfig& c) {
  return json{{"mode", to_string(c.mode)},
              {"gat_layers", c.n_gat_layers},
              {"d_out", c.d_out},
              {"d_h", c.d_h},
              {"d_hidden", c.d_hidden},
              {"ts", c.ts_enabled},
              {"slope", c.slope},
              {"seed", c.seed},
              {"dropped", c.dropped ? json(to_string(*c.dropped)) : json(nullptr)},
              {"d_text", c.d_text},
              {"d_feat", c.d_feat}};
}

ModelConfig config_from_json(const json& j) {
  ModelConfig c;
  c.mode = parse_mode(j.at("mode").get<std::string>());
  c.n_gat_layers = j.at("gat_layers").get<int>();
  c.d_out = j.at("d_out").get<int>();
  c.d_h = j.at("d_h").get<int>();
  c.d_hidden = j.at("d_hidden").get<int>();
  c.ts_enabled = j.at("ts").get<bool>();
  c.slope = j.at("slope").get<double>();
  c.seed = j.at("seed").get<std::uint64_t>();
  if (!j.at("dropped").is_null()) c.dropped = parse_channel(j["dropped"].get<std::string>());
  c.d_text = j.at("d_text").get<int>();
  c.d_feat = j.at("d_feat").get<int>();
  return c;
}

std::size_t expected_parameter_count(const ModelConfig& c) {
  const auto d_feat = static_cast<std::size_t>(c.d_feat);
  const auto d_out = static_cast<std::size_t>(c.d_out);
  const auto d_h = static_cast<std::size_t>(c.d_h);
  const auto d_text = static_cast<std::size_t>(c.d_text);
  const auto d_hidden = static_cast<std::size_t>(c.d_hidden);
  std::size_t per_channel = 0;
  std::size_t d_in = d_feat;
  for (int l = 0; l < c.n_gat_layers; ++l) {
    per_channel += d_in * d_out + d_feat * d_out + 3 * d_out;
    d_in = d_out;
  }
  if (c.has_ts()) per_channel += d_text * d_h + d_feat * d_h + d_h * d_h + 3 * d_h;
  const auto d_concat = static_cast<std::size_t>(c.concat_width());
  return c.channels().size() * per_channel + d_concat * d_hidden + d_hidden + 2 * d_hidden + 2;
}

Neighborhood Neighborhood::build(int n_nodes, const std::vector<std::pair<int, int>>& edges) {
  std::vector<std::vector<std::pair<int, int>>> by_target(n_nodes);
  for (int i = 0; i < n_nodes; ++i) by_target[i].push_back({i, -1});
  for (std::size_t k = 0; k < edges.size(); ++k) {
    const auto [s, t] = edges[k];
    if (s < 0 || s >= n_nodes || t < 0 || t >= n_nodes) {
      throw ValidationError("edge endpoint out of range");
    }
    by_target[s].push_back({t, static_cast<int>(k)});
    by_target[t].push_back({s, static_cast<int>(k)});
  }
  Neighborhood h;
  h.offsets.push_back(0);
  for (const auto& list : by_target) {
    for (const auto& [src, edge] : list) {
      h.source.push_back(src);
      h.edge.push_back(edge);
    }
    h.offsets.push_back(static_cast<int>(h.source.size()));
  }
  return h;
}

void save_checkpoint(const ModelParams<double>& p, const ModelConfig& c,
                     const std::filesystem::path& path) {
  json tensors = json::array();
  visit_tensors(p, [&](const std::string& name, const auto& t) {
    std::vector<double> data(t.data(), t.data() + t.size());
    tensors.push_back({{"name", name}, {"rows", t.rows()}, {"cols", t.cols()}, {"data", data}});
  });
  json j{{"version", 1}, {"config", config_to_json(c)}, {"seed", c.seed}, {"tensors", tensors}};
  std::ofstream out(path);
  if (!out) throw IoError("cannot write checkpoint " + path.string());
  out << j.dump() << '\n';
}

ModelParams<double> load_checkpoint(const std::filesystem::path& path, const ModelConfig& expected) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open checkpoint " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  json j;
  try {
    j = json::parse(ss.str());
    if (j.at("version").get<int>() != 1) throw FormatError("unsupported checkpoint version");
    if (config_from_json(j.at("config")) != expected) {
      throw FormatError("checkpoint " + path.string() + " was written for a different model config");
    }
  } catch (const json::exception& e) {
    throw FormatError("corrupt checkpoint " + path.string() + ": " + e.what());
  }
  auto p = init_params<double>(expected);
  const auto& tensors = j.at("tensors");
  std::size_t k = 0;
  visit_tensors(p, [&](const std::string& name, auto& t) {
    if (k >= tensors.size()) throw FormatError("checkpoint is missing tensor " + name);
    const auto& jt = tensors[k++];
    if (jt.at("name") != name || jt.at("rows").get<Eigen::Index>() != t.rows() ||
        jt.at("cols").get<Eigen::Index>() != t.cols()) {
      throw FormatError("checkpoint tensor " + name + " does not match the model shape");
    }
    const auto data = jt.at("data").get<std::vector<double>>();
    if (static_cast<Eigen::Index>(data.size()) != t.size()) {
      throw FormatError("checkpoint tensor " + name + " has the wrong size");
    }
    std::copy(data.begin(), data.end(), t.data());
  });
  if (k != tensors.size()) throw FormatError("checkpoint has extra tensors");
  return p;
}

}  // namespace tegra
