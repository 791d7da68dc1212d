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

#include "tegra/linking.hpp"

#include <algorithm>
#include <atomic>
#include <fstream>
#include <mutex>
#include <thread>

#include <httplib.h>
#include <nlohmann/json.hpp>
#include <spdlog/spdlog.h>

#include "tegra/error.hpp"
#include "tegra/text.hpp"

namespace tegra {

using nlohmann::json;

void Gazetteer::add(const std::string& surface, const std::string& uri) {
  const std::string key = normalize(surface);
  if (key.empty() || uri.empty()) return;
  entries.emplace(key, uri);
}

Gazetteer load_gazetteer(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open gazetteer " + path.string());
  Gazetteer gaz;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos) {
      throw ParseError(path.string() + ":" + std::to_string(line_no) + ": expected surface<TAB>uri");
    }
    gaz.add(line.substr(0, tab), std::string(trim(line.substr(tab + 1))));
  }
  return gaz;
}

void save_gazetteer(const Gazetteer& gaz, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write gazetteer " + path.string());
  for (const auto& [surface, uri] : gaz.entries) out << surface << '\t' << uri << '\n';
}

std::vector<EntityLink> link_gazetteer(const DocGraph& g, const Gazetteer& gaz, int min_span) {
  std::vector<EntityLink> links;
  if (gaz.entries.empty()) return links;
  const std::size_t min_len = static_cast<std::size_t>(std::max(min_span, 1));
  for (const auto& node : g.nodes) {
    if (auto it = gaz.entries.find(node.norm); it != gaz.entries.end()) {
      links.push_back({node.node_id, it->second, 1.0});
      continue;
    }
    const auto toks = split_whitespace(node.norm);
    bool found = false;
    for (std::size_t len = toks.size() > 0 ? toks.size() - 1 : 0; len >= min_len && !found; --len) {
      for (std::size_t start = 0; start + len <= toks.size() && !found; ++start) {
        std::string span;
        for (std::size_t k = start; k < start + len; ++k) {
          if (!span.empty()) span.push_back(' ');
          span += toks[k];
        }
        if (auto it = gaz.entries.find(span); it != gaz.entries.end()) {
          links.push_back({node.node_id, it->second, 1.0});
          found = true;
        }
      }
    }
  }
  return links;
}

namespace {

struct Endpoint {
  std::string base;  // scheme://host[:port]
  std::string path;
};

Endpoint split_endpoint(const std::string& url) {
  const auto scheme = url.find("://");
  if (scheme == std::string::npos) throw ConfigError("endpoint must be an http URL: " + url);
  const auto slash = url.find('/', scheme + 3);
  if (slash == std::string::npos) return {url, "/"};
  return {url.substr(0, slash), url.substr(slash)};
}

double as_number(const json& v) {
  if (v.is_number()) return v.get<double>();
  if (v.is_string()) {
    try {
      return std::stod(v.get<std::string>());
    } catch (const std::exception&) {
    }
  }
  throw ProtocolError("annotation score is not numeric");
}

const json* member(const json& obj, const char* a, const char* b) {
  if (obj.contains(a)) return &obj[a];
  if (obj.contains(b)) return &obj[b];
  return nullptr;
}

}  // namespace

std::optional<EntityLink> parse_annotation(const std::string& body, int node_id,
                                           double confidence_threshold) {
  json j;
  try {
    j = json::parse(body);
  } catch (const json::exception& e) {
    throw ProtocolError(std::string("unparseable annotation response: ") + e.what());
  }
  if (!j.is_object()) throw ProtocolError("annotation response is not a JSON object");
  const json* resources = member(j, "Resources", "annotations");
  if (!resources || resources->is_null()) return std::nullopt;
  if (!resources->is_array()) throw ProtocolError("annotation list is not an array");

  std::optional<EntityLink> best;
  for (const auto& r : *resources) {
    const json* uri = member(r, "@URI", "URI");
    const json* score = member(r, "@similarityScore", "similarityScore");
    if (!uri || !uri->is_string() || !score) {
      throw ProtocolError("annotation entry lacks URI or similarityScore");
    }
    const double s = as_number(*score);
    if (s < confidence_threshold) continue;
    if (!best || s > best->confidence) {
      best = EntityLink{node_id, uri->get<std::string>(), std::clamp(s, 0.0, 1.0)};
    }
  }
  return best;
}

RemoteLinkResult link_remote(const DocGraph& g, const RemoteLinkerOptions& options) {
  const Endpoint ep = split_endpoint(options.endpoint);
  const std::size_t n = g.nodes.size();
  std::vector<std::optional<EntityLink>> results(n);
  std::vector<std::exception_ptr> errors(n);
  std::atomic<std::size_t> next{0};
  std::atomic<int> retries{0};

  auto worker = [&] {
    httplib::Client client(ep.base);
    client.set_connection_timeout(options.timeout);
    client.set_read_timeout(options.timeout);
    for (std::size_t i = next++; i < n; i = next++) {
      const auto& node = g.nodes[i];
      try {
        httplib::Params params{{"text", node.label},
                               {"confidence", std::to_string(options.confidence_threshold)}};
        httplib::Headers headers{{"Accept", "application/json"}};
        auto delay = options.backoff;
        for (int attempt = 0;; ++attempt) {
          auto res = client.Post(ep.path, headers, params);
          const bool ok = res && res->status >= 200 && res->status < 300;
          if (ok) {
            results[i] = parse_annotation(res->body, node.node_id, options.confidence_threshold);
            break;
          }
          if (attempt >= options.max_retries) {
            const std::string status =
                res ? std::to_string(res->status) : httplib::to_string(res.error());
            throw RemoteError("annotation of '" + node.label + "' failed with status " + status);
          }
          ++retries;
          spdlog::debug("retrying annotation of '{}' in {} ms", node.label, delay.count());
          std::this_thread::sleep_for(delay);
          delay *= 2;
        }
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };

  const int n_threads = std::max(1, std::min<int>(options.in_flight, static_cast<int>(n)));
  std::vector<std::thread> threads;
  for (int t = 1; t < n_threads; ++t) threads.emplace_back(worker);
  worker();
  for (auto& t : threads) t.join();

  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  RemoteLinkResult out;
  for (auto& r : results) {
    if (r) out.links.push_back(std::move(*r));
  }
  out.retries = retries.load();
  return out;
}

DocGraph attach_links(const DocGraph& g, const std::vector<EntityLink>& links) {
  DocGraph out = g;
  for (const auto& l : links) {
    if (l.node_id < 0 || l.node_id >= static_cast<int>(out.nodes.size())) {
      throw ValidationError("link for unknown node " + std::to_string(l.node_id) + " in '" +
                            g.doc_id + "'");
    }
    out.nodes[l.node_id].entity_uri = l.uri;
  }
  return out;
}

void save_links(const LinksByDoc& links, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write links " + path.string());
  for (const auto& [doc, list] : links) {
    for (const auto& l : list) {
      out << json{{"doc", doc}, {"node", l.node_id}, {"uri", l.uri}, {"confidence", l.confidence}}
                 .dump()
          << '\n';
    }
  }
}

LinksByDoc load_links(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open links " + path.string());
  LinksByDoc out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    try {
      const auto j = json::parse(line);
      EntityLink l{j.at("node").get<int>(), j.at("uri").get<std::string>(),
                   j.at("confidence").get<double>()};
      if (l.uri.empty() || l.confidence < 0.0 || l.confidence > 1.0) {
        throw ValidationError("invalid link at line " + std::to_string(line_no));
      }
      out[j.at("doc").get<std::string>()].push_back(std::move(l));
    } catch (const json::exception& e) {
      throw ParseError(path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

}  // namespace tegra
