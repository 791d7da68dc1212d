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

#include "tegra/embedding.hpp"

#include <charconv>
#include <fstream>

#include "tegra/error.hpp"
#include "tegra/text.hpp"

namespace tegra {
namespace {

bool parse_double(std::string_view s, double& out) {
  const auto res = std::from_chars(s.data(), s.data() + s.size(), out);
  return res.ec == std::errc() && res.ptr == s.data() + s.size();
}

bool is_integer(std::string_view s) {
  if (s.empty()) return false;
  for (char c : s) {
    if (c < '0' || c > '9') return false;
  }
  return true;
}

void write_double(std::ostream& out, double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  out.write(buf, res.ptr - buf);
}

// Parses fields[first..] into a d-vector or throws FormatError.
Eigen::VectorXd parse_row(const std::vector<std::string>& fields, std::size_t first, int dim,
                          const std::string& where) {
  if (fields.size() - first != static_cast<std::size_t>(dim)) {
    throw FormatError(where + ": expected " + std::to_string(dim) + " values, got " +
                      std::to_string(fields.size() - first));
  }
  Eigen::VectorXd v(dim);
  for (int k = 0; k < dim; ++k) {
    if (!parse_double(fields[first + k], v[k])) {
      throw FormatError(where + ": bad number '" + fields[first + k] + "'");
    }
  }
  return v;
}

}  // namespace

WordVectorTable::WordVectorTable(int dim) : dim_(dim) {
  if (dim < 1) throw ValidationError("word vector dimension must be >= 1");
}

bool WordVectorTable::add(std::string_view token, const Eigen::VectorXd& v) {
  if (v.size() != dim_) throw ShapeError("word vector has wrong dimension");
  std::string key = to_lower(token);
  if (index_.count(key)) return false;
  index_.emplace(key, tokens_.size());
  tokens_.push_back(std::move(key));
  data_.insert(data_.end(), v.data(), v.data() + dim_);
  return true;
}

const double* WordVectorTable::find(std::string_view token) const {
  auto it = index_.find(std::string(token));
  return it == index_.end() ? nullptr : data_.data() + it->second * dim_;
}

Eigen::Map<const Eigen::VectorXd> WordVectorTable::row(std::size_t i) const {
  return Eigen::Map<const Eigen::VectorXd>(data_.data() + i * dim_, dim_);
}

WordVectorTable load_vectors(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open word vectors " + path.string());
  WordVectorTable table;
  int dim = 0;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto fields = split_whitespace(line);
    if (fields.empty()) continue;
    const std::string where = path.string() + ":" + std::to_string(line_no);
    if (dim == 0) {
      if (fields.size() == 2 && is_integer(fields[0]) && is_integer(fields[1])) {
        dim = std::stoi(fields[1]);
        table = WordVectorTable(dim);
        continue;
      }
      dim = static_cast<int>(fields.size()) - 1;
      table = WordVectorTable(dim);
    }
    table.add(fields[0], parse_row(fields, 1, dim, where));
  }
  if (dim == 0) throw FormatError("word vector file " + path.string() + " is empty");
  return table;
}

void save_vectors(const WordVectorTable& table, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write word vectors " + path.string());
  out << table.size() << ' ' << table.dim() << '\n';
  for (std::size_t i = 0; i < table.size(); ++i) {
    out << table.tokens()[i];
    const auto v = table.row(i);
    for (int k = 0; k < table.dim(); ++k) {
      out << ' ';
      write_double(out, v[k]);
    }
    out << '\n';
  }
}

Eigen::VectorXd embed_phrase(std::string_view phrase, const WordVectorTable& table) {
  Eigen::VectorXd sum = Eigen::VectorXd::Zero(table.dim());
  int known = 0;
  for (const auto& tok : tokenize(phrase)) {
    if (const double* v = table.find(tok)) {
      sum += Eigen::Map<const Eigen::VectorXd>(v, table.dim());
      ++known;
    }
  }
  if (known > 0) sum /= static_cast<double>(known);
  return sum;
}

Eigen::VectorXd embed_triple(const Triple& t, const WordVectorTable& table) {
  return (embed_phrase(t.subject, table) + embed_phrase(t.predicate, table) +
          embed_phrase(t.object, table)) /
         3.0;
}

const Eigen::VectorXd& DocEmbeddingStore::at(const std::string& doc_id) const {
  auto it = vectors_.find(doc_id);
  if (it == vectors_.end()) {
    throw LookupError("document '" + doc_id + "' has no stored embedding");
  }
  return it->second;
}

void DocEmbeddingStore::add(const std::string& doc_id, Eigen::VectorXd v) {
  if (dim_ == 0) dim_ = static_cast<int>(v.size());
  if (v.size() != dim_) throw ShapeError("document embedding has wrong dimension");
  if (!vectors_.emplace(doc_id, std::move(v)).second) {
    throw ValidationError("duplicate document embedding for '" + doc_id + "'");
  }
}

DocEmbeddingStore load_doc_embeddings(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open document embeddings " + path.string());
  std::string line;
  if (!std::getline(in, line) || trim(line).substr(0, 4) != "dim=") {
    throw FormatError(path.string() + ":1: expected header 'dim=<d>'");
  }
  DocEmbeddingStore store;
  const auto header = trim(line).substr(4);
  if (!is_integer(header) || std::stoi(std::string(header)) < 1) {
    throw FormatError(path.string() + ":1: bad dimension '" + std::string(header) + "'");
  }
  store.dim_ = std::stoi(std::string(header));
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const std::string where = path.string() + ":" + std::to_string(line_no);
    const auto tab = line.find('\t');
    if (tab == std::string::npos) throw FormatError(where + ": expected doc_id<TAB>values");
    const auto fields = split_whitespace(std::string_view(line).substr(tab + 1));
    auto v = parse_row(fields, 0, store.dim_, where);
    store.add(line.substr(0, tab), std::move(v));
  }
  return store;
}

void save_doc_embeddings(const DocEmbeddingStore& store, const std::vector<std::string>& order,
                         const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write document embeddings " + path.string());
  out << "dim=" << store.dim() << '\n';
  for (const auto& id : order) {
    out << id << '\t';
    const auto& v = store.at(id);
    for (Eigen::Index k = 0; k < v.size(); ++k) {
      if (k) out << ' ';
      write_double(out, v[k]);
    }
    out << '\n';
  }
}

Eigen::VectorXd embed_text(const Document& doc, const WordVectorTable& table) {
  return embed_phrase(doc.text, table);
}

Eigen::VectorXd embed_text(const Document& doc, const DocEmbeddingStore& store) {
  return store.at(doc.id);
}

Eigen::VectorXd TextEncoder::encode(const Document& doc) const {
  return store_ ? embed_text(doc, *store_) : embed_text(doc, *table_);
}

int TextEncoder::dim() const { return store_ ? store_->dim() : table_->dim(); }

}  // namespace tegra
