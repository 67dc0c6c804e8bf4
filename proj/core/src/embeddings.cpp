// SPDX-License-Identifier: Apache-2.0
#include "clmn/embeddings.hpp"

#include "clmn/errors.hpp"
#include "clmn/io_util.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace clmn::embed {

EmbeddingTable::EmbeddingTable(std::size_t dim, std::string language)
    : dim_(dim), language_(std::move(language)) {
  if (dim_ == 0) throw ContractError("embedding dimension must be positive");
}

void EmbeddingTable::add(const std::string& word, std::span<const double> vec) {
  if (vec.size() != dim_) {
    throw DimensionError("embedding for '" + word + "' has " + std::to_string(vec.size()) +
                         " values, table dim is " + std::to_string(dim_));
  }
  if (index_.count(word)) throw ContractError("duplicate word in embedding table: " + word);
  for (double v : vec) {
    if (!std::isfinite(v)) throw NumericError("non-finite embedding value for '" + word + "'");
  }
  index_.emplace(word, words_.size());
  words_.push_back(word);
  data_.insert(data_.end(), vec.begin(), vec.end());
}

std::optional<std::size_t> EmbeddingTable::find(const std::string& word) const {
  auto it = index_.find(word);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

Eigen::Map<const Eigen::RowVectorXd> EmbeddingTable::row(std::size_t i) const {
  return {data_.data() + i * dim_, static_cast<Eigen::Index>(dim_)};
}

Eigen::Map<const Eigen::RowVectorXd> EmbeddingTable::vector(const std::string& word) const {
  auto i = find(word);
  if (!i) throw LookupError("word not in embedding table: " + word);
  return row(*i);
}

Eigen::Map<const nn::Mat> EmbeddingTable::matrix() const {
  return {data_.data(), static_cast<Eigen::Index>(words_.size()),
          static_cast<Eigen::Index>(dim_)};
}

std::string format_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

namespace {

bool parse_double(std::string_view tok, double& out) {
  auto res = std::from_chars(tok.data(), tok.data() + tok.size(), out);
  return res.ec == std::errc() && res.ptr == tok.data() + tok.size();
}

std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> toks;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
    std::size_t j = i;
    while (j < line.size() && line[j] != ' ' && line[j] != '\t' && line[j] != '\r') ++j;
    if (j > i) toks.push_back(line.substr(i, j - i));
    i = j;
  }
  return toks;
}

}  // namespace

EmbeddingTable read_embeddings(std::istream& in, std::string language) {
  std::string line;
  if (!std::getline(in, line)) throw ParseError("line 1: missing '<count> <dim>' header");
  auto head = split_ws(line);
  std::size_t count = 0;
  std::size_t dim = 0;
  auto parse_size = [](std::string_view t, std::size_t& v) {
    auto r = std::from_chars(t.data(), t.data() + t.size(), v);
    return r.ec == std::errc() && r.ptr == t.data() + t.size();
  };
  if (head.size() != 2 || !parse_size(head[0], count) || !parse_size(head[1], dim) || dim == 0) {
    throw ParseError("line 1: expected '<count> <dim>' header, got '" + line + "'");
  }

  EmbeddingTable table(dim, std::move(language));
  std::vector<double> vec(dim);
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    auto toks = split_ws(line);
    if (toks.empty()) continue;
    if (toks.size() != dim + 1) {
      throw ParseError("line " + std::to_string(lineno) + ": expected word and " +
                       std::to_string(dim) + " values, got " + std::to_string(toks.size() - 1));
    }
    for (std::size_t k = 0; k < dim; ++k) {
      if (!parse_double(toks[k + 1], vec[k])) {
        throw ParseError("line " + std::to_string(lineno) + ": bad number '" +
                         std::string(toks[k + 1]) + "'");
      }
    }
    const std::string word(toks[0]);
    if (table.contains(word)) {
      throw ParseError("line " + std::to_string(lineno) + ": duplicate word '" + word + "'");
    }
    try {
      table.add(word, vec);
    } catch (const NumericError& e) {
      throw ParseError("line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  if (table.size() != count) {
    throw ParseError("header declares " + std::to_string(count) + " words but file has " +
                     std::to_string(table.size()));
  }
  return table;
}

EmbeddingTable load_embeddings(const std::string& path, std::string language) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open embedding file: " + path);
  try {
    return read_embeddings(in, std::move(language));
  } catch (const ParseError& e) {
    throw ParseError(path + ": " + e.what());
  }
}

void write_embeddings(const EmbeddingTable& table, std::ostream& out) {
  out << table.size() << ' ' << table.dim() << '\n';
  for (std::size_t i = 0; i < table.size(); ++i) {
    out << table.words()[i];
    auto r = table.row(i);
    for (Eigen::Index k = 0; k < r.size(); ++k) out << ' ' << format_double(r(k));
    out << '\n';
  }
}

void save_embeddings(const EmbeddingTable& table, const std::string& path) {
  std::ostringstream os;
  write_embeddings(table, os);
  io::write_file_atomic(path, os.str());
}

}  // namespace clmn::embed
