// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "clmn/tensor.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

namespace clmn::embed {

/// Word -> dense vector map for one language space. Rows keep insertion order.
class EmbeddingTable {
 public:
  explicit EmbeddingTable(std::size_t dim, std::string language = {});

  /// Throws DimensionError on a wrong-length vector, ContractError on a
  /// duplicate word and NumericError on non-finite values.
  void add(const std::string& word, std::span<const double> vec);

  std::optional<std::size_t> find(const std::string& word) const;
  bool contains(const std::string& word) const { return index_.count(word) != 0; }

  Eigen::Map<const Eigen::RowVectorXd> row(std::size_t i) const;
  /// Throws LookupError if the word is absent.
  Eigen::Map<const Eigen::RowVectorXd> vector(const std::string& word) const;
  /// All rows stacked, one per word in insertion order.
  Eigen::Map<const nn::Mat> matrix() const;

  const std::vector<std::string>& words() const { return words_; }
  std::size_t size() const { return words_.size(); }
  std::size_t dim() const { return dim_; }
  const std::string& language() const { return language_; }
  void set_language(std::string l) { language_ = std::move(l); }

 private:
  std::size_t dim_;
  std::string language_;
  std::vector<std::string> words_;
  std::vector<double> data_;
  std::unordered_map<std::string, std::size_t> index_;
};

// Text format: first line "<count> <dim>", then one "<word> <v1> ... <v_dim>"
// line per word. Values are written in shortest round-trip form.
EmbeddingTable read_embeddings(std::istream& in, std::string language = {});
EmbeddingTable load_embeddings(const std::string& path, std::string language = {});
void write_embeddings(const EmbeddingTable& table, std::ostream& out);
void save_embeddings(const EmbeddingTable& table, const std::string& path);

/// Shortest decimal representation that parses back to exactly `v`.
std::string format_double(double v);

}  // namespace clmn::embed
