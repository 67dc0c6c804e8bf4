// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace clmn::data {

using Tokens = std::vector<std::string>;

/// One (attribute set, description, label) example. `desc_id` names the pair
/// the description came from; for positives it equals `id`.
struct PairExample {
  std::string id;
  Tokens attributes;
  Tokens description;
  int label = 1;
  std::string desc_id;

  bool operator==(const PairExample&) const = default;
};

// JSON-lines: {"id": str, "attributes": [str], "description": [str], "label": 0|1}
std::vector<PairExample> parse_pairs(const std::string& text, const std::string& source = "<memory>");
std::vector<PairExample> load_pairs(const std::string& path);
std::string format_pairs(const std::vector<PairExample>& pairs);
void save_pairs(const std::vector<PairExample>& pairs, const std::string& path);

struct Splits {
  std::vector<PairExample> train;
  std::vector<PairExample> valid;
  std::vector<PairExample> test;
};

/// Seeded shuffle, then contiguous slices. Throws ContractError when the
/// sizes sum past the number of pairs.
Splits split(const std::vector<PairExample>& pairs, std::size_t train_n, std::size_t valid_n,
             std::size_t test_n, std::uint64_t seed);

/// Split sizes in the 10500 : 1000 : 2000 proportion for `total` pairs.
Splits split_default(const std::vector<PairExample>& pairs, std::uint64_t seed);

/// Keeps the first max_attr attributes and first max_desc description words.
PairExample truncate(const PairExample& ex, std::size_t max_attr = 50, std::size_t max_desc = 100);

// Token-list corpus: one document per line, tokens separated by spaces.
std::vector<Tokens> load_corpus(const std::string& path);
std::string format_corpus(const std::vector<Tokens>& docs);
void save_corpus(const std::vector<Tokens>& docs, const std::string& path);

}  // namespace clmn::data
