// SPDX-License-Identifier: Apache-2.0
#include "clmn/dataset.hpp"

#include "clmn/errors.hpp"
#include "clmn/io_util.hpp"
#include "clmn/random.hpp"

#include <json.hpp>

#include <fstream>
#include <sstream>
#include <unordered_set>

namespace clmn::data {

using nlohmann::json;

namespace {

Tokens token_array(const json& obj, const char* field, std::size_t lineno,
                   const std::string& source) {
  auto where = [&] { return source + ": line " + std::to_string(lineno) + ": "; };
  auto it = obj.find(field);
  if (it == obj.end()) throw ParseError(where() + "missing field \"" + field + "\"");
  if (!it->is_array()) throw ParseError(where() + "field \"" + field + "\" must be an array");
  Tokens out;
  out.reserve(it->size());
  for (const auto& t : *it) {
    if (!t.is_string()) {
      throw ParseError(where() + "field \"" + field + "\" must contain only strings");
    }
    out.push_back(t.get<std::string>());
  }
  if (out.empty()) throw ParseError(where() + "field \"" + field + "\" is empty");
  return out;
}

}  // namespace

std::vector<PairExample> parse_pairs(const std::string& text, const std::string& source) {
  std::vector<PairExample> pairs;
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  std::unordered_set<std::string> seen;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    auto where = [&] { return source + ": line " + std::to_string(lineno) + ": "; };
    json obj;
    try {
      obj = json::parse(line);
    } catch (const json::parse_error& e) {
      throw ParseError(where() + "invalid JSON: " + e.what());
    }
    if (!obj.is_object()) throw ParseError(where() + "expected a JSON object");
    PairExample ex;
    auto id = obj.find("id");
    if (id == obj.end()) throw ParseError(where() + "missing field \"id\"");
    if (!id->is_string()) throw ParseError(where() + "field \"id\" must be a string");
    ex.id = id->get<std::string>();
    if (!seen.insert(ex.id).second) throw ParseError(where() + "duplicate id \"" + ex.id + "\"");
    ex.attributes = token_array(obj, "attributes", lineno, source);
    ex.description = token_array(obj, "description", lineno, source);
    auto label = obj.find("label");
    if (label == obj.end()) throw ParseError(where() + "missing field \"label\"");
    if (!label->is_number_integer() || (label->get<int>() != 0 && label->get<int>() != 1)) {
      throw ParseError(where() + "field \"label\" must be 0 or 1");
    }
    ex.label = label->get<int>();
    ex.desc_id = ex.id;
    pairs.push_back(std::move(ex));
  }
  return pairs;
}

std::vector<PairExample> load_pairs(const std::string& path) {
  return parse_pairs(io::read_file(path), path);
}

std::string format_pairs(const std::vector<PairExample>& pairs) {
  std::string out;
  for (const auto& p : pairs) {
    json obj = {{"id", p.id},
                {"attributes", p.attributes},
                {"description", p.description},
                {"label", p.label}};
    out += obj.dump();
    out += '\n';
  }
  return out;
}

void save_pairs(const std::vector<PairExample>& pairs, const std::string& path) {
  io::write_file_atomic(path, format_pairs(pairs));
}

Splits split(const std::vector<PairExample>& pairs, std::size_t train_n, std::size_t valid_n,
             std::size_t test_n, std::uint64_t seed) {
  if (train_n + valid_n + test_n > pairs.size()) {
    throw ContractError("split: requested " + std::to_string(train_n + valid_n + test_n) +
                        " pairs but only " + std::to_string(pairs.size()) + " available");
  }
  std::vector<std::size_t> order(pairs.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  Rng rng(seed);
  rng.shuffle(order);
  Splits s;
  std::size_t k = 0;
  for (std::size_t i = 0; i < train_n; ++i) s.train.push_back(pairs[order[k++]]);
  for (std::size_t i = 0; i < valid_n; ++i) s.valid.push_back(pairs[order[k++]]);
  for (std::size_t i = 0; i < test_n; ++i) s.test.push_back(pairs[order[k++]]);
  return s;
}

Splits split_default(const std::vector<PairExample>& pairs, std::uint64_t seed) {
  const std::size_t n = pairs.size();
  const std::size_t valid_n = n * 1000 / 13500;
  const std::size_t test_n = n * 2000 / 13500;
  return split(pairs, n - valid_n - test_n, valid_n, test_n, seed);
}

PairExample truncate(const PairExample& ex, std::size_t max_attr, std::size_t max_desc) {
  if (max_attr == 0 || max_desc == 0) throw ContractError("truncate: limits must be >= 1");
  PairExample out = ex;
  if (out.attributes.size() > max_attr) out.attributes.resize(max_attr);
  if (out.description.size() > max_desc) out.description.resize(max_desc);
  return out;
}

std::vector<Tokens> load_corpus(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open corpus: " + path);
  std::vector<Tokens> docs;
  std::string line;
  while (std::getline(in, line)) {
    Tokens doc;
    std::istringstream ls(line);
    std::string tok;
    while (ls >> tok) doc.push_back(tok);
    if (!doc.empty()) docs.push_back(std::move(doc));
  }
  return docs;
}

std::string format_corpus(const std::vector<Tokens>& docs) {
  std::string out;
  for (const auto& doc : docs) {
    for (std::size_t i = 0; i < doc.size(); ++i) {
      if (i) out += ' ';
      out += doc[i];
    }
    out += '\n';
  }
  return out;
}

void save_corpus(const std::vector<Tokens>& docs, const std::string& path) {
  io::write_file_atomic(path, format_corpus(docs));
}

}  // namespace clmn::data
