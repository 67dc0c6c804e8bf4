// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "clmn/alignment.hpp"
#include "clmn/dataset.hpp"
#include "clmn/embeddings.hpp"

#include <string>
#include <unordered_map>
#include <vector>

namespace clmn::baselines {

/// Natural-log inverse document frequency, idf(w) = ln(N / df(w)).
class IdfTable {
 public:
  IdfTable() = default;
  IdfTable(std::unordered_map<std::string, double> weights, std::size_t doc_count);

  /// Unseen words are treated as df = 1, i.e. the maximum idf ln(N).
  double weight(const std::string& word) const;
  std::size_t doc_count() const { return doc_count_; }
  std::size_t size() const { return weights_.size(); }

 private:
  std::unordered_map<std::string, double> weights_;
  std::size_t doc_count_ = 0;
};

/// Throws ContractError on an empty corpus.
IdfTable compute_idf(const std::vector<data::Tokens>& corpus);

/// Per-language idf tables.
struct BilingualIdf {
  IdfTable source;
  IdfTable target;
};

/// Cosine between the (idf-weighted) sums of word vectors of the two texts.
/// Source vectors are mapped into the target space by `mapping` first. OOV
/// words are skipped; an empty effective text scores 0.
double bwe_agg_score(const data::Tokens& attrs, const data::Tokens& desc,
                     const embed::EmbeddingTable& src_emb, const nn::Mat& mapping,
                     const embed::EmbeddingTable& tgt_emb, const BilingualIdf* idf = nullptr);

/// Same as bwe_agg_score with a pre-mapped source table.
double bwe_agg_score(const data::Tokens& attrs, const data::Tokens& desc,
                     const embed::EmbeddingTable& src_emb_mapped,
                     const embed::EmbeddingTable& tgt_emb, const BilingualIdf* idf = nullptr);

/// Term-by-term query translation: each attribute is replaced by its lexicon
/// translation (untranslatable terms dropped) and the translated query is
/// scored against the description with idf-weighted aggregation cosine in
/// the target space. `empty_queries` counts queries that translated to nothing.
class TbtqtScorer {
 public:
  TbtqtScorer(const align::SeedLexicon& lexicon, const embed::EmbeddingTable& tgt_emb,
              const IdfTable& tgt_idf);

  double score(const data::Tokens& attrs, const data::Tokens& desc) const;
  data::Tokens translate(const data::Tokens& attrs) const;
  std::size_t empty_queries() const { return empty_queries_; }

 private:
  std::unordered_map<std::string, std::string> table_;
  const embed::EmbeddingTable* tgt_;
  const IdfTable* idf_;
  mutable std::size_t empty_queries_ = 0;
};

double tbtqt_score(const data::Tokens& attrs, const data::Tokens& desc,
                   const align::SeedLexicon& lexicon, const embed::EmbeddingTable& tgt_emb,
                   const IdfTable& tgt_idf);

/// Copy of `table` with every row right-multiplied by `mapping`.
embed::EmbeddingTable map_table(const embed::EmbeddingTable& table, const nn::Mat& mapping);

}  // namespace clmn::baselines
