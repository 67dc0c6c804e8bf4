// SPDX-License-Identifier: Apache-2.0
#include "clmn/baselines.hpp"

#include "clmn/errors.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_set>

namespace clmn::baselines {

IdfTable::IdfTable(std::unordered_map<std::string, double> weights, std::size_t doc_count)
    : weights_(std::move(weights)), doc_count_(doc_count) {}

double IdfTable::weight(const std::string& word) const {
  auto it = weights_.find(word);
  if (it != weights_.end()) return it->second;
  return doc_count_ > 0 ? std::log(static_cast<double>(doc_count_)) : 0.0;
}

IdfTable compute_idf(const std::vector<data::Tokens>& corpus) {
  if (corpus.empty()) throw ContractError("compute_idf: empty corpus");
  std::unordered_map<std::string, std::size_t> df;
  for (const auto& doc : corpus) {
    std::unordered_set<std::string> seen(doc.begin(), doc.end());
    for (const auto& w : seen) ++df[w];
  }
  const auto n = static_cast<double>(corpus.size());
  std::unordered_map<std::string, double> weights;
  weights.reserve(df.size());
  for (const auto& [w, c] : df) weights.emplace(w, std::log(n / static_cast<double>(c)));
  return IdfTable(std::move(weights), corpus.size());
}

namespace {

Eigen::RowVectorXd aggregate(const data::Tokens& text, const embed::EmbeddingTable& table,
                             const IdfTable* idf, bool& any) {
  Eigen::RowVectorXd acc = Eigen::RowVectorXd::Zero(static_cast<Eigen::Index>(table.dim()));
  any = false;
  for (const auto& w : text) {
    auto i = table.find(w);
    if (!i) continue;
    const double weight = idf ? idf->weight(w) : 1.0;
    acc += weight * table.row(*i);
    any = true;
  }
  return acc;
}

double cosine(const Eigen::RowVectorXd& a, const Eigen::RowVectorXd& b) {
  const double na = a.norm();
  const double nb = b.norm();
  if (na == 0.0 || nb == 0.0) return 0.0;
  return std::clamp(a.dot(b) / (na * nb), -1.0, 1.0);
}

}  // namespace

embed::EmbeddingTable map_table(const embed::EmbeddingTable& table, const nn::Mat& mapping) {
  if (static_cast<std::size_t>(mapping.rows()) != table.dim() || mapping.rows() != mapping.cols()) {
    throw DimensionError("map_table: mapping does not match table dim " +
                         std::to_string(table.dim()));
  }
  embed::EmbeddingTable out(table.dim(), table.language());
  const nn::Mat mapped = table.matrix() * mapping;
  for (std::size_t i = 0; i < table.size(); ++i) {
    Eigen::RowVectorXd r = mapped.row(static_cast<Eigen::Index>(i));
    out.add(table.words()[i], std::span<const double>(r.data(), static_cast<std::size_t>(r.size())));
  }
  return out;
}

double bwe_agg_score(const data::Tokens& attrs, const data::Tokens& desc,
                     const embed::EmbeddingTable& src_emb_mapped,
                     const embed::EmbeddingTable& tgt_emb, const BilingualIdf* idf) {
  if (src_emb_mapped.dim() != tgt_emb.dim()) {
    throw DimensionError("bwe_agg_score: source and target dims differ");
  }
  bool any_a = false;
  bool any_d = false;
  const auto qa = aggregate(attrs, src_emb_mapped, idf ? &idf->source : nullptr, any_a);
  const auto qd = aggregate(desc, tgt_emb, idf ? &idf->target : nullptr, any_d);
  if (!any_a || !any_d) return 0.0;
  return cosine(qa, qd);
}

double bwe_agg_score(const data::Tokens& attrs, const data::Tokens& desc,
                     const embed::EmbeddingTable& src_emb, const nn::Mat& mapping,
                     const embed::EmbeddingTable& tgt_emb, const BilingualIdf* idf) {
  if (static_cast<std::size_t>(mapping.rows()) != src_emb.dim()) {
    throw DimensionError("bwe_agg_score: mapping does not match source dim");
  }
  bool any_a = false;
  bool any_d = false;
  Eigen::RowVectorXd qa = aggregate(attrs, src_emb, idf ? &idf->source : nullptr, any_a);
  const auto qd = aggregate(desc, tgt_emb, idf ? &idf->target : nullptr, any_d);
  if (!any_a || !any_d) return 0.0;
  // Mapping is linear, so mapping the sum equals summing the mapped vectors.
  qa = qa * mapping;
  return cosine(qa, qd);
}

TbtqtScorer::TbtqtScorer(const align::SeedLexicon& lexicon, const embed::EmbeddingTable& tgt_emb,
                         const IdfTable& tgt_idf)
    : tgt_(&tgt_emb), idf_(&tgt_idf) {
  for (const auto& [s, t] : lexicon.pairs) table_.emplace(s, t);
}

data::Tokens TbtqtScorer::translate(const data::Tokens& attrs) const {
  data::Tokens out;
  for (const auto& a : attrs) {
    auto it = table_.find(a);
    if (it != table_.end()) out.push_back(it->second);
  }
  return out;
}

double TbtqtScorer::score(const data::Tokens& attrs, const data::Tokens& desc) const {
  const data::Tokens query = translate(attrs);
  bool any_q = false;
  bool any_d = false;
  const auto qa = aggregate(query, *tgt_, idf_, any_q);
  if (!any_q) {
    ++empty_queries_;
    return 0.0;
  }
  const auto qd = aggregate(desc, *tgt_, idf_, any_d);
  if (!any_d) return 0.0;
  return cosine(qa, qd);
}

double tbtqt_score(const data::Tokens& attrs, const data::Tokens& desc,
                   const align::SeedLexicon& lexicon, const embed::EmbeddingTable& tgt_emb,
                   const IdfTable& tgt_idf) {
  return TbtqtScorer(lexicon, tgt_emb, tgt_idf).score(attrs, desc);
}

}  // namespace clmn::baselines
