// SPDX-License-Identifier: Apache-2.0
#include "clmn/pipeline.hpp"

#include "clmn/errors.hpp"
#include "clmn/random.hpp"

#include <json.hpp>

namespace clmn::pipeline {

SyntheticBundle make_synthetic(const data::SynthConfig& cfg, std::optional<SplitSizes> sizes,
                               double heldout_fraction) {
  SyntheticBundle b;
  b.synth = data::generate_synthetic(cfg);
  const std::uint64_t split_seed = derive_seed(cfg.seed, 101);
  b.splits = sizes ? data::split(b.synth.pairs, sizes->train, sizes->valid, sizes->test, split_seed)
                   : data::split_default(b.synth.pairs, split_seed);
  b.lexicon = align::split_lexicon(b.synth.gold_lexicon, heldout_fraction,
                                   derive_seed(cfg.seed, 102));
  return b;
}

AnchorTables compute_anchor_tables(const std::vector<data::Tokens>& src_corpus,
                                   const std::vector<data::Tokens>& tgt_corpus,
                                   const embed::EncoderSpec& spec,
                                   const embed::EmbeddingTable& src_static,
                                   const embed::EmbeddingTable& tgt_static) {
  AnchorTables t;
  t.source = embed::compute_anchors(src_corpus, spec, src_static);
  t.target = embed::compute_anchors(tgt_corpus, spec, tgt_static);
  t.source.set_language(src_static.language());
  t.target.set_language(tgt_static.language());
  return t;
}

AlignmentOutcome align_both(const embed::EmbeddingTable& src_anchors,
                            const embed::EmbeddingTable& tgt_anchors,
                            const align::SeedLexicon& seed, const align::SeedLexicon& heldout,
                            double beta, std::size_t csls_k) {
  if (src_anchors.dim() != tgt_anchors.dim()) {
    throw DimensionError("anchor tables have dims " + std::to_string(src_anchors.dim()) + " and " +
                         std::to_string(tgt_anchors.dim()));
  }
  auto fwd = align::procrustes_init(src_anchors, tgt_anchors, seed, align::Direction::kCh2En, beta);
  auto bwd = align::procrustes_init(tgt_anchors, src_anchors, seed.reversed(),
                                    align::Direction::kEn2Ch, beta);
  AlignmentOutcome out{fwd.mapping, bwd.mapping, std::nullopt, std::nullopt, {}};
  for (auto& w : fwd.warnings) out.warnings.push_back("ch2en: " + w);
  for (auto& w : bwd.warnings) out.warnings.push_back("en2ch: " + w);
  if (!heldout.empty()) {
    auto c1 = align::csls_lexicon(out.ch2en, src_anchors, tgt_anchors, csls_k);
    auto c2 = align::csls_lexicon(out.en2ch, tgt_anchors, src_anchors, csls_k);
    for (auto& w : c1.warnings) out.warnings.push_back("csls ch2en: " + w);
    for (auto& w : c2.warnings) out.warnings.push_back("csls en2ch: " + w);
    out.precision_ch2en = align::lexicon_precision(c1.lexicon, heldout);
    out.precision_en2ch = align::lexicon_precision(c2.lexicon, heldout.reversed());
  }
  return out;
}

std::string alignment_report_json(const AlignmentOutcome& a, std::size_t seed_pairs,
                                  std::size_t heldout_pairs) {
  nlohmann::ordered_json j;
  j["ortho_err_ch2en"] = align::orthogonality_error(a.ch2en.weight().mat());
  j["ortho_err_en2ch"] = align::orthogonality_error(a.en2ch.weight().mat());
  j["precision_at_1_ch2en"] =
      a.precision_ch2en ? nlohmann::ordered_json(*a.precision_ch2en) : nlohmann::ordered_json();
  j["precision_at_1_en2ch"] =
      a.precision_en2ch ? nlohmann::ordered_json(*a.precision_en2ch) : nlohmann::ordered_json();
  j["seed_pairs"] = seed_pairs;
  j["heldout_pairs"] = heldout_pairs;
  j["warnings"] = a.warnings;
  return j.dump(2) + "\n";
}

BaselineMethod baseline_from_string(const std::string& s) {
  if (s == "bwe-agg") return BaselineMethod::kBweAgg;
  if (s == "bwe-idf") return BaselineMethod::kBweIdf;
  if (s == "tbtqt") return BaselineMethod::kTbtqt;
  throw ContractError("unknown baseline '" + s + "' (expected bwe-agg|bwe-idf|tbtqt)");
}

std::string to_string(BaselineMethod m) {
  switch (m) {
    case BaselineMethod::kBweAgg: return "bwe-agg";
    case BaselineMethod::kBweIdf: return "bwe-idf";
    case BaselineMethod::kTbtqt: return "tbtqt";
  }
  return "bwe-agg";
}

BaselineScorer::BaselineScorer(BaselineMethod method, const embed::EmbeddingTable& src_emb,
                               const embed::EmbeddingTable& tgt_emb,
                               const align::MappingMatrix& ch2en,
                               const std::vector<data::Tokens>* src_corpus,
                               const std::vector<data::Tokens>* tgt_corpus,
                               std::optional<align::SeedLexicon> lexicon, std::size_t csls_k)
    : method_(method), tgt_(&tgt_emb) {
  if (method != BaselineMethod::kBweAgg) {
    if (!src_corpus || !tgt_corpus) {
      throw ContractError(to_string(method) + " needs both monolingual corpora for idf");
    }
    idf_ = std::make_unique<baselines::BilingualIdf>(
        baselines::BilingualIdf{baselines::compute_idf(*src_corpus), baselines::compute_idf(*tgt_corpus)});
  }
  if (method == BaselineMethod::kTbtqt) {
    lexicon_ = lexicon ? std::move(*lexicon)
                       : align::csls_lexicon(ch2en, src_emb, tgt_emb, csls_k).lexicon;
    tbtqt_ = std::make_unique<baselines::TbtqtScorer>(lexicon_, tgt_emb, idf_->target);
  } else {
    src_mapped_ = baselines::map_table(src_emb, ch2en.weight().mat());
  }
}

eval::PoolScorer BaselineScorer::scorer() const {
  return [this](const data::Tokens& attrs, const std::vector<data::Tokens>& cands) {
    std::vector<double> out;
    out.reserve(cands.size());
    for (const auto& d : cands) {
      switch (method_) {
        case BaselineMethod::kBweAgg:
          out.push_back(baselines::bwe_agg_score(attrs, d, src_mapped_, *tgt_));
          break;
        case BaselineMethod::kBweIdf:
          out.push_back(baselines::bwe_agg_score(attrs, d, src_mapped_, *tgt_, idf_.get()));
          break;
        case BaselineMethod::kTbtqt:
          out.push_back(tbtqt_->score(attrs, d));
          break;
      }
    }
    return out;
  };
}

}  // namespace clmn::pipeline
