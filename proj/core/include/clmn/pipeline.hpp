// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "clmn/alignment.hpp"
#include "clmn/baselines.hpp"
#include "clmn/dataset.hpp"
#include "clmn/embeddings.hpp"
#include "clmn/encoder.hpp"
#include "clmn/evaluation.hpp"
#include "clmn/synthetic.hpp"

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

// End-to-end steps shared by the command-line tool and the acceptance suite.
namespace clmn::pipeline {

struct SplitSizes {
  std::size_t train = 0;
  std::size_t valid = 0;
  std::size_t test = 0;
};

/// Synthetic corpus plus its train/valid/test partition and a seed/held-out
/// partition of the gold lexicon.
struct SyntheticBundle {
  data::SynthData synth;
  data::Splits splits;
  align::LexiconSplit lexicon;
};

/// `sizes` defaults to the 10500 : 1000 : 2000 proportion.
SyntheticBundle make_synthetic(const data::SynthConfig& cfg,
                               std::optional<SplitSizes> sizes = std::nullopt,
                               double heldout_fraction = 0.2);

struct AnchorTables {
  embed::EmbeddingTable source{1};
  embed::EmbeddingTable target{1};
};
AnchorTables compute_anchor_tables(const std::vector<data::Tokens>& src_corpus,
                                   const std::vector<data::Tokens>& tgt_corpus,
                                   const embed::EncoderSpec& spec,
                                   const embed::EmbeddingTable& src_static,
                                   const embed::EmbeddingTable& tgt_static);

struct AlignmentOutcome {
  align::MappingMatrix ch2en;
  align::MappingMatrix en2ch;
  /// CSLS precision@1 on the held-out pairs; empty without held-out pairs.
  std::optional<double> precision_ch2en;
  std::optional<double> precision_en2ch;
  std::vector<std::string> warnings;
};

/// Procrustes in both directions from the seed lexicon, then CSLS lexicon
/// induction scored against the held-out pairs.
AlignmentOutcome align_both(const embed::EmbeddingTable& src_anchors,
                            const embed::EmbeddingTable& tgt_anchors,
                            const align::SeedLexicon& seed, const align::SeedLexicon& heldout,
                            double beta = 0.01, std::size_t csls_k = 10);

std::string alignment_report_json(const AlignmentOutcome& a, std::size_t seed_pairs,
                                  std::size_t heldout_pairs);

enum class BaselineMethod { kBweAgg, kBweIdf, kTbtqt };
BaselineMethod baseline_from_string(const std::string& s);
std::string to_string(BaselineMethod m);

/// Owns everything a baseline scorer refers to.
class BaselineScorer {
 public:
  /// bwe-agg and bwe-idf score with the source table mapped by `ch2en`.
  /// tbtqt translates with `lexicon`, or, when none is given, with a lexicon
  /// induced by CSLS from `ch2en`. idf needs both corpora.
  BaselineScorer(BaselineMethod method, const embed::EmbeddingTable& src_emb,
                 const embed::EmbeddingTable& tgt_emb, const align::MappingMatrix& ch2en,
                 const std::vector<data::Tokens>* src_corpus,
                 const std::vector<data::Tokens>* tgt_corpus,
                 std::optional<align::SeedLexicon> lexicon = std::nullopt,
                 std::size_t csls_k = 10);

  eval::PoolScorer scorer() const;
  const align::SeedLexicon& lexicon() const { return lexicon_; }

 private:
  BaselineMethod method_;
  embed::EmbeddingTable src_mapped_{1};
  const embed::EmbeddingTable* tgt_;
  std::unique_ptr<baselines::BilingualIdf> idf_;
  align::SeedLexicon lexicon_;
  std::unique_ptr<baselines::TbtqtScorer> tbtqt_;
};

}  // namespace clmn::pipeline
