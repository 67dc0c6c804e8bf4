// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "clmn/alignment.hpp"
#include "clmn/dataset.hpp"
#include "clmn/embeddings.hpp"

#include <cstdint>
#include <vector>

namespace clmn::data {

/// Planted bilingual corpus. Source word s_i translates to target word t_i;
/// target vectors are source vectors rotated by a random orthogonal R plus
/// noise. Filler words ("f...") exist only in the target language.
struct SynthConfig {
  std::size_t src_vocab = 2000;
  std::size_t tgt_vocab = 2000;
  std::size_t filler_vocab = 100;
  std::size_t pair_count = 13500;
  double attr_len_mean = 17.2;  // clamped to [3, 50]
  double desc_len_mean = 47.3;  // clamped to [5, 100]
  /// Probability that an attribute is translated into the description.
  double attr_keep = 0.5;
  /// Fraction of description tokens that are fillers.
  double noise_rate = 0.3;
  /// Exponent of the Zipf distribution word frequencies follow.
  double zipf_exponent = 1.0;
  std::size_t dim = 300;
  /// Norm of every sampled static vector.
  double embed_norm = 1.0;
  /// Norm of the noise added to each rotated target vector, relative to embed_norm.
  double embed_noise = 0.01;
  /// Documents per language in the monolingual corpora.
  std::size_t corpus_docs = 13500;
  std::uint64_t rotation_seed = 1;
  std::uint64_t seed = 0;
};

struct SynthData {
  embed::EmbeddingTable src_static{1};
  embed::EmbeddingTable tgt_static{1};
  std::vector<Tokens> src_corpus;
  std::vector<Tokens> tgt_corpus;
  std::vector<PairExample> pairs;
  /// Per pair, per description token: true for a gold translation of one of
  /// the pair's attributes, false for a filler.
  std::vector<std::vector<bool>> desc_is_translation;
  align::SeedLexicon gold_lexicon;
  nn::Mat rotation;
};

/// Throws ContractError for vocab < 50, pair_count < 10 or noise_rate
/// outside [0, 1).
SynthData generate_synthetic(const SynthConfig& cfg);

/// Haar-distributed random orthogonal matrix (QR of a Gaussian matrix with
/// sign correction).
nn::Mat random_orthogonal(std::size_t dim, std::uint64_t seed);

std::string source_word(std::size_t i, std::size_t vocab);
std::string target_word(std::size_t i, std::size_t vocab);
std::string filler_word(std::size_t i, std::size_t vocab);

}  // namespace clmn::data
