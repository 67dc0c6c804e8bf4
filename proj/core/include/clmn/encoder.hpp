// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "clmn/embeddings.hpp"
#include "clmn/tensor.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace clmn::embed {

enum class EncoderKind { kStaticLookup, kSyntheticContextual };

/// Stand-in for a pretrained contextual encoder. The synthetic-contextual
/// kind mixes each token's static vector with the mean of its immediate
/// neighbours, so the same word gets different vectors in different contexts:
///   row_i = (1 - lambda) e_i + lambda * mean(e_{i-1}, e_{i+1})
struct EncoderSpec {
  EncoderKind kind = EncoderKind::kSyntheticContextual;
  std::size_t dim = 300;
  std::uint64_t seed = 0;
  double lambda = 0.5;
};

/// Per-token representations of one text.
struct ContextualMatrix {
  std::vector<std::string> tokens;
  nn::Tensor reps;  // tokens.size() x dim
};

/// Deterministic unit-norm vector for a word missing from the table. Depends
/// only on (word, seed, dim).
Eigen::RowVectorXd oov_vector(const std::string& word, std::uint64_t seed, std::size_t dim);

/// Throws ContractError for an empty token list and DimensionError when the
/// spec and table dimensions disagree.
ContextualMatrix encode(const std::vector<std::string>& tokens, const EncoderSpec& spec,
                        const EmbeddingTable& table);

/// Averages each word's contextual rows over every occurrence in the corpus.
/// Words are emitted in order of first occurrence; absent words are omitted.
EmbeddingTable compute_anchors(const std::vector<std::vector<std::string>>& corpus,
                               const EncoderSpec& spec, const EmbeddingTable& table);

}  // namespace clmn::embed
