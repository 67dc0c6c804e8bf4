// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "clmn/embeddings.hpp"
#include "clmn/encoder.hpp"
#include "clmn/tensor.hpp"

#include <string>
#include <utility>
#include <vector>

namespace clmn::align {

/// ch2en maps source-language rows into the target space, en2ch the reverse.
enum class Direction { kCh2En, kEn2Ch };

std::string to_string(Direction d);
Direction direction_from_string(const std::string& s);

/// Square bilingual mapping applied to row vectors as x * W, together with
/// the strength of the orthogonality retraction.
class MappingMatrix {
 public:
  /// Throws DimensionError for non-square W, ContractError for beta outside (0, 0.5).
  MappingMatrix(nn::Tensor w, Direction direction, double beta = 0.01);

  static MappingMatrix identity(std::size_t dim, Direction direction, double beta = 0.01);

  const nn::Tensor& weight() const { return w_; }
  /// Trainable storage; the training loop binds this tensor as a parameter.
  nn::Tensor& weight() { return w_; }
  std::size_t dim() const { return static_cast<std::size_t>(w_.rows()); }
  Direction direction() const { return direction_; }
  double beta() const { return beta_; }

 private:
  nn::Tensor w_;
  Direction direction_;
  double beta_;
};

struct SeedLexicon {
  std::vector<std::pair<std::string, std::string>> pairs;

  SeedLexicon reversed() const;
  std::size_t size() const { return pairs.size(); }
  bool empty() const { return pairs.empty(); }
};

/// || W W^T - I ||_F. Throws DimensionError for non-square input.
double orthogonality_error(const nn::Mat& w);

/// One application of W <- (1 + beta) W - beta (W W^T) W.
void retract_in_place(nn::Mat& w, double beta);
MappingMatrix orthogonal_retraction(const MappingMatrix& m);

struct ProcrustesResult {
  MappingMatrix mapping;
  std::vector<std::string> warnings;
};

/// Orthogonal W minimising || X W - Y ||_F, where X and Y stack the anchor
/// vectors of the lexicon pairs, via the SVD of X^T Y. Warns when the
/// lexicon is smaller than the dimension or X^T Y is rank deficient.
/// Throws LookupError naming any unresolvable word.
ProcrustesResult procrustes_init(const embed::EmbeddingTable& src_anchors,
                                 const embed::EmbeddingTable& tgt_anchors,
                                 const SeedLexicon& lexicon, Direction direction,
                                 double beta = 0.01);

/// Right-multiplies every row by W; tokens are preserved.
embed::ContextualMatrix map_reps(const MappingMatrix& m, const embed::ContextualMatrix& reps);

struct CslsResult {
  SeedLexicon lexicon;
  std::vector<std::string> warnings;
};

/// Induces a translation for every source word with cross-domain similarity
/// local scaling: argmax_y 2 cos(Wx, y) - r_T(Wx) - r_S(y), where r_T and r_S
/// are mean cosines to the k nearest neighbours in the other space. Ties go
/// to the lexicographically smaller target; output is sorted by source word.
CslsResult csls_lexicon(const MappingMatrix& m, const embed::EmbeddingTable& src,
                        const embed::EmbeddingTable& tgt, std::size_t k = 10);

/// Fraction of gold pairs whose source word is translated to its gold target.
double lexicon_precision(const SeedLexicon& induced, const SeedLexicon& gold);

struct LexiconSplit {
  SeedLexicon seed;
  SeedLexicon heldout;
};
/// Seeded shuffle, then the first round(|lex| * (1 - heldout_fraction))
/// pairs become the seed part. Both parts keep the input's relative order.
LexiconSplit split_lexicon(const SeedLexicon& lex, double heldout_fraction, std::uint64_t seed);

/// Restricts a table to the given words (in that order); missing words are skipped.
embed::EmbeddingTable subset_table(const embed::EmbeddingTable& table,
                                   const std::vector<std::string>& words);

// Lexicon TSV: one "source<TAB>target" pair per line.
SeedLexicon load_lexicon(const std::string& path);
void save_lexicon(const SeedLexicon& lex, const std::string& path);

// Mapping checkpoint: embedding text format with words "row_0".."row_{d-1}".
MappingMatrix load_mapping(const std::string& path, Direction direction, double beta = 0.01);
void save_mapping(const MappingMatrix& m, const std::string& path);
embed::EmbeddingTable mapping_to_table(const nn::Mat& w);

}  // namespace clmn::align
