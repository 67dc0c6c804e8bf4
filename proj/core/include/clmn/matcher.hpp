// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "clmn/alignment.hpp"
#include "clmn/autodiff.hpp"
#include "clmn/encoder.hpp"
#include "clmn/gru.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace clmn::match {

struct MatchDims {
  std::size_t d_model = 300;
  std::size_t d_hidden = 300;
  std::size_t levels = 2;  // L, number of stacked attention modules
};

/// All learnable parameters of one matching model. One attention stack is
/// shared by the attribute and description sides. Parameter names:
///   stack.<l>.{self,cross}.{weight,bias}      l = 1..L
///   fuse.{weight,bias}
///   gru.{attr,desc}.<k>.{input_weight,recurrent_weight,bias}   k = 1, 2
///   output.{weight,bias}
class MatchModelParams {
 public:
  MatchModelParams() = default;
  /// Xavier-uniform matrices, GRU weights in +-1/sqrt(h), zero biases.
  static MatchModelParams init(const MatchDims& dims, std::uint64_t seed);
  /// Wraps an existing parameter set; throws if any name or shape is off.
  static MatchModelParams from_params(const MatchDims& dims, nn::ParamSet params);

  const MatchDims& dims() const { return dims_; }
  nn::ParamSet& params() { return params_; }
  const nn::ParamSet& params() const { return params_; }

  /// Width of the vector fed to the output layer: 2 sides x 2 types x L x h.
  std::size_t feature_width() const { return 4 * dims_.levels * dims_.d_hidden; }

 private:
  MatchDims dims_;
  nn::ParamSet params_;
};

/// Graph handles for one model's parameters.
struct BoundParams {
  struct Level {
    nn::Var self_weight, self_bias, cross_weight, cross_bias;
  };
  std::vector<Level> levels;
  nn::Var fuse_weight, fuse_bias;
  nn::GruWeights attr_gru[2];
  nn::GruWeights desc_gru[2];
  nn::Var output_weight, output_bias;
  MatchDims dims;
};

/// Registers every parameter on `g` as "<prefix><name>".
BoundParams bind(nn::Graph& g, const MatchModelParams& m, const std::string& prefix = {});

/// softmax(Q K^T / sqrt(d)) V with d the column count of Q.
nn::Var attention(const nn::Var& q, const nn::Var& k, const nn::Var& v);

/// Attention representations of both texts at every level. Index l-1 holds
/// level l. Level l self reps attend within the text, cross reps attend to
/// the other text; both use the level l-1 self reps (level 0 = inputs).
/// Each is followed by the level's projection with a residual connection:
///   X_l = X_{l-1} + Att(X_{l-1}, K, K) P_l + c_l
struct RepStack {
  struct Level {
    nn::Var attr_self, attr_cross, desc_self, desc_cross;
  };
  std::vector<Level> levels;
  std::size_t matrix_count() const { return 4 * levels.size(); }
};

RepStack build_stack(const nn::Var& attrs, const nn::Var& desc, const BoundParams& p);

struct Interaction {
  nn::Var m;          // m x n scaled interaction matrix A D^T / sqrt(d)
  nn::Var attr_hat;   // softmax_rows(M) D
  nn::Var desc_hat;   // softmax_rows(M^T) A
};
Interaction interact(const nn::Var& a, const nn::Var& d);

/// ReLU([X .* Xh ; X - Xh ; X ; Xh] Wg + bg).
nn::Var fuse(const nn::Var& x, const nn::Var& x_hat, const BoundParams& p);

/// Interacts and fuses every (level, type) pair, summarises each side with
/// two GRU layers and feeds the concatenated last states to the output layer.
/// Feature order: level ascending, self before cross, attribute state before
/// description state. Returns the 1x1 pre-sigmoid logit.
nn::Var aggregate_logit(const RepStack& stack, const BoundParams& p);
/// sigmoid(aggregate_logit(...)).
nn::Var aggregate_and_score(const RepStack& stack, const BoundParams& p);

/// Convenience: full single-space forward pass without gradients.
double score_pair(const MatchModelParams& m, const nn::Mat& attrs, const nn::Mat& desc);

struct DualScore {
  double score1 = 0.0;  // source-language space
  double score2 = 0.0;  // target-language space
  double final = 0.0;   // score1 + score2
};

/// score2 = m_en(a W_ch2en, d) in the target space; score1 = m_ch(a, d W_en2ch)
/// in the source space.
DualScore dual_score(const embed::ContextualMatrix& attrs, const embed::ContextualMatrix& desc,
                     const MatchModelParams& m_en, const MatchModelParams& m_ch,
                     const align::MappingMatrix& w_ch2en, const align::MappingMatrix& w_en2ch);

/// Ablation variants. mono scores in the target space through the initial,
/// never-updated mapping; en2ch and ch2en use one space with a learned
/// mapping; dual uses both.
enum class Mode { kMono, kEn2Ch, kCh2En, kDual };
std::string to_string(Mode m);
Mode mode_from_string(const std::string& s);

/// Both matching models and both mapping matrices.
class ClmnModel {
 public:
  ClmnModel(Mode mode, MatchModelParams en, MatchModelParams ch, align::MappingMatrix w_ch2en,
            align::MappingMatrix w_en2ch, bool freeze_mapping = false);

  static ClmnModel init(Mode mode, const MatchDims& dims, align::MappingMatrix w_ch2en,
                        align::MappingMatrix w_en2ch, std::uint64_t seed,
                        bool freeze_mapping = false);

  Mode mode() const { return mode_; }
  bool uses_target_space() const { return mode_ != Mode::kEn2Ch; }
  bool uses_source_space() const { return mode_ == Mode::kEn2Ch || mode_ == Mode::kDual; }
  /// Whether mapping matrices receive gradient updates and retraction.
  bool mapping_trainable() const { return !freeze_mapping_ && mode_ != Mode::kMono; }
  bool freeze_mapping() const { return freeze_mapping_; }

  const MatchModelParams& en() const { return en_; }
  const MatchModelParams& ch() const { return ch_; }
  MatchModelParams& en() { return en_; }
  MatchModelParams& ch() { return ch_; }
  const align::MappingMatrix& w_ch2en() const { return w_ch2en_; }
  const align::MappingMatrix& w_en2ch() const { return w_en2ch_; }
  align::MappingMatrix& w_ch2en() { return w_ch2en_; }
  align::MappingMatrix& w_en2ch() { return w_en2ch_; }

  struct Logits {
    std::optional<nn::Var> source_space;  // score1 logit
    std::optional<nn::Var> target_space;  // score2 logit
  };
  /// Builds the forward graph for the spaces this mode uses. Parameters are
  /// registered as "en.*", "ch.*", "mapping.ch2en" and "mapping.en2ch".
  Logits forward(nn::Graph& g, const nn::Mat& attrs, const nn::Mat& desc) const;

  /// Scores for ranking; unused spaces contribute 0 to `final`.
  DualScore score(const nn::Mat& attrs, const nn::Mat& desc) const;

  /// Trainable tensors by graph name, in a fixed order.
  std::vector<std::pair<std::string, nn::Tensor*>> trainable();
  /// Every tensor by graph name (what checkpoints store).
  std::vector<std::pair<std::string, const nn::Tensor*>> all_tensors() const;

 private:
  Mode mode_;
  MatchModelParams en_;
  MatchModelParams ch_;
  align::MappingMatrix w_ch2en_;
  align::MappingMatrix w_en2ch_;
  bool freeze_mapping_;
};

}  // namespace clmn::match
