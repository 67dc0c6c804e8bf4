// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "clmn/checkpoint.hpp"
#include "clmn/dataset.hpp"
#include "clmn/embeddings.hpp"
#include "clmn/encoder.hpp"
#include "clmn/evaluation.hpp"
#include "clmn/matcher.hpp"

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

namespace clmn::train {

struct TrainConfig {
  std::size_t batch_size = 50;
  double learning_rate = 3e-4;
  std::size_t epochs = 10;
  std::size_t neg_ratio_train = 1;
  std::size_t neg_ratio_test = 9;
  std::size_t max_len_attr = 50;
  std::size_t max_len_desc = 100;
  std::uint64_t seed = 0;
  double beta = 0.01;
  std::size_t levels = 2;
  /// GRU width; 0 means "same as the model width".
  std::size_t d_hidden = 0;
  match::Mode mode = match::Mode::kDual;
  bool freeze_mapping = false;
  /// Mapping matrices learn at learning_rate * mapping_lr_scale.
  double mapping_lr_scale = 0.1;

  /// Throws ContractError when a field is out of range.
  void validate() const;
};

/// Adam moments and step counter, keyed by parameter name.
struct OptimizerState {
  std::unordered_map<std::string, nn::Mat> first_moment;
  std::unordered_map<std::string, nn::Mat> second_moment;
  std::size_t step = 0;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

using ParamRefs = std::vector<std::pair<std::string, nn::Tensor*>>;

/// Bias-corrected Adam update of every referenced parameter. Parameters
/// without a gradient entry are left alone; `lr_scale` multiplies the step
/// size of the named parameters. Throws NumericError naming the parameter on
/// a non-finite gradient.
void adam_step(const ParamRefs& params, const nn::Gradients& grads, OptimizerState& state,
               double lr, const std::unordered_map<std::string, double>& lr_scale = {});
void adam_step(nn::ParamSet& params, const nn::Gradients& grads, OptimizerState& state, double lr);

/// Each positive is followed by `ratio` negatives whose descriptions come
/// uniformly from other pairs; the result is shuffled with the seed.
/// Throws ContractError with fewer than two distinct descriptions.
std::vector<data::PairExample> sample_negatives(const std::vector<data::PairExample>& positives,
                                                std::size_t ratio, std::uint64_t seed);

/// Mean binary cross-entropy. Throws NumericError for scores outside (0,1)
/// and DimensionError for length mismatch.
double bce_loss(const std::vector<data::PairExample>& batch, const std::vector<double>& scores);

/// Encodes texts for both languages and memoises the results, so the
/// (fixed) encoder runs once per distinct text.
class Featurizer {
 public:
  Featurizer(embed::EncoderSpec src_spec, const embed::EmbeddingTable& src_table,
             embed::EncoderSpec tgt_spec, const embed::EmbeddingTable& tgt_table,
             std::size_t max_len_attr = 50, std::size_t max_len_desc = 100);

  const nn::Mat& attributes(const data::Tokens& tokens);
  const nn::Mat& description(const data::Tokens& tokens);

  const embed::EncoderSpec& source_spec() const { return src_spec_; }
  std::size_t max_len_attr() const { return max_attr_; }
  std::size_t max_len_desc() const { return max_desc_; }

 private:
  const nn::Mat& lookup(std::unordered_map<std::string, nn::Mat>& cache, const data::Tokens& tokens,
                        std::size_t max_len, const embed::EncoderSpec& spec,
                        const embed::EmbeddingTable& table);

  embed::EncoderSpec src_spec_;
  const embed::EmbeddingTable* src_table_;
  embed::EncoderSpec tgt_spec_;
  const embed::EmbeddingTable* tgt_table_;
  std::size_t max_attr_;
  std::size_t max_desc_;
  std::unordered_map<std::string, nn::Mat> attr_cache_;
  std::unordered_map<std::string, nn::Mat> desc_cache_;
};

/// Ranking scorer that feeds pools through a model's final score.
eval::PoolScorer model_scorer(const match::ClmnModel& model, Featurizer& features);

struct EpochLog {
  std::size_t epoch = 0;
  double train_loss = 0.0;
  double valid_mrr = 0.0;
  double valid_r10_1 = 0.0;
  double ortho_err_ch2en = 0.0;
  double ortho_err_en2ch = 0.0;
  double wall_seconds = 0.0;
  /// Largest orthogonality error of either mapping seen after any step.
  double max_ortho_err = 0.0;
};

std::string epoch_log_json(const EpochLog& e);

struct TrainResult {
  std::unique_ptr<ckpt::ModelBundle> best;
  std::unique_ptr<ckpt::ModelBundle> last;
  std::vector<EpochLog> log;
  std::size_t best_epoch = 0;
  double best_valid_mrr = 0.0;
};

struct TrainHooks {
  /// Appended one JSON line per epoch when non-empty.
  std::string epoch_log_path;
  /// Rewritten atomically after every epoch when non-empty.
  std::string last_checkpoint_path;
  std::function<void(const EpochLog&)> on_epoch;
};

/// Joint training of both matching models and both mapping matrices on the
/// same batches: per batch the spaces' mean BCE losses are summed, all
/// trainable parameters take one Adam step and every trainable mapping is
/// retracted towards the orthogonal manifold. Validation MRR over frozen
/// 10-candidate pools picks the returned best checkpoint.
/// Throws NumericError with epoch/batch context if the loss diverges.
TrainResult train(const std::vector<data::PairExample>& train_positives,
                  const std::vector<data::PairExample>& valid_positives, const TrainConfig& config,
                  Featurizer& features, match::ClmnModel initial,
                  const TrainHooks& hooks = {});

/// One optimisation step on a batch; returns the mean joint loss.
double train_step(match::ClmnModel& model, const std::vector<data::PairExample>& batch,
                  Featurizer& features, OptimizerState& state, double lr,
                  double mapping_lr_scale = 0.1);

}  // namespace clmn::train
