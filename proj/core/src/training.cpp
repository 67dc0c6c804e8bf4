// SPDX-License-Identifier: Apache-2.0
#include "clmn/training.hpp"

#include "clmn/alignment.hpp"
#include "clmn/errors.hpp"
#include "clmn/ops.hpp"
#include "clmn/random.hpp"

#include <json.hpp>

#include <chrono>
#include <cmath>
#include <fstream>
#include <unordered_map>

namespace clmn::train {

void TrainConfig::validate() const {
  if (batch_size < 1) throw ContractError("batch_size must be >= 1");
  if (neg_ratio_train < 1 || neg_ratio_test < 1) throw ContractError("negative ratios must be >= 1");
  if (max_len_attr < 1 || max_len_desc < 1) throw ContractError("length limits must be >= 1");
  if (levels < 1) throw ContractError("L must be >= 1");
  if (!(learning_rate >= 0.0) || !std::isfinite(learning_rate)) {
    throw ContractError("learning rate must be a finite non-negative number");
  }
  if (!(beta > 0.0 && beta < 0.5)) throw ContractError("beta must lie in (0, 0.5)");
  if (!(mapping_lr_scale >= 0.0) || !std::isfinite(mapping_lr_scale)) {
    throw ContractError("mapping_lr_scale must be a finite non-negative number");
  }
}

void adam_step(const ParamRefs& params, const nn::Gradients& grads, OptimizerState& state,
               double lr, const std::unordered_map<std::string, double>& lr_scale) {
  for (const auto& [name, p] : params) {
    if (!grads.contains(name)) continue;
    const nn::Tensor& g = grads.at(name);
    if (g.shape() != p->shape()) {
      throw DimensionError("adam_step: gradient for " + name + " has shape " +
                           nn::shape_string(g.shape()) + ", parameter has " +
                           nn::shape_string(p->shape()));
    }
    if (!g.all_finite()) throw NumericError("adam_step: non-finite gradient for " + name);
  }
  ++state.step;
  const double t = static_cast<double>(state.step);
  const double c1 = 1.0 - std::pow(state.beta1, t);
  const double c2 = 1.0 - std::pow(state.beta2, t);
  for (const auto& [name, p] : params) {
    if (!grads.contains(name)) continue;
    const nn::Mat& g = grads.at(name).mat();
    auto [mi, fresh_m] = state.first_moment.try_emplace(name, nn::Mat::Zero(g.rows(), g.cols()));
    auto [vi, fresh_v] = state.second_moment.try_emplace(name, nn::Mat::Zero(g.rows(), g.cols()));
    nn::Mat& m = mi->second;
    nn::Mat& v = vi->second;
    m = state.beta1 * m + (1.0 - state.beta1) * g;
    v = state.beta2 * v + (1.0 - state.beta2) * g.cwiseProduct(g);
    const auto scale = lr_scale.find(name);
    const double step_lr = scale == lr_scale.end() ? lr : lr * scale->second;
    if (step_lr == 0.0) continue;
    p->mat().array() -=
        step_lr * (m.array() / c1) / ((v.array() / c2).sqrt() + state.epsilon);
  }
}

void adam_step(nn::ParamSet& params, const nn::Gradients& grads, OptimizerState& state,
               double lr) {
  ParamRefs refs;
  for (auto& [name, t] : params) refs.emplace_back(name, &t);
  adam_step(refs, grads, state, lr);
}

std::vector<data::PairExample> sample_negatives(const std::vector<data::PairExample>& positives,
                                                std::size_t ratio, std::uint64_t seed) {
  if (ratio < 1) throw ContractError("sample_negatives: ratio must be >= 1");
  std::vector<std::size_t> distinct;
  {
    std::unordered_map<std::string, bool> seen;
    for (std::size_t i = 0; i < positives.size(); ++i) {
      if (seen.emplace(positives[i].desc_id, true).second) distinct.push_back(i);
    }
  }
  if (distinct.size() < 2) {
    throw ContractError("sample_negatives: need at least two distinct descriptions");
  }
  Rng rng(seed);
  std::vector<data::PairExample> out;
  out.reserve(positives.size() * (ratio + 1));
  for (const auto& pos : positives) {
    data::PairExample p = pos;
    p.label = 1;
    out.push_back(std::move(p));
    for (std::size_t k = 0; k < ratio; ++k) {
      const data::PairExample* other = nullptr;
      do {
        other = &positives[distinct[rng.index(distinct.size())]];
      } while (other->desc_id == pos.desc_id);
      data::PairExample neg;
      neg.id = pos.id + "#neg" + std::to_string(k);
      neg.attributes = pos.attributes;
      neg.description = other->description;
      neg.desc_id = other->desc_id;
      neg.label = 0;
      out.push_back(std::move(neg));
    }
  }
  rng.shuffle(out);
  return out;
}

double bce_loss(const std::vector<data::PairExample>& batch, const std::vector<double>& scores) {
  if (batch.size() != scores.size()) {
    throw DimensionError("bce_loss: " + std::to_string(batch.size()) + " examples vs " +
                         std::to_string(scores.size()) + " scores");
  }
  if (batch.empty()) throw ContractError("bce_loss: empty batch");
  double total = 0.0;
  for (std::size_t i = 0; i < batch.size(); ++i) {
    const double f = scores[i];
    if (!(f > 0.0 && f < 1.0)) throw NumericError("bce_loss: score outside (0,1)");
    const double y = batch[i].label;
    total -= y * std::log(f) + (1.0 - y) * std::log1p(-f);
  }
  return total / static_cast<double>(batch.size());
}

Featurizer::Featurizer(embed::EncoderSpec src_spec, const embed::EmbeddingTable& src_table,
                       embed::EncoderSpec tgt_spec, const embed::EmbeddingTable& tgt_table,
                       std::size_t max_len_attr, std::size_t max_len_desc)
    : src_spec_(src_spec),
      src_table_(&src_table),
      tgt_spec_(tgt_spec),
      tgt_table_(&tgt_table),
      max_attr_(max_len_attr),
      max_desc_(max_len_desc) {}

const nn::Mat& Featurizer::lookup(std::unordered_map<std::string, nn::Mat>& cache,
                                  const data::Tokens& tokens, std::size_t max_len,
                                  const embed::EncoderSpec& spec,
                                  const embed::EmbeddingTable& table) {
  const std::size_t n = std::min(tokens.size(), max_len);
  std::string key;
  for (std::size_t i = 0; i < n; ++i) {
    key += tokens[i];
    key += '\x1f';
  }
  auto it = cache.find(key);
  if (it != cache.end()) return it->second;
  data::Tokens cut(tokens.begin(), tokens.begin() + static_cast<std::ptrdiff_t>(n));
  auto cm = embed::encode(cut, spec, table);
  return cache.emplace(std::move(key), std::move(cm.reps.mat())).first->second;
}

const nn::Mat& Featurizer::attributes(const data::Tokens& tokens) {
  return lookup(attr_cache_, tokens, max_attr_, src_spec_, *src_table_);
}

const nn::Mat& Featurizer::description(const data::Tokens& tokens) {
  return lookup(desc_cache_, tokens, max_desc_, tgt_spec_, *tgt_table_);
}

eval::PoolScorer model_scorer(const match::ClmnModel& model, Featurizer& features) {
  return [&model, &features](const data::Tokens& attrs, const std::vector<data::Tokens>& cands) {
    const nn::Mat& a = features.attributes(attrs);
    std::vector<double> scores;
    scores.reserve(cands.size());
    for (const auto& c : cands) scores.push_back(model.score(a, features.description(c)).final);
    return scores;
  };
}

std::string epoch_log_json(const EpochLog& e) {
  nlohmann::ordered_json j;
  j["epoch"] = e.epoch;
  j["train_loss"] = e.train_loss;
  j["valid_mrr"] = e.valid_mrr;
  j["valid_r10_1"] = e.valid_r10_1;
  j["ortho_err_ch2en"] = e.ortho_err_ch2en;
  j["ortho_err_en2ch"] = e.ortho_err_en2ch;
  j["wall_seconds"] = e.wall_seconds;
  return j.dump();
}

double train_step(match::ClmnModel& model, const std::vector<data::PairExample>& batch,
                  Featurizer& features, OptimizerState& state, double lr,
                  double mapping_lr_scale) {
  if (batch.empty()) throw ContractError("train_step: empty batch");
  nn::Gradients total;
  double loss_sum = 0.0;
  for (const auto& ex : batch) {
    nn::Graph g;
    auto logits = model.forward(g, features.attributes(ex.attributes),
                                features.description(ex.description));
    const double y = ex.label;
    nn::Var loss;
    if (logits.target_space) loss = nn::bce_with_logits(*logits.target_space, y);
    if (logits.source_space) {
      nn::Var l1 = nn::bce_with_logits(*logits.source_space, y);
      loss = loss.valid() ? nn::add(loss, l1) : l1;
    }
    const double lv = loss.value()(0, 0);
    if (!std::isfinite(lv)) throw NumericError("non-finite loss on example " + ex.id);
    loss_sum += lv;
    total.accumulate(g.backward(loss));
  }
  const double inv = 1.0 / static_cast<double>(batch.size());
  total.scale(inv);
  const std::unordered_map<std::string, double> scales{{"mapping.ch2en", mapping_lr_scale},
                                                        {"mapping.en2ch", mapping_lr_scale}};
  adam_step(model.trainable(), total, state, lr, scales);
  // A step that does not touch W leaves nothing to retract.
  if (model.mapping_trainable() && lr * mapping_lr_scale > 0.0) {
    if (model.uses_target_space()) {
      align::retract_in_place(model.w_ch2en().weight().mat(), model.w_ch2en().beta());
    }
    if (model.uses_source_space()) {
      align::retract_in_place(model.w_en2ch().weight().mat(), model.w_en2ch().beta());
    }
  }
  return loss_sum * inv;
}

TrainResult train(const std::vector<data::PairExample>& train_positives,
                  const std::vector<data::PairExample>& valid_positives, const TrainConfig& config,
                  Featurizer& features, match::ClmnModel initial, const TrainHooks& hooks) {
  config.validate();
  if (train_positives.empty()) throw ContractError("train: empty training split");
  if (valid_positives.empty()) throw ContractError("train: empty validation split");

  match::ClmnModel model = std::move(initial);
  const eval::PoolSet valid_pools =
      eval::build_pool_set(valid_positives, derive_seed(config.seed, 0x7a11d), true, false);
  OptimizerState state;

  auto bundle_of = [&](const match::ClmnModel& m) {
    return std::make_unique<ckpt::ModelBundle>(ckpt::ModelBundle{
        m, features.source_spec(), features.max_len_attr(), features.max_len_desc()});
  };

  TrainResult result;
  for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
    const auto t0 = std::chrono::steady_clock::now();
    const auto examples =
        sample_negatives(train_positives, config.neg_ratio_train, derive_seed(config.seed, epoch));
    double loss_acc = 0.0;
    std::size_t batches = 0;
    double max_ortho = 0.0;
    for (std::size_t start = 0; start < examples.size(); start += config.batch_size) {
      const std::size_t end = std::min(examples.size(), start + config.batch_size);
      std::vector<data::PairExample> batch(examples.begin() + static_cast<std::ptrdiff_t>(start),
                                           examples.begin() + static_cast<std::ptrdiff_t>(end));
      double loss = 0.0;
      try {
        loss = train_step(model, batch, features, state, config.learning_rate,
                          config.mapping_lr_scale);
      } catch (const NumericError& e) {
        throw NumericError("training diverged at epoch " + std::to_string(epoch) + ", batch " +
                           std::to_string(batches + 1) + ": " + e.what());
      }
      if (!std::isfinite(loss)) {
        throw NumericError("training diverged at epoch " + std::to_string(epoch) + ", batch " +
                           std::to_string(batches + 1) + ": loss is not finite");
      }
      loss_acc += loss;
      ++batches;
      max_ortho = std::max({max_ortho, align::orthogonality_error(model.w_ch2en().weight().mat()),
                            align::orthogonality_error(model.w_en2ch().weight().mat())});
    }

    const auto metrics = eval::evaluate(valid_pools, model_scorer(model, features));
    EpochLog log;
    log.epoch = epoch;
    log.train_loss = loss_acc / static_cast<double>(batches);
    log.valid_mrr = metrics.mrr.value_or(0.0);
    log.valid_r10_1 = metrics.r10_at_1.value_or(0.0);
    log.ortho_err_ch2en = align::orthogonality_error(model.w_ch2en().weight().mat());
    log.ortho_err_en2ch = align::orthogonality_error(model.w_en2ch().weight().mat());
    log.max_ortho_err = max_ortho;
    log.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    if (!result.best || log.valid_mrr > result.best_valid_mrr) {
      result.best = bundle_of(model);
      result.best_valid_mrr = log.valid_mrr;
      result.best_epoch = epoch;
    }
    result.log.push_back(log);
    if (!hooks.epoch_log_path.empty()) {
      std::ofstream out(hooks.epoch_log_path, std::ios::app);
      if (!out) throw IoError("cannot append to epoch log " + hooks.epoch_log_path);
      out << epoch_log_json(log) << '\n';
    }
    if (!hooks.last_checkpoint_path.empty()) {
      ckpt::save_bundle(*bundle_of(model), hooks.last_checkpoint_path);
    }
    if (hooks.on_epoch) hooks.on_epoch(log);
  }
  result.last = bundle_of(model);
  if (!result.best) result.best = bundle_of(model);
  return result;
}

}  // namespace clmn::train
