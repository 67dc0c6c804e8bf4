// SPDX-License-Identifier: Apache-2.0
#include "clmn/checkpoint.hpp"
#include "clmn/errors.hpp"
#include "clmn/io_util.hpp"
#include "clmn/ops.hpp"
#include "clmn/pipeline.hpp"
#include "clmn/training.hpp"
#include "support.hpp"

#include <gtest/gtest.h>
#include <json.hpp>

#include <cmath>
#include <fstream>
#include <set>

namespace clmn::train {
namespace {

using data::PairExample;

std::vector<PairExample> positives(std::size_t n) {
  std::vector<PairExample> out;
  for (std::size_t i = 0; i < n; ++i) {
    PairExample p;
    p.id = "p" + std::to_string(i);
    p.desc_id = p.id;
    p.attributes = {"s" + std::to_string(i)};
    p.description = {"t" + std::to_string(i), "t" + std::to_string(i + 1)};
    out.push_back(p);
  }
  return out;
}

// Small planted corpus shared by the end-to-end tests in this file.
struct TinyWorld {
  pipeline::SyntheticBundle bundle;
  embed::EncoderSpec spec;
  std::unique_ptr<Featurizer> features;
  align::MappingMatrix ch2en, en2ch;

  TinyWorld()
      : bundle(pipeline::make_synthetic(config(), pipeline::SplitSizes{60, 12, 12})),
        ch2en(nn::Tensor::from_mat(bundle.synth.rotation), align::Direction::kCh2En),
        en2ch(nn::Tensor::from_mat(bundle.synth.rotation.transpose()), align::Direction::kEn2Ch) {
    spec.dim = 8;
    spec.seed = 3;
    features = std::make_unique<Featurizer>(spec, bundle.synth.src_static, spec,
                                            bundle.synth.tgt_static, 50, 100);
  }

  static data::SynthConfig config() {
    data::SynthConfig c;
    c.src_vocab = 60;
    c.tgt_vocab = 60;
    c.filler_vocab = 20;
    c.pair_count = 84;
    c.attr_len_mean = 5;
    c.desc_len_mean = 8;
    c.dim = 8;
    c.corpus_docs = 50;
    c.seed = 5;
    return c;
  }

  match::ClmnModel model(match::Mode mode = match::Mode::kDual, bool freeze = false) const {
    match::MatchDims d;
    d.d_model = 8;
    d.d_hidden = 8;
    d.levels = 1;
    return match::ClmnModel::init(mode, d, ch2en, en2ch, 11, freeze);
  }
};

std::vector<nn::Mat> snapshot(const match::ClmnModel& m) {
  std::vector<nn::Mat> out;
  for (const auto& [name, t] : m.all_tensors()) out.push_back(t->mat());
  return out;
}

TEST(TrainConfig, DefaultsAndValidation) {
  TrainConfig c;
  EXPECT_EQ(c.batch_size, 50u);
  EXPECT_DOUBLE_EQ(c.learning_rate, 3e-4);
  EXPECT_EQ(c.neg_ratio_train, 1u);
  EXPECT_EQ(c.neg_ratio_test, 9u);
  EXPECT_EQ(c.max_len_attr, 50u);
  EXPECT_EQ(c.max_len_desc, 100u);
  EXPECT_EQ(c.levels, 2u);
  EXPECT_DOUBLE_EQ(c.beta, 0.01);
  EXPECT_NO_THROW(c.validate());
  auto bad = [](auto mutate) {
    TrainConfig c;
    mutate(c);
    EXPECT_THROW(c.validate(), ContractError);
  };
  bad([](TrainConfig& c) { c.batch_size = 0; });
  bad([](TrainConfig& c) { c.neg_ratio_train = 0; });
  bad([](TrainConfig& c) { c.max_len_desc = 0; });
  bad([](TrainConfig& c) { c.levels = 0; });
  bad([](TrainConfig& c) { c.learning_rate = -1; });
  bad([](TrainConfig& c) { c.beta = 0.5; });
  bad([](TrainConfig& c) { c.mapping_lr_scale = std::nan(""); });
}

TEST(SampleNegatives, OneToOneDoublesTheSet) {
  const auto pos = positives(20);
  const auto out = sample_negatives(pos, 1, 3);
  EXPECT_EQ(out.size(), 40u);
  EXPECT_EQ(std::count_if(out.begin(), out.end(), [](const PairExample& e) { return e.label == 1; }), 20);
}

TEST(SampleNegatives, NineNegativesPerPositive) {
  const auto pos = positives(15);
  const auto out = sample_negatives(pos, 9, 4);
  EXPECT_EQ(out.size(), 150u);
  std::map<std::string, int> per_query;
  for (const auto& e : out) {
    if (e.label == 0) ++per_query[e.id.substr(0, e.id.find('#'))];
  }
  EXPECT_EQ(per_query.size(), 15u);
  for (const auto& [id, n] : per_query) EXPECT_EQ(n, 9) << id;
}

TEST(SampleNegatives, NeverReusesOwnDescription) {
  const auto pos = positives(5);
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    for (const auto& e : sample_negatives(pos, 4, seed)) {
      const std::string owner = e.id.substr(0, e.id.find('#'));
      if (e.label == 0) {
        EXPECT_NE(e.desc_id, owner);
        EXPECT_EQ(e.attributes, pos[std::stoul(owner.substr(1))].attributes);
      } else {
        EXPECT_EQ(e.desc_id, owner);
      }
    }
  }
}

TEST(SampleNegatives, SeededAndGuarded) {
  const auto pos = positives(10);
  EXPECT_EQ(sample_negatives(pos, 2, 8), sample_negatives(pos, 2, 8));
  EXPECT_NE(sample_negatives(pos, 2, 8), sample_negatives(pos, 2, 9));
  auto same = positives(3);
  for (auto& p : same) p.desc_id = "only";
  EXPECT_THROW(sample_negatives(same, 1, 0), ContractError);
}

TEST(BceLoss, AnalyticValues) {
  auto batch = positives(1);
  EXPECT_NEAR(bce_loss(batch, {1.0 - 1e-12}), 0.0, 1e-11);
  EXPECT_NEAR(bce_loss(batch, {0.5}), std::log(2.0), 1e-15);
  batch[0].label = 0;
  EXPECT_NEAR(bce_loss(batch, {0.5}), 0.6931, 1e-4);
  EXPECT_THROW(bce_loss(batch, {1.0}), NumericError);
  EXPECT_THROW(bce_loss(batch, {0.0}), NumericError);
  EXPECT_THROW(bce_loss(batch, {0.5, 0.5}), DimensionError);
}

TEST(BceLoss, MeanReducedAndNonNegative) {
  auto batch = positives(4);
  batch[1].label = 0;
  batch[3].label = 0;
  Rng rng(1);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<double> s;
    double manual = 0.0;
    for (const auto& e : batch) {
      s.push_back(rng.uniform(1e-6, 1.0 - 1e-6));
      manual -= e.label ? std::log(s.back()) : std::log(1.0 - s.back());
    }
    const double l = bce_loss(batch, s);
    EXPECT_GE(l, 0.0);
    EXPECT_NEAR(l, manual / 4.0, 1e-12);
  }
}

TEST(Adam, ZeroGradientOnlyAdvancesStep) {
  nn::ParamSet ps;
  ps.add("w", testing::random_tensor(2, 3, 1));
  const nn::Mat before = ps.at("w").mat();
  nn::Gradients g;
  g.set("w", nn::Tensor::zeros({2, 3}));
  OptimizerState st;
  adam_step(ps, g, st, 0.1);
  EXPECT_EQ(st.step, 1u);
  EXPECT_EQ(ps.at("w").mat(), before);
}

TEST(Adam, FirstStepIsSignedLearningRate) {
  for (double grad : {3.7, -0.02, 1e-3}) {
    nn::ParamSet ps;
    ps.add("w", nn::Tensor::scalar(1.0));
    nn::Gradients g;
    g.set("w", nn::Tensor::scalar(grad));
    OptimizerState st;
    adam_step(ps, g, st, 0.01);
    // Bias correction makes m_hat = g and v_hat = g^2 on step one.
    const double expected = 1.0 - 0.01 * grad / (std::abs(grad) + st.epsilon);
    EXPECT_NEAR(ps.at("w").item(), expected, 1e-15);
    EXPECT_NEAR(ps.at("w").item(), 1.0 - 0.01 * (grad > 0 ? 1 : -1), 1e-7);
  }
}

TEST(Adam, RepeatableAndScaled) {
  auto run = [](double scale) {
    nn::ParamSet ps;
    ps.add("a", testing::random_tensor(2, 2, 5));
    ps.add("b", testing::random_tensor(1, 3, 6));
    ParamRefs refs;
    for (auto& [n, t] : ps) refs.emplace_back(n, &t);
    OptimizerState st;
    for (int i = 0; i < 10; ++i) {
      nn::Gradients g;
      g.set("a", testing::random_tensor(2, 2, 100 + i));
      g.set("b", testing::random_tensor(1, 3, 200 + i));
      adam_step(refs, g, st, 1e-2, {{"b", scale}});
    }
    return std::make_pair(ps.at("a").mat(), ps.at("b").mat());
  };
  const auto r1 = run(1.0), r2 = run(1.0), r0 = run(0.0);
  EXPECT_EQ(r1.first, r2.first);
  EXPECT_EQ(r1.second, r2.second);
  EXPECT_EQ(r0.first, r1.first);
  EXPECT_EQ(r0.second, testing::random_mat(1, 3, 6));
}

TEST(Adam, NonFiniteGradientNamesParameter) {
  nn::ParamSet ps;
  ps.add("layer.weight", nn::Tensor::zeros({1, 2}));
  nn::Gradients g;
  g.set("layer.weight", nn::Tensor::matrix({{1.0, std::nan("")}}));
  OptimizerState st;
  try {
    adam_step(ps, g, st, 0.1);
    FAIL();
  } catch (const NumericError& e) {
    EXPECT_NE(std::string(e.what()).find("layer.weight"), std::string::npos);
  }
  EXPECT_EQ(st.step, 0u);
  nn::Gradients wrong;
  wrong.set("layer.weight", nn::Tensor::zeros({2, 1}));
  EXPECT_THROW(adam_step(ps, wrong, st, 0.1), DimensionError);
}

TEST(Featurizer, TruncatesAndMemoises) {
  TinyWorld w;
  Featurizer f(w.spec, w.bundle.synth.src_static, w.spec, w.bundle.synth.tgt_static, 3, 4);
  data::Tokens attrs{"s0", "s1", "s2", "s3", "s4"};
  const nn::Mat& a = f.attributes(attrs);
  EXPECT_EQ(a.rows(), 3);
  EXPECT_EQ(&f.attributes(attrs), &a);
  EXPECT_EQ(&f.attributes({"s0", "s1", "s2"}), &a);
  data::Tokens cut{"s0", "s1", "s2"};
  EXPECT_EQ(a, embed::encode(cut, w.spec, w.bundle.synth.src_static).reps.mat());
  EXPECT_EQ(f.description({"t0", "t1", "t2", "t3", "t4", "t5"}).rows(), 4);
}

TEST(TrainStep, ReproducibleBitForBit) {
  TinyWorld w;
  const auto batch = sample_negatives(w.bundle.splits.train, 1, 1);
  const std::vector<PairExample> head(batch.begin(), batch.begin() + 10);
  auto run = [&] {
    match::ClmnModel m = w.model();
    OptimizerState st;
    const double loss = train_step(m, head, *w.features, st, 1e-3);
    return std::make_pair(loss, snapshot(m));
  };
  const auto a = run(), b = run();
  EXPECT_EQ(a.first, b.first);
  EXPECT_EQ(a.second, b.second);
}

TEST(TrainStep, RetractsOnlyTrainableMappings) {
  TinyWorld w;
  const auto batch = sample_negatives(w.bundle.splits.train, 1, 2);
  const std::vector<PairExample> head(batch.begin(), batch.begin() + 20);

  // Reference step: mean of the summed per-space losses, Adam with the
  // mapping step scaled, then one retraction of each mapping.
  match::ClmnModel ref = w.model();
  nn::Gradients total;
  for (const auto& ex : head) {
    nn::Graph g;
    auto l = ref.forward(g, w.features->attributes(ex.attributes), w.features->description(ex.description));
    nn::Var loss = nn::add(nn::bce_with_logits(*l.target_space, ex.label),
                           nn::bce_with_logits(*l.source_space, ex.label));
    total.accumulate(g.backward(loss));
  }
  total.scale(1.0 / static_cast<double>(head.size()));
  OptimizerState ref_state;
  adam_step(ref.trainable(), total, ref_state, 1e-2, {{"mapping.ch2en", 0.5}, {"mapping.en2ch", 0.5}});
  const nn::Mat unretracted = ref.w_ch2en().weight().mat();
  align::retract_in_place(ref.w_ch2en().weight().mat(), 0.01);
  align::retract_in_place(ref.w_en2ch().weight().mat(), 0.01);

  match::ClmnModel m = w.model();
  OptimizerState st;
  train_step(m, head, *w.features, st, 1e-2, 0.5);
  EXPECT_NE(m.w_ch2en().weight().mat(), w.ch2en.weight().mat());
  EXPECT_NE(m.w_ch2en().weight().mat(), unretracted);
  const auto got = snapshot(m), want = snapshot(ref);
  ASSERT_EQ(got.size(), want.size());
  for (std::size_t i = 0; i < got.size(); ++i) {
    EXPECT_LT((got[i] - want[i]).cwiseAbs().maxCoeff(), 1e-13) << m.all_tensors()[i].first;
  }

  match::ClmnModel frozen = w.model(match::Mode::kDual, true);
  OptimizerState st2;
  for (int i = 0; i < 3; ++i) train_step(frozen, head, *w.features, st2, 1e-2, 1.0);
  EXPECT_EQ(frozen.w_ch2en().weight().mat(), w.ch2en.weight().mat());
  EXPECT_EQ(frozen.w_en2ch().weight().mat(), w.en2ch.weight().mat());

  match::ClmnModel mono = w.model(match::Mode::kMono);
  OptimizerState st3;
  train_step(mono, head, *w.features, st3, 1e-2, 1.0);
  EXPECT_EQ(mono.w_ch2en().weight().mat(), w.ch2en.weight().mat());
  // Mono never touches the source-space model.
  EXPECT_TRUE(mono.ch().params() == w.model(match::Mode::kMono).ch().params());
}

TEST(Train, ZeroLearningRateLeavesParametersUntouched) {
  TinyWorld w;
  TrainConfig c;
  c.learning_rate = 0.0;
  c.epochs = 1;
  c.batch_size = 16;
  c.levels = 1;
  const match::ClmnModel initial = w.model();
  TrainResult r = train(w.bundle.splits.train, w.bundle.splits.valid, c, *w.features, initial);
  EXPECT_EQ(snapshot(r.last->model), snapshot(initial));
  EXPECT_EQ(snapshot(r.best->model), snapshot(initial));
}

TEST(Train, LossFallsAndArtifactsAreWritten) {
  TinyWorld w;
  testing::TempDir dir("train_run");
  TrainConfig c;
  c.learning_rate = 3e-3;
  c.epochs = 3;
  c.batch_size = 10;
  c.levels = 1;
  c.seed = 4;
  TrainHooks hooks;
  hooks.epoch_log_path = dir.file("epochs.jsonl");
  hooks.last_checkpoint_path = dir.file("last.json");
  std::size_t callbacks = 0;
  hooks.on_epoch = [&](const EpochLog&) { ++callbacks; };
  TrainResult r = train(w.bundle.splits.train, w.bundle.splits.valid, c, *w.features, w.model(), hooks);

  ASSERT_EQ(r.log.size(), 3u);
  EXPECT_EQ(callbacks, 3u);
  EXPECT_LT(r.log[1].train_loss, r.log[0].train_loss);
  EXPECT_LT(r.log[2].train_loss, r.log[1].train_loss);
  double best = 0.0;
  for (const auto& e : r.log) best = std::max(best, e.valid_mrr);
  EXPECT_EQ(r.best_valid_mrr, best);
  EXPECT_EQ(r.log[r.best_epoch - 1].valid_mrr, best);

  std::ifstream in(dir.file("epochs.jsonl"));
  std::string line;
  std::size_t lines = 0;
  while (std::getline(in, line)) {
    const auto j = nlohmann::json::parse(line);
    for (const char* key : {"epoch", "train_loss", "valid_mrr", "valid_r10_1", "ortho_err_ch2en",
                            "ortho_err_en2ch", "wall_seconds"}) {
      EXPECT_TRUE(j.contains(key)) << key;
    }
    EXPECT_EQ(j.size(), 7u);
    EXPECT_EQ(j["epoch"].get<std::size_t>(), ++lines);
  }
  EXPECT_EQ(lines, 3u);

  const ckpt::ModelBundle last = ckpt::load_bundle(dir.file("last.json"));
  EXPECT_EQ(snapshot(last.model), snapshot(r.last->model));
}

TEST(Train, CheckpointPreservesValidationMetrics) {
  TinyWorld w;
  testing::TempDir dir("ckpt_metrics");
  TrainConfig c;
  c.learning_rate = 3e-3;
  c.epochs = 1;
  c.batch_size = 12;
  c.levels = 1;
  TrainResult r = train(w.bundle.splits.train, w.bundle.splits.valid, c, *w.features, w.model());
  const eval::PoolSet pools = eval::build_pool_set(w.bundle.splits.valid, 99);
  const auto before = eval::evaluate(pools, model_scorer(r.best->model, *w.features));
  ckpt::save_bundle(*r.best, dir.file("m.json"));
  const ckpt::ModelBundle loaded = ckpt::load_bundle(dir.file("m.json"));
  EXPECT_EQ(loaded.max_len_attr, r.best->max_len_attr);
  EXPECT_EQ(loaded.encoder.seed, w.spec.seed);
  const auto after = eval::evaluate(pools, model_scorer(loaded.model, *w.features));
  EXPECT_EQ(before, after);
}

TEST(Train, DivergenceReportsEpochAndBatch) {
  TinyWorld w;
  match::ClmnModel broken = w.model();
  broken.en().params().at("output.bias").mat()(0, 0) = std::nan("");
  TrainConfig c;
  c.epochs = 1;
  c.levels = 1;
  try {
    train(w.bundle.splits.train, w.bundle.splits.valid, c, *w.features, broken);
    FAIL();
  } catch (const NumericError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("epoch 1"), std::string::npos) << msg;
    EXPECT_NE(msg.find("batch 1"), std::string::npos) << msg;
  }
}

TEST(Checkpoint, RejectsMalformedDocuments) {
  EXPECT_THROW(ckpt::bundle_from_json("not json"), ParseError);
  EXPECT_THROW(ckpt::bundle_from_json("{\"format\": \"other\"}"), ParseError);
  EXPECT_THROW(ckpt::load_bundle("/nonexistent/model.json"), IoError);
}

TEST(Checkpoint, ParamsJsonRoundTrip) {
  nn::Tensor a = testing::random_tensor(2, 3, 1);
  nn::Tensor b = nn::Tensor::vector({1.0 / 3.0, -2e-300});
  const std::string text = ckpt::params_to_json({{"a", &a}, {"b", &b}});
  nn::ParamSet back = ckpt::params_from_json(text);
  EXPECT_EQ(back.at("a"), a);
  EXPECT_EQ(back.at("b"), b);
}

}  // namespace
}  // namespace clmn::train
