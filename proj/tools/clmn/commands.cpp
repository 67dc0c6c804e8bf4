// SPDX-License-Identifier: Apache-2.0
#include "commands.hpp"

#include "manifest.hpp"

#include "clmn/alignment.hpp"
#include "clmn/checkpoint.hpp"
#include "clmn/dataset.hpp"
#include "clmn/embeddings.hpp"
#include "clmn/encoder.hpp"
#include "clmn/errors.hpp"
#include "clmn/evaluation.hpp"
#include "clmn/io_util.hpp"
#include "clmn/pipeline.hpp"
#include "clmn/random.hpp"
#include "clmn/synthetic.hpp"
#include "clmn/training.hpp"

#include <json.hpp>

#include <filesystem>
#include <iostream>
#include <memory>
#include <optional>

namespace clmn::cli {

namespace fs = std::filesystem;

namespace {

struct Common {
  std::string out;
  std::string report;
  std::uint64_t seed = 0;
};

void add_common(CLI::App& sub, Common& c) {
  sub.add_option("--out", c.out, "Output directory")->required();
  sub.add_option("--seed", c.seed, "Random seed")->capture_default_str();
  sub.add_option("--report", c.report, "Path of the JSON report (default: inside --out)");
}

std::string in_dir(const std::string& dir, const std::string& name) {
  return (fs::path(dir) / name).string();
}

void make_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw IoError("cannot create output directory " + dir);
}

std::string report_path(const Common& c, const std::string& fallback) {
  return c.report.empty() ? in_dir(c.out, fallback) : c.report;
}

void start(const CLI::App& sub, const Common& c, std::vector<std::string> inputs,
           std::vector<std::string> outputs) {
  make_dir(c.out);
  RunManifest m;
  m.command = sub.get_name();
  m.config = collect_config(sub);
  m.inputs = std::move(inputs);
  m.outputs = std::move(outputs);
  m.seed = c.seed;
  write_manifest(m, c.out);
}

std::vector<data::PairExample> load_split(const std::string& file) { return data::load_pairs(file); }

embed::EncoderKind encoder_kind(const std::string& s) {
  if (s == "contextual") return embed::EncoderKind::kSyntheticContextual;
  if (s == "static") return embed::EncoderKind::kStaticLookup;
  throw ContractError("unknown encoder '" + s + "' (expected contextual|static)");
}

std::string encoder_name(embed::EncoderKind k) {
  return k == embed::EncoderKind::kStaticLookup ? "static" : "contextual";
}

}  // namespace

Runner add_generate(CLI::App& app) {
  auto* sub = app.add_subcommand("generate", "Write a planted synthetic bilingual dataset");
  auto c = std::make_shared<Common>();
  auto cfg = std::make_shared<data::SynthConfig>();
  auto sizes = std::make_shared<pipeline::SplitSizes>();
  auto heldout = std::make_shared<double>(0.2);
  add_common(*sub, *c);
  sub->add_option("--pairs", cfg->pair_count, "Number of matched pairs")->capture_default_str();
  sub->add_option("--src-vocab", cfg->src_vocab, "Source vocabulary size")->capture_default_str();
  sub->add_option("--tgt-vocab", cfg->tgt_vocab, "Target vocabulary size")->capture_default_str();
  sub->add_option("--filler-vocab", cfg->filler_vocab, "Target-only filler words")->capture_default_str();
  sub->add_option("--noise-rate", cfg->noise_rate, "Fraction of filler tokens in descriptions")
      ->capture_default_str();
  sub->add_option("--attr-keep", cfg->attr_keep, "Probability an attribute is translated")
      ->capture_default_str();
  sub->add_option("--attr-len-mean", cfg->attr_len_mean)->capture_default_str();
  sub->add_option("--desc-len-mean", cfg->desc_len_mean)->capture_default_str();
  sub->add_option("--zipf", cfg->zipf_exponent, "Word frequency exponent")->capture_default_str();
  sub->add_option("--dim", cfg->dim, "Embedding width")->capture_default_str();
  sub->add_option("--embed-norm", cfg->embed_norm)->capture_default_str();
  sub->add_option("--embed-noise", cfg->embed_noise)->capture_default_str();
  sub->add_option("--corpus-docs", cfg->corpus_docs, "Documents per monolingual corpus")
      ->capture_default_str();
  sub->add_option("--rotation-seed", cfg->rotation_seed)->capture_default_str();
  sub->add_option("--train-size", sizes->train, "0 = proportional split")->capture_default_str();
  sub->add_option("--valid-size", sizes->valid)->capture_default_str();
  sub->add_option("--test-size", sizes->test)->capture_default_str();
  sub->add_option("--heldout-fraction", *heldout, "Lexicon share held out of the seed lexicon")
      ->capture_default_str();
  return [=] {
    cfg->seed = c->seed;
    const std::vector<std::string> names = {
        "src_embeddings.vec", "tgt_embeddings.vec", "src_corpus.txt",     "tgt_corpus.txt",
        "train.jsonl",        "valid.jsonl",        "test.jsonl",         "gold_lexicon.tsv",
        "seed_lexicon.tsv",   "heldout_lexicon.tsv", "rotation.map",      "relevance.jsonl"};
    std::vector<std::string> outputs;
    for (const auto& n : names) outputs.push_back(in_dir(c->out, n));
    start(*sub, *c, {}, outputs);

    std::optional<pipeline::SplitSizes> explicit_sizes;
    if (sizes->train + sizes->valid + sizes->test > 0) explicit_sizes = *sizes;
    auto b = pipeline::make_synthetic(*cfg, explicit_sizes, *heldout);
    embed::save_embeddings(b.synth.src_static, outputs[0]);
    embed::save_embeddings(b.synth.tgt_static, outputs[1]);
    data::save_corpus(b.synth.src_corpus, outputs[2]);
    data::save_corpus(b.synth.tgt_corpus, outputs[3]);
    data::save_pairs(b.splits.train, outputs[4]);
    data::save_pairs(b.splits.valid, outputs[5]);
    data::save_pairs(b.splits.test, outputs[6]);
    align::save_lexicon(b.synth.gold_lexicon, outputs[7]);
    align::save_lexicon(b.lexicon.seed, outputs[8]);
    align::save_lexicon(b.lexicon.heldout, outputs[9]);
    align::save_mapping(
        align::MappingMatrix(nn::Tensor::from_mat(b.synth.rotation), align::Direction::kCh2En),
        outputs[10]);
    std::string rel;
    for (std::size_t i = 0; i < b.synth.pairs.size(); ++i) {
      nlohmann::ordered_json j;
      j["id"] = b.synth.pairs[i].id;
      j["translated"] = b.synth.desc_is_translation[i];
      rel += j.dump() + "\n";
    }
    io::write_file_atomic(outputs[11], rel);
    std::cout << "generated " << b.synth.pairs.size() << " pairs (" << b.splits.train.size() << "/"
              << b.splits.valid.size() << "/" << b.splits.test.size() << ") in " << c->out << "\n";
  };
}

Runner add_anchors(CLI::App& app) {
  auto* sub = app.add_subcommand("anchors", "Average contextual vectors into per-word anchors");
  auto c = std::make_shared<Common>();
  struct Opts {
    std::string src_emb, tgt_emb, src_corpus, tgt_corpus, encoder = "contextual";
    double lambda = 0.5;
    std::uint64_t encoder_seed = 0;
  };
  auto o = std::make_shared<Opts>();
  add_common(*sub, *c);
  sub->add_option("--src-embeddings", o->src_emb, "Source static embeddings")->required();
  sub->add_option("--tgt-embeddings", o->tgt_emb, "Target static embeddings")->required();
  sub->add_option("--src-corpus", o->src_corpus, "Source token-list corpus")->required();
  sub->add_option("--tgt-corpus", o->tgt_corpus, "Target token-list corpus")->required();
  sub->add_option("--encoder", o->encoder, "contextual|static")->capture_default_str();
  sub->add_option("--lambda", o->lambda, "Context mixing weight")->capture_default_str();
  sub->add_option("--encoder-seed", o->encoder_seed, "Seed of out-of-vocabulary vectors")
      ->capture_default_str();
  return [=] {
    const std::vector<std::string> outputs = {in_dir(c->out, "src_anchors.vec"),
                                              in_dir(c->out, "tgt_anchors.vec")};
    start(*sub, *c, {o->src_emb, o->tgt_emb, o->src_corpus, o->tgt_corpus}, outputs);
    auto src = embed::load_embeddings(o->src_emb, "ch");
    auto tgt = embed::load_embeddings(o->tgt_emb, "en");
    if (src.dim() != tgt.dim()) throw DimensionError("embedding tables have different widths");
    embed::EncoderSpec spec{encoder_kind(o->encoder), src.dim(), o->encoder_seed, o->lambda};
    auto t = pipeline::compute_anchor_tables(data::load_corpus(o->src_corpus),
                                             data::load_corpus(o->tgt_corpus), spec, src, tgt);
    embed::save_embeddings(t.source, outputs[0]);
    embed::save_embeddings(t.target, outputs[1]);
    std::cout << "anchors: " << t.source.size() << " source, " << t.target.size() << " target\n";
  };
}

Runner add_align(CLI::App& app) {
  auto* sub = app.add_subcommand("align", "Fit both mapping matrices and report their quality");
  auto c = std::make_shared<Common>();
  struct Opts {
    std::string src, tgt, lexicon, heldout;
    double beta = 0.01;
    double holdout = 0.2;
    std::size_t csls_k = 10;
  };
  auto o = std::make_shared<Opts>();
  add_common(*sub, *c);
  sub->add_option("--src-anchors", o->src, "Source anchor table")->required();
  sub->add_option("--tgt-anchors", o->tgt, "Target anchor table")->required();
  sub->add_option("--lexicon", o->lexicon, "Seed lexicon TSV")->required();
  sub->add_option("--heldout-lexicon", o->heldout,
                  "Evaluation lexicon TSV (default: hold out part of --lexicon)");
  sub->add_option("--holdout", o->holdout, "Share of --lexicon held out when no evaluation lexicon")
      ->capture_default_str();
  sub->add_option("--beta", o->beta, "Retraction strength")->capture_default_str();
  sub->add_option("--csls-k", o->csls_k, "CSLS neighbourhood size")->capture_default_str();
  return [=] {
    const std::vector<std::string> outputs = {in_dir(c->out, "w_ch2en.map"),
                                              in_dir(c->out, "w_en2ch.map"),
                                              report_path(*c, "align_report.json")};
    std::vector<std::string> inputs = {o->src, o->tgt, o->lexicon};
    if (!o->heldout.empty()) inputs.push_back(o->heldout);
    start(*sub, *c, inputs, outputs);
    auto src = embed::load_embeddings(o->src, "ch");
    auto tgt = embed::load_embeddings(o->tgt, "en");
    auto lex = align::load_lexicon(o->lexicon);
    align::LexiconSplit parts;
    if (o->heldout.empty()) {
      parts = align::split_lexicon(lex, o->holdout, c->seed);
    } else {
      parts.seed = lex;
      parts.heldout = align::load_lexicon(o->heldout);
    }
    auto a = pipeline::align_both(src, tgt, parts.seed, parts.heldout, o->beta, o->csls_k);
    align::save_mapping(a.ch2en, outputs[0]);
    align::save_mapping(a.en2ch, outputs[1]);
    io::write_file_atomic(outputs[2],
                          pipeline::alignment_report_json(a, parts.seed.size(), parts.heldout.size()));
    for (const auto& w : a.warnings) std::cerr << "warning: " << w << "\n";
    std::cout << "alignment written to " << c->out << "\n";
  };
}

Runner add_train(CLI::App& app) {
  auto* sub = app.add_subcommand("train", "Train the matching models and mapping matrices");
  auto c = std::make_shared<Common>();
  struct Opts {
    std::string data, train, valid, src_emb, tgt_emb, w_ch2en, w_en2ch;
    std::string encoder = "contextual", mode = "dual";
    double lambda = 0.5;
    std::uint64_t encoder_seed = 0;
  };
  auto o = std::make_shared<Opts>();
  auto tc = std::make_shared<train::TrainConfig>();
  add_common(*sub, *c);
  sub->add_option("--data", o->data, "Directory holding train.jsonl and valid.jsonl");
  sub->add_option("--train", o->train, "Training pairs (overrides --data)");
  sub->add_option("--valid", o->valid, "Validation pairs (overrides --data)");
  sub->add_option("--src-embeddings", o->src_emb, "Source static embeddings")->required();
  sub->add_option("--tgt-embeddings", o->tgt_emb, "Target static embeddings")->required();
  sub->add_option("--w-ch2en", o->w_ch2en, "Initial source-to-target mapping")->required();
  sub->add_option("--w-en2ch", o->w_en2ch, "Initial target-to-source mapping")->required();
  sub->add_option("--encoder", o->encoder, "contextual|static")->capture_default_str();
  sub->add_option("--lambda", o->lambda, "Context mixing weight")->capture_default_str();
  sub->add_option("--encoder-seed", o->encoder_seed)->capture_default_str();
  sub->add_option("--mode", o->mode, "mono|en2ch|ch2en|dual")
      ->check(CLI::IsMember({"mono", "en2ch", "ch2en", "dual"}))
      ->capture_default_str();
  sub->add_option("--batch", tc->batch_size, "Mini-batch size")->capture_default_str();
  sub->add_option("--lr", tc->learning_rate, "Adam learning rate")->capture_default_str();
  sub->add_option("--mapping-lr-scale", tc->mapping_lr_scale,
                  "Learning-rate multiplier of the mapping matrices")
      ->capture_default_str();
  sub->add_option("--L", tc->levels, "Stacked attention levels")->capture_default_str();
  sub->add_option("--epochs", tc->epochs)->capture_default_str();
  sub->add_option("--d-hidden", tc->d_hidden, "GRU width (0 = embedding width)")->capture_default_str();
  sub->add_option("--beta", tc->beta, "Retraction strength")->capture_default_str();
  sub->add_option("--neg-ratio", tc->neg_ratio_train, "Negatives per positive")->capture_default_str();
  sub->add_option("--max-len-attr", tc->max_len_attr)->capture_default_str();
  sub->add_option("--max-len-desc", tc->max_len_desc)->capture_default_str();
  sub->add_flag("--freeze-mapping", tc->freeze_mapping, "Keep the mapping matrices fixed");
  return [=] {
    const std::string train_file = !o->train.empty() ? o->train : in_dir(o->data, "train.jsonl");
    const std::string valid_file = !o->valid.empty() ? o->valid : in_dir(o->data, "valid.jsonl");
    if (o->data.empty() && (o->train.empty() || o->valid.empty())) {
      throw ContractError("train needs --data or both --train and --valid");
    }
    const std::vector<std::string> outputs = {in_dir(c->out, "model.json"),
                                              in_dir(c->out, "last.json"),
                                              in_dir(c->out, "epochs.jsonl"),
                                              report_path(*c, "train_report.json")};
    start(*sub, *c, {train_file, valid_file, o->src_emb, o->tgt_emb, o->w_ch2en, o->w_en2ch},
          outputs);
    tc->seed = c->seed;
    tc->mode = match::mode_from_string(o->mode);
    tc->validate();

    auto src = embed::load_embeddings(o->src_emb, "ch");
    auto tgt = embed::load_embeddings(o->tgt_emb, "en");
    if (src.dim() != tgt.dim()) throw DimensionError("embedding tables have different widths");
    const std::size_t d = src.dim();
    auto w1 = align::load_mapping(o->w_ch2en, align::Direction::kCh2En, tc->beta);
    auto w2 = align::load_mapping(o->w_en2ch, align::Direction::kEn2Ch, tc->beta);
    embed::EncoderSpec spec{encoder_kind(o->encoder), d, o->encoder_seed, o->lambda};
    train::Featurizer features(spec, src, spec, tgt, tc->max_len_attr, tc->max_len_desc);
    match::MatchDims dims{d, tc->d_hidden == 0 ? d : tc->d_hidden, tc->levels};
    auto model = match::ClmnModel::init(tc->mode, dims, std::move(w1), std::move(w2),
                                        derive_seed(c->seed, 7), tc->freeze_mapping);

    std::error_code ec;
    fs::remove(outputs[2], ec);
    train::TrainHooks hooks;
    hooks.epoch_log_path = outputs[2];
    hooks.last_checkpoint_path = outputs[1];
    hooks.on_epoch = [](const train::EpochLog& e) { std::cout << train::epoch_log_json(e) << "\n"; };
    auto result = train::train(load_split(train_file), load_split(valid_file), *tc, features,
                               std::move(model), hooks);
    ckpt::save_bundle(*result.best, outputs[0]);
    nlohmann::ordered_json rep;
    rep["best_epoch"] = result.best_epoch;
    rep["best_valid_mrr"] = result.best_valid_mrr;
    rep["epochs"] = result.log.size();
    rep["mode"] = o->mode;
    rep["encoder"] = encoder_name(spec.kind);
    io::write_file_atomic(outputs[3], rep.dump(2) + "\n");
  };
}

Runner add_eval(CLI::App& app) {
  auto* sub = app.add_subcommand("eval", "Rank frozen candidate pools with a trained model");
  auto c = std::make_shared<Common>();
  struct Opts {
    std::string model, data, test, src_emb, tgt_emb, pool_size = "both";
  };
  auto o = std::make_shared<Opts>();
  add_common(*sub, *c);
  sub->add_option("--model", o->model, "Model checkpoint")->required();
  sub->add_option("--data", o->data, "Directory holding test.jsonl");
  sub->add_option("--test", o->test, "Test pairs (overrides --data)");
  sub->add_option("--src-embeddings", o->src_emb, "Source static embeddings")->required();
  sub->add_option("--tgt-embeddings", o->tgt_emb, "Target static embeddings")->required();
  sub->add_option("--pool-size", o->pool_size, "10, 2 or both")
      ->check(CLI::IsMember({"10", "2", "both"}))
      ->capture_default_str();
  return [=] {
    if (o->data.empty() && o->test.empty()) throw ContractError("eval needs --data or --test");
    const std::string test_file = !o->test.empty() ? o->test : in_dir(o->data, "test.jsonl");
    const std::vector<std::string> outputs = {report_path(*c, "metrics.json")};
    start(*sub, *c, {o->model, test_file, o->src_emb, o->tgt_emb}, outputs);
    auto bundle = ckpt::load_bundle(o->model);
    auto src = embed::load_embeddings(o->src_emb, "ch");
    auto tgt = embed::load_embeddings(o->tgt_emb, "en");
    train::Featurizer features(bundle.encoder, src, bundle.encoder, tgt, bundle.max_len_attr,
                               bundle.max_len_desc);
    auto pools = eval::build_pool_set(load_split(test_file), c->seed, o->pool_size != "2",
                                      o->pool_size != "10");
    auto report = eval::evaluate(pools, train::model_scorer(bundle.model, features));
    const std::string json = eval::report_to_json(report);
    io::write_file_atomic(outputs[0], json);
    std::cout << json;
  };
}

Runner add_baseline(CLI::App& app) {
  auto* sub = app.add_subcommand("baseline", "Score test pools with an unsupervised baseline");
  auto c = std::make_shared<Common>();
  struct Opts {
    std::string method, data, test, src_emb, tgt_emb, w_ch2en, src_corpus, tgt_corpus, lexicon;
    std::string pool_size = "both";
    std::size_t csls_k = 10;
  };
  auto o = std::make_shared<Opts>();
  add_common(*sub, *c);
  sub->add_option("--method", o->method, "bwe-agg|bwe-idf|tbtqt")
      ->required()
      ->check(CLI::IsMember({"bwe-agg", "bwe-idf", "tbtqt"}));
  sub->add_option("--data", o->data, "Directory holding test.jsonl");
  sub->add_option("--test", o->test, "Test pairs (overrides --data)");
  sub->add_option("--src-embeddings", o->src_emb, "Source word vectors")->required();
  sub->add_option("--tgt-embeddings", o->tgt_emb, "Target word vectors")->required();
  sub->add_option("--w-ch2en", o->w_ch2en, "Source-to-target mapping")->required();
  sub->add_option("--src-corpus", o->src_corpus, "Source corpus (idf)");
  sub->add_option("--tgt-corpus", o->tgt_corpus, "Target corpus (idf)");
  sub->add_option("--lexicon", o->lexicon, "Translation table for tbtqt (default: CSLS-induced)");
  sub->add_option("--csls-k", o->csls_k)->capture_default_str();
  sub->add_option("--pool-size", o->pool_size, "10, 2 or both")
      ->check(CLI::IsMember({"10", "2", "both"}))
      ->capture_default_str();
  return [=] {
    if (o->data.empty() && o->test.empty()) throw ContractError("baseline needs --data or --test");
    const std::string test_file = !o->test.empty() ? o->test : in_dir(o->data, "test.jsonl");
    const std::vector<std::string> outputs = {report_path(*c, "metrics.json")};
    std::vector<std::string> inputs = {test_file, o->src_emb, o->tgt_emb, o->w_ch2en};
    for (const auto* p : {&o->src_corpus, &o->tgt_corpus, &o->lexicon}) {
      if (!p->empty()) inputs.push_back(*p);
    }
    start(*sub, *c, inputs, outputs);
    const auto method = pipeline::baseline_from_string(o->method);
    auto src = embed::load_embeddings(o->src_emb, "ch");
    auto tgt = embed::load_embeddings(o->tgt_emb, "en");
    auto w = align::load_mapping(o->w_ch2en, align::Direction::kCh2En);
    std::optional<std::vector<data::Tokens>> sc, tc;
    if (!o->src_corpus.empty()) sc = data::load_corpus(o->src_corpus);
    if (!o->tgt_corpus.empty()) tc = data::load_corpus(o->tgt_corpus);
    std::optional<align::SeedLexicon> lex;
    if (!o->lexicon.empty()) lex = align::load_lexicon(o->lexicon);
    pipeline::BaselineScorer scorer(method, src, tgt, w, sc ? &*sc : nullptr, tc ? &*tc : nullptr,
                                    lex, o->csls_k);
    auto pools = eval::build_pool_set(load_split(test_file), c->seed, o->pool_size != "2",
                                      o->pool_size != "10");
    auto report = eval::evaluate(pools, scorer.scorer());
    const std::string json = eval::report_to_json(report);
    io::write_file_atomic(outputs[0], json);
    std::cout << json;
  };
}

}  // namespace clmn::cli
