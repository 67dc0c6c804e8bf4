// SPDX-License-Identifier: Apache-2.0
#include "support.hpp"

#include "clmn/alignment.hpp"
#include "clmn/checkpoint.hpp"
#include "clmn/evaluation.hpp"
#include "clmn/io_util.hpp"
#include "clmn/random.hpp"

#include <gtest/gtest.h>
#include <json.hpp>

#include <sys/wait.h>

#include <cstdlib>
#include <fstream>
#include <memory>

#ifndef CLMN_CLI_PATH
#error "CLMN_CLI_PATH must name the clmn executable"
#endif

namespace clmn {
namespace {

using testing::TempDir;

struct RunResult {
  int code = -1;
  std::string out;
  std::string err;
};

int run_counter = 0;

RunResult run(const TempDir& scratch, const std::string& args) {
  const std::string tag = std::to_string(run_counter++);
  const std::string out = scratch.file("stdout" + tag), err = scratch.file("stderr" + tag);
  const std::string cmd = std::string("\"") + CLMN_CLI_PATH + "\" " + args + " >\"" + out + "\" 2>\"" + err + "\"";
  const int status = std::system(cmd.c_str());
  RunResult r;
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.out = io::read_file(out);
  r.err = io::read_file(err);
  return r;
}

const char* kGenerated[] = {"src_embeddings.vec", "tgt_embeddings.vec", "src_corpus.txt", "tgt_corpus.txt",
                            "train.jsonl",        "valid.jsonl",        "test.jsonl",     "gold_lexicon.tsv",
                            "seed_lexicon.tsv",   "heldout_lexicon.tsv", "rotation.map",  "relevance.jsonl"};

std::vector<std::string> digests(const TempDir& dir) {
  std::vector<std::string> out;
  for (const char* name : kGenerated) out.push_back(io::sha256_file(dir.file(name)));
  return out;
}

// One small generated dataset with anchors and alignment, shared by the suite.
class Cli : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    scratch_ = std::make_unique<TempDir>("cli_scratch");
    data_ = std::make_unique<TempDir>("cli_data");
    align_ = std::make_unique<TempDir>("cli_align");
    const std::string gen = "generate --out " + data_->path().string() +
                            " --pairs 1350 --src-vocab 80 --tgt-vocab 80 --filler-vocab 20 --dim 8"
                            " --corpus-docs 200 --seed 3";
    ASSERT_EQ(run(*scratch_, gen).code, 0);
    const std::string anchors = "anchors --out " + align_->path().string() + " --src-embeddings " +
                                data("src_embeddings.vec") + " --tgt-embeddings " + data("tgt_embeddings.vec") +
                                " --src-corpus " + data("src_corpus.txt") + " --tgt-corpus " + data("tgt_corpus.txt");
    ASSERT_EQ(run(*scratch_, anchors).code, 0);
    const std::string al = "align --out " + align_->path().string() + " --src-anchors " +
                           align_->file("src_anchors.vec") + " --tgt-anchors " + align_->file("tgt_anchors.vec") +
                           " --lexicon " + data("seed_lexicon.tsv") + " --heldout-lexicon " +
                           data("heldout_lexicon.tsv");
    ASSERT_EQ(run(*scratch_, al).code, 0);
  }
  static void TearDownTestSuite() {
    scratch_.reset();
    data_.reset();
    align_.reset();
  }

  static std::string data(const std::string& name) { return data_->file(name); }

  static std::string train_args(const TempDir& out, const std::string& extra) {
    return "train --out " + out.path().string() + " --data " + data_->path().string() + " --src-embeddings " +
           data("src_embeddings.vec") + " --tgt-embeddings " + data("tgt_embeddings.vec") + " --w-ch2en " +
           align_->file("w_ch2en.map") + " --w-en2ch " + align_->file("w_en2ch.map") + " " + extra;
  }

  static std::string eval_args(const TempDir& out, const std::string& model, const std::string& extra) {
    return "eval --out " + out.path().string() + " --model " + model + " --data " + data_->path().string() +
           " --src-embeddings " + data("src_embeddings.vec") + " --tgt-embeddings " +
           data("tgt_embeddings.vec") + " " + extra;
  }

  static std::unique_ptr<TempDir> scratch_, data_, align_;
};

std::unique_ptr<TempDir> Cli::scratch_, Cli::data_, Cli::align_;

TEST_F(Cli, GenerateIsReproducibleAndReplayable) {
  TempDir a("cli_gen_a"), b("cli_gen_b"), c("cli_gen_c");
  const std::string args = " --pairs 60 --src-vocab 60 --tgt-vocab 60 --dim 4 --corpus-docs 30 --seed 11";
  ASSERT_EQ(run(*scratch_, "generate --out " + a.path().string() + args).code, 0);
  ASSERT_EQ(run(*scratch_, "generate --out " + b.path().string() + args).code, 0);
  EXPECT_EQ(digests(a), digests(b));
  ASSERT_EQ(run(*scratch_, "generate --config " + a.file("manifest.json") + " --out " + c.path().string()).code, 0);
  EXPECT_EQ(digests(a), digests(c));

  const auto manifest = nlohmann::json::parse(io::read_file(a.file("manifest.json")));
  EXPECT_EQ(manifest["command"], "generate");
  EXPECT_EQ(manifest["seed"], 11);
  EXPECT_EQ(manifest["config"]["pairs"], "60");
}

TEST_F(Cli, UsageErrors) {
  const RunResult missing = run(*scratch_, "generate --pairs 10");
  EXPECT_EQ(missing.code, 106);
  EXPECT_NE(missing.err.find("--out"), std::string::npos) << missing.err;

  const RunResult help = run(*scratch_, "generate --help");
  EXPECT_EQ(help.code, 0);
  EXPECT_NE(help.out.find("13500"), std::string::npos);

  EXPECT_NE(run(*scratch_, "").code, 0);
  EXPECT_NE(run(*scratch_, "frobnicate").code, 0);
}

TEST_F(Cli, AlignOnSelfFixtureIsExact) {
  TempDir out("cli_self");
  const auto words = embed::load_embeddings(align_->file("tgt_anchors.vec")).words();
  std::string lex;
  for (const auto& w : words) lex += w + "\t" + w + "\n";
  io::write_file_atomic(out.file("self.tsv"), lex);
  const std::string args = "align --out " + out.path().string() + " --src-anchors " + align_->file("tgt_anchors.vec") +
                           " --tgt-anchors " + align_->file("tgt_anchors.vec") + " --lexicon " +
                           out.file("self.tsv") + " --heldout-lexicon " + out.file("self.tsv");
  ASSERT_EQ(run(*scratch_, args).code, 0);
  const auto report = nlohmann::json::parse(io::read_file(out.file("align_report.json")));
  EXPECT_EQ(report["precision_at_1_ch2en"].get<double>(), 1.0);
  EXPECT_EQ(report["precision_at_1_en2ch"].get<double>(), 1.0);
  EXPECT_LT(report["ortho_err_ch2en"].get<double>(), 1e-8);
}

TEST_F(Cli, ZeroLearningRateKeepsInitialParameters) {
  TempDir out("cli_lr0");
  ASSERT_EQ(run(*scratch_, train_args(out, "--lr 0 --epochs 1 --L 1 --seed 5")).code, 0);
  const ckpt::ModelBundle trained = ckpt::load_bundle(out.file("model.json"));
  auto w1 = align::load_mapping(align_->file("w_ch2en.map"), align::Direction::kCh2En);
  auto w2 = align::load_mapping(align_->file("w_en2ch.map"), align::Direction::kEn2Ch);
  const match::ClmnModel fresh =
      match::ClmnModel::init(match::Mode::kDual, {8, 8, 1}, w1, w2, derive_seed(5, 7));
  for (const auto& [name, t] : fresh.en().params()) EXPECT_EQ(trained.model.en().params().at(name).mat(), t.mat()) << name;
  for (const auto& [name, t] : fresh.ch().params()) EXPECT_EQ(trained.model.ch().params().at(name).mat(), t.mat()) << name;
  EXPECT_EQ(trained.model.w_ch2en().weight().mat(), w1.weight().mat());
  EXPECT_EQ(trained.model.w_en2ch().weight().mat(), w2.weight().mat());
}

TEST_F(Cli, EveryModeTrainsAndWritesCheckpoints) {
  for (const std::string mode : {"mono", "en2ch", "ch2en", "dual"}) {
    TempDir out("cli_mode_" + mode);
    const RunResult r = run(*scratch_, train_args(out, "--mode " + mode + " --epochs 1 --L 1 --lr 1e-3"));
    ASSERT_EQ(r.code, 0) << mode << ": " << r.err;
    EXPECT_EQ(ckpt::load_bundle(out.file("last.json")).model.mode(), match::mode_from_string(mode));
    const auto report = nlohmann::json::parse(io::read_file(out.file("train_report.json")));
    EXPECT_EQ(report["mode"], mode);
    EXPECT_NE(io::read_file(out.file("epochs.jsonl")).find("\"epoch\":1"), std::string::npos);
  }
  TempDir bad("cli_mode_bad");
  EXPECT_NE(run(*scratch_, train_args(bad, "--mode sideways --epochs 1")).code, 0);
  EXPECT_EQ(run(*scratch_, train_args(bad, "--batch 0 --epochs 1")).code, 1);
}

TEST_F(Cli, EvalPoolSizesAndDeterminism) {
  TempDir model("cli_eval_model");
  ASSERT_EQ(run(*scratch_, train_args(model, "--lr 0 --epochs 1 --L 1 --seed 2")).code, 0);
  TempDir a("cli_eval_a"), b("cli_eval_b"), two("cli_eval_2");
  ASSERT_EQ(run(*scratch_, eval_args(a, model.file("model.json"), "--seed 4")).code, 0);
  ASSERT_EQ(run(*scratch_, eval_args(b, model.file("model.json"), "--seed 4")).code, 0);
  EXPECT_EQ(io::read_file(a.file("metrics.json")), io::read_file(b.file("metrics.json")));

  const eval::MetricsReport untrained = eval::report_from_json(io::read_file(a.file("metrics.json")));
  EXPECT_NEAR(*untrained.r10_at_1, 0.1, 0.03);
  EXPECT_TRUE(untrained.r2_at_1.has_value());

  ASSERT_EQ(run(*scratch_, eval_args(two, model.file("model.json"), "--pool-size 2")).code, 0);
  const eval::MetricsReport r2 = eval::report_from_json(io::read_file(two.file("metrics.json")));
  EXPECT_TRUE(r2.r2_at_1.has_value());
  EXPECT_FALSE(r2.r10_at_1.has_value());
  EXPECT_FALSE(r2.mrr.has_value());
  EXPECT_NE(run(*scratch_, eval_args(two, model.file("model.json"), "--pool-size 3")).code, 0);
}

TEST_F(Cli, BaselineWithGoldLexiconOnCleanData) {
  TempDir clean("cli_clean"), out("cli_baseline");
  ASSERT_EQ(run(*scratch_, "generate --out " + clean.path().string() +
                               " --pairs 300 --src-vocab 500 --tgt-vocab 500 --filler-vocab 40 --dim 64"
                               " --corpus-docs 300 --noise-rate 0 --attr-keep 1 --seed 4")
                .code,
            0);
  const std::string common = "baseline --out " + out.path().string() + " --data " + clean.path().string() +
                             " --src-embeddings " + clean.file("src_embeddings.vec") + " --tgt-embeddings " +
                             clean.file("tgt_embeddings.vec") + " --w-ch2en " + clean.file("rotation.map") +
                             " --src-corpus " + clean.file("src_corpus.txt") + " --tgt-corpus " +
                             clean.file("tgt_corpus.txt");
  const RunResult r = run(*scratch_, common + " --method tbtqt --lexicon " + clean.file("gold_lexicon.tsv"));
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_GE(*eval::report_from_json(io::read_file(out.file("metrics.json"))).r10_at_1, 0.95);
  EXPECT_NE(run(*scratch_, common + " --method bm25").code, 0);
}

}  // namespace
}  // namespace clmn
