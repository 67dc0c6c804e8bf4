// SPDX-License-Identifier: Apache-2.0
#include "clmn/synthetic.hpp"

#include "clmn/errors.hpp"
#include "clmn/random.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_set>

namespace clmn::data {

namespace {

std::string padded(char prefix, std::size_t i, std::size_t vocab) {
  std::size_t width = std::max<std::size_t>(4, std::to_string(vocab).size());
  std::string num = std::to_string(i + 1);
  return std::string(1, prefix) + std::string(width - std::min(width, num.size()), '0') + num;
}

class Zipf {
 public:
  Zipf(std::size_t n, double s) : cdf_(n) {
    double acc = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      acc += 1.0 / std::pow(static_cast<double>(k + 1), s);
      cdf_[k] = acc;
    }
    for (auto& c : cdf_) c /= acc;
  }
  std::size_t operator()(Rng& rng) const {
    const double u = rng.uniform();
    auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
    return std::min<std::size_t>(static_cast<std::size_t>(it - cdf_.begin()), cdf_.size() - 1);
  }

 private:
  std::vector<double> cdf_;
};

/// min + Geometric(p) with the requested mean, clamped to [min, max].
std::size_t sample_length(Rng& rng, double mean, std::size_t min, std::size_t max) {
  const double excess = std::max(mean - static_cast<double>(min), 0.0);
  if (excess == 0.0) return min;
  const double p = 1.0 / (excess + 1.0);
  double u = rng.uniform();
  while (u <= 0.0) u = rng.uniform();
  const auto extra = static_cast<std::size_t>(std::floor(std::log(u) / std::log(1.0 - p)));
  return std::clamp(min + extra, min, max);
}

Eigen::RowVectorXd random_vector(Rng& rng, std::size_t dim, double norm) {
  Eigen::RowVectorXd v(static_cast<Eigen::Index>(dim));
  for (Eigen::Index k = 0; k < v.size(); ++k) v(k) = rng.normal();
  return v * (norm / v.norm());
}

void add_row(embed::EmbeddingTable& t, const std::string& w, const Eigen::RowVectorXd& v) {
  t.add(w, std::span<const double>(v.data(), static_cast<std::size_t>(v.size())));
}

std::vector<std::size_t> sample_attribute_set(Rng& rng, const Zipf& zipf, std::size_t len) {
  std::vector<std::size_t> out;
  std::unordered_set<std::size_t> seen;
  while (out.size() < len) {
    const std::size_t w = zipf(rng);
    if (seen.insert(w).second) out.push_back(w);
  }
  return out;
}

}  // namespace

std::string source_word(std::size_t i, std::size_t vocab) { return padded('s', i, vocab); }
std::string target_word(std::size_t i, std::size_t vocab) { return padded('t', i, vocab); }
std::string filler_word(std::size_t i, std::size_t vocab) { return padded('f', i, vocab); }

nn::Mat random_orthogonal(std::size_t dim, std::uint64_t seed) {
  Rng rng(seed);
  const auto d = static_cast<Eigen::Index>(dim);
  Eigen::MatrixXd g(d, d);
  for (Eigen::Index i = 0; i < d; ++i)
    for (Eigen::Index j = 0; j < d; ++j) g(i, j) = rng.normal();
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
  Eigen::MatrixXd q = qr.householderQ();
  const Eigen::MatrixXd r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (Eigen::Index j = 0; j < d; ++j) {
    if (r(j, j) < 0) q.col(j) *= -1.0;
  }
  return q;
}

SynthData generate_synthetic(const SynthConfig& cfg) {
  if (cfg.src_vocab < 50 || cfg.tgt_vocab < 50) throw ContractError("synthetic: vocab must be >= 50");
  if (cfg.pair_count < 10) throw ContractError("synthetic: pair_count must be >= 10");
  if (!(cfg.noise_rate >= 0.0 && cfg.noise_rate < 1.0)) {
    throw ContractError("synthetic: noise_rate must lie in [0, 1)");
  }
  if (cfg.noise_rate > 0.0 && cfg.filler_vocab == 0) {
    throw ContractError("synthetic: noise_rate > 0 needs a filler vocabulary");
  }
  if (!(cfg.attr_keep > 0.0 && cfg.attr_keep <= 1.0)) {
    throw ContractError("synthetic: attr_keep must lie in (0, 1]");
  }
  if (cfg.dim == 0) throw ContractError("synthetic: dim must be positive");

  SynthData out;
  const std::size_t linked = std::min(cfg.src_vocab, cfg.tgt_vocab);
  out.rotation = random_orthogonal(cfg.dim, cfg.rotation_seed);

  Rng emb_rng(derive_seed(cfg.seed, 1));
  out.src_static = embed::EmbeddingTable(cfg.dim, "src");
  out.tgt_static = embed::EmbeddingTable(cfg.dim, "tgt");
  std::vector<Eigen::RowVectorXd> src_vecs;
  src_vecs.reserve(cfg.src_vocab);
  for (std::size_t i = 0; i < cfg.src_vocab; ++i) {
    src_vecs.push_back(random_vector(emb_rng, cfg.dim, cfg.embed_norm));
    add_row(out.src_static, source_word(i, cfg.src_vocab), src_vecs.back());
  }
  const double noise_sd = cfg.embed_noise * cfg.embed_norm / std::sqrt(static_cast<double>(cfg.dim));
  for (std::size_t i = 0; i < cfg.tgt_vocab; ++i) {
    Eigen::RowVectorXd v;
    if (i < linked) {
      v = src_vecs[i] * out.rotation;
      if (noise_sd > 0.0) {
        for (Eigen::Index k = 0; k < v.size(); ++k) v(k) += noise_sd * emb_rng.normal();
      }
      out.gold_lexicon.pairs.emplace_back(source_word(i, cfg.src_vocab),
                                          target_word(i, cfg.tgt_vocab));
    } else {
      v = random_vector(emb_rng, cfg.dim, cfg.embed_norm);
    }
    add_row(out.tgt_static, target_word(i, cfg.tgt_vocab), v);
  }
  for (std::size_t i = 0; i < cfg.filler_vocab; ++i) {
    add_row(out.tgt_static, filler_word(i, cfg.filler_vocab),
            random_vector(emb_rng, cfg.dim, cfg.embed_norm));
  }

  const Zipf src_zipf(cfg.src_vocab, cfg.zipf_exponent);
  const Zipf filler_zipf(std::max<std::size_t>(cfg.filler_vocab, 1), cfg.zipf_exponent);

  // One attribute set and its description. Untranslatable attributes (beyond
  // the linked range) are never kept.
  auto make_pair = [&](Rng& rng, Tokens& attrs, Tokens& desc, std::vector<bool>& origin) {
    const std::size_t alen =
        std::min(sample_length(rng, cfg.attr_len_mean, 3, 50), cfg.src_vocab);
    const auto attr_ids = sample_attribute_set(rng, src_zipf, alen);
    std::vector<std::size_t> kept;
    for (auto w : attr_ids) {
      if (w < linked && rng.uniform() < cfg.attr_keep) kept.push_back(w);
    }
    if (kept.empty()) {
      for (auto w : attr_ids) {
        if (w < linked) {
          kept.push_back(w);
          break;
        }
      }
    }
    const std::size_t dlen = sample_length(rng, cfg.desc_len_mean, 5, 100);
    attrs.clear();
    desc.clear();
    origin.clear();
    for (auto w : attr_ids) attrs.push_back(source_word(w, cfg.src_vocab));
    for (std::size_t k = 0; k < dlen; ++k) {
      const bool filler = kept.empty() || rng.uniform() < cfg.noise_rate;
      if (filler) {
        desc.push_back(filler_word(filler_zipf(rng), cfg.filler_vocab));
      } else {
        desc.push_back(target_word(kept[rng.index(kept.size())], cfg.tgt_vocab));
      }
      origin.push_back(!filler);
    }
  };

  Rng pair_rng(derive_seed(cfg.seed, 2));
  const std::size_t id_width = std::to_string(cfg.pair_count).size();
  out.pairs.reserve(cfg.pair_count);
  for (std::size_t i = 0; i < cfg.pair_count; ++i) {
    PairExample ex;
    std::string num = std::to_string(i);
    ex.id = "p" + std::string(id_width - num.size(), '0') + num;
    ex.desc_id = ex.id;
    ex.label = 1;
    std::vector<bool> origin;
    make_pair(pair_rng, ex.attributes, ex.description, origin);
    out.pairs.push_back(std::move(ex));
    out.desc_is_translation.push_back(std::move(origin));
  }

  Rng corpus_rng(derive_seed(cfg.seed, 3));
  for (std::size_t i = 0; i < cfg.corpus_docs; ++i) {
    Tokens attrs;
    Tokens desc;
    std::vector<bool> origin;
    make_pair(corpus_rng, attrs, desc, origin);
    out.src_corpus.push_back(std::move(attrs));
    out.tgt_corpus.push_back(std::move(desc));
  }
  return out;
}

}  // namespace clmn::data
