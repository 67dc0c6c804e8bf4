// SPDX-License-Identifier: Apache-2.0
#include "clmn/encoder.hpp"

#include "clmn/errors.hpp"
#include "clmn/random.hpp"

#include <unordered_map>

namespace clmn::embed {

Eigen::RowVectorXd oov_vector(const std::string& word, std::uint64_t seed, std::size_t dim) {
  Rng rng(derive_seed(fnv1a(word), derive_seed(seed, dim)));
  Eigen::RowVectorXd v(static_cast<Eigen::Index>(dim));
  for (Eigen::Index k = 0; k < v.size(); ++k) v(k) = rng.normal();
  const double n = v.norm();
  if (n > 0) v /= n;
  return v;
}

ContextualMatrix encode(const std::vector<std::string>& tokens, const EncoderSpec& spec,
                        const EmbeddingTable& table) {
  if (tokens.empty()) throw ContractError("encode: empty token list");
  if (spec.dim != table.dim()) {
    throw DimensionError("encode: encoder dim " + std::to_string(spec.dim) +
                         " differs from embedding dim " + std::to_string(table.dim()));
  }
  if (spec.lambda < 0.0 || spec.lambda > 1.0) throw ContractError("encode: lambda outside [0,1]");

  const auto n = static_cast<Eigen::Index>(tokens.size());
  const auto d = static_cast<Eigen::Index>(spec.dim);
  nn::Mat base(n, d);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& tok = tokens[static_cast<std::size_t>(i)];
    if (auto idx = table.find(tok)) {
      base.row(i) = table.row(*idx);
    } else {
      base.row(i) = oov_vector(tok, spec.seed, spec.dim);
    }
  }

  ContextualMatrix out;
  out.tokens = tokens;
  if (spec.kind == EncoderKind::kStaticLookup || spec.lambda == 0.0) {
    out.reps = nn::Tensor::from_mat(std::move(base));
    return out;
  }

  const double lam = spec.lambda;
  nn::Mat mixed(n, d);
  for (Eigen::Index i = 0; i < n; ++i) {
    const bool left = i > 0;
    const bool right = i + 1 < n;
    if (!left && !right) {
      mixed.row(i) = base.row(i);
    } else if (left && right) {
      mixed.row(i) = (1.0 - lam) * base.row(i) + lam * 0.5 * (base.row(i - 1) + base.row(i + 1));
    } else {
      mixed.row(i) = (1.0 - lam) * base.row(i) + lam * base.row(left ? i - 1 : i + 1);
    }
  }
  out.reps = nn::Tensor::from_mat(std::move(mixed));
  return out;
}

EmbeddingTable compute_anchors(const std::vector<std::vector<std::string>>& corpus,
                               const EncoderSpec& spec, const EmbeddingTable& table) {
  if (corpus.empty()) throw ContractError("compute_anchors: empty corpus");
  std::vector<std::string> order;
  std::unordered_map<std::string, std::pair<Eigen::RowVectorXd, std::size_t>> acc;
  for (const auto& doc : corpus) {
    if (doc.empty()) continue;
    const ContextualMatrix cm = encode(doc, spec, table);
    for (std::size_t i = 0; i < doc.size(); ++i) {
      auto it = acc.find(doc[i]);
      if (it == acc.end()) {
        order.push_back(doc[i]);
        acc.emplace(doc[i], std::make_pair(Eigen::RowVectorXd(cm.reps.mat().row(
                                               static_cast<Eigen::Index>(i))),
                                           std::size_t{1}));
      } else {
        // Running mean: repeated identical rows leave the mean bit-exact.
        auto& [mean, count] = it->second;
        ++count;
        mean += (cm.reps.mat().row(static_cast<Eigen::Index>(i)) - mean) / static_cast<double>(count);
      }
    }
  }
  EmbeddingTable anchors(spec.dim, table.language());
  for (const auto& w : order) {
    const Eigen::RowVectorXd& mean = acc.at(w).first;
    anchors.add(w, std::span<const double>(mean.data(), static_cast<std::size_t>(mean.size())));
  }
  return anchors;
}

}  // namespace clmn::embed
