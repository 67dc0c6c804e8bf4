// SPDX-License-Identifier: Apache-2.0
#include "clmn/alignment.hpp"

#include "clmn/errors.hpp"
#include "clmn/io_util.hpp"
#include "clmn/random.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>
#include <unordered_map>

namespace clmn::align {

std::string to_string(Direction d) { return d == Direction::kCh2En ? "ch2en" : "en2ch"; }

Direction direction_from_string(const std::string& s) {
  if (s == "ch2en") return Direction::kCh2En;
  if (s == "en2ch") return Direction::kEn2Ch;
  throw ContractError("unknown mapping direction: " + s);
}

MappingMatrix::MappingMatrix(nn::Tensor w, Direction direction, double beta)
    : w_(std::move(w)), direction_(direction), beta_(beta) {
  if (w_.rank() != 2 || w_.rows() != w_.cols()) {
    throw DimensionError("mapping matrix must be square, got " + nn::shape_string(w_.shape()));
  }
  if (!(beta_ > 0.0 && beta_ < 0.5)) throw ContractError("retraction beta must lie in (0, 0.5)");
}

MappingMatrix MappingMatrix::identity(std::size_t dim, Direction direction, double beta) {
  const auto d = static_cast<Eigen::Index>(dim);
  return MappingMatrix(nn::Tensor::from_mat(nn::Mat::Identity(d, d)), direction, beta);
}

SeedLexicon SeedLexicon::reversed() const {
  SeedLexicon r;
  r.pairs.reserve(pairs.size());
  for (const auto& [s, t] : pairs) r.pairs.emplace_back(t, s);
  return r;
}

double orthogonality_error(const nn::Mat& w) {
  if (w.rows() != w.cols()) {
    throw DimensionError("orthogonality_error: matrix is " + std::to_string(w.rows()) + "x" +
                         std::to_string(w.cols()));
  }
  nn::Mat gram = w * w.transpose();
  gram.diagonal().array() -= 1.0;
  return gram.norm();
}

void retract_in_place(nn::Mat& w, double beta) {
  nn::Mat wwt_w = (w * w.transpose()) * w;
  w = (1.0 + beta) * w - beta * wwt_w;
}

MappingMatrix orthogonal_retraction(const MappingMatrix& m) {
  MappingMatrix out = m;
  retract_in_place(out.weight().mat(), m.beta());
  return out;
}

ProcrustesResult procrustes_init(const embed::EmbeddingTable& src_anchors,
                                 const embed::EmbeddingTable& tgt_anchors,
                                 const SeedLexicon& lexicon, Direction direction, double beta) {
  if (src_anchors.dim() != tgt_anchors.dim()) {
    throw DimensionError("procrustes_init: source dim " + std::to_string(src_anchors.dim()) +
                         " vs target dim " + std::to_string(tgt_anchors.dim()));
  }
  if (lexicon.empty()) throw ContractError("procrustes_init: empty seed lexicon");
  const auto d = static_cast<Eigen::Index>(src_anchors.dim());
  const auto n = static_cast<Eigen::Index>(lexicon.size());

  nn::Mat x(n, d);
  nn::Mat y(n, d);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& [s, t] = lexicon.pairs[static_cast<std::size_t>(i)];
    auto si = src_anchors.find(s);
    if (!si) throw LookupError("procrustes_init: source word not in anchors: " + s);
    auto ti = tgt_anchors.find(t);
    if (!ti) throw LookupError("procrustes_init: target word not in anchors: " + t);
    x.row(i) = src_anchors.row(*si);
    y.row(i) = tgt_anchors.row(*ti);
  }

  std::vector<std::string> warnings;
  if (n < d) {
    warnings.push_back("seed lexicon has " + std::to_string(n) + " pairs, fewer than dim " +
                       std::to_string(d) + "; solution is underdetermined");
  }

  const Eigen::MatrixXd cross = x.transpose() * y;
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(cross, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  const double smax = sv.size() ? sv(0) : 0.0;
  const double smin = sv.size() ? sv(sv.size() - 1) : 0.0;
  if (smax == 0.0 || smin <= 1e-10 * smax) {
    warnings.push_back("cross-covariance X^T Y is rank deficient (sigma_min/sigma_max = " +
                       embed::format_double(smax == 0.0 ? 0.0 : smin / smax) +
                       "); mapping is not unique");
  }
  nn::Mat w = svd.matrixU() * svd.matrixV().transpose();
  return {MappingMatrix(nn::Tensor::from_mat(std::move(w)), direction, beta),
          std::move(warnings)};
}

embed::ContextualMatrix map_reps(const MappingMatrix& m, const embed::ContextualMatrix& reps) {
  if (static_cast<std::size_t>(reps.reps.cols()) != m.dim()) {
    throw DimensionError("map_reps: representation dim " + std::to_string(reps.reps.cols()) +
                         " vs mapping dim " + std::to_string(m.dim()));
  }
  embed::ContextualMatrix out;
  out.tokens = reps.tokens;
  out.reps = nn::Tensor::from_mat(reps.reps.mat() * m.weight().mat());
  return out;
}

namespace {

nn::Mat normalized_rows(const nn::Mat& m) {
  nn::Mat out = m;
  for (Eigen::Index i = 0; i < out.rows(); ++i) {
    const double n = out.row(i).norm();
    if (n > 0) out.row(i) /= n;
  }
  return out;
}

std::vector<std::size_t> sorted_order(const std::vector<std::string>& words) {
  std::vector<std::size_t> idx(words.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(), [&](auto a, auto b) { return words[a] < words[b]; });
  return idx;
}

double mean_top_k(std::vector<double>& buf, std::size_t k) {
  std::partial_sort(buf.begin(), buf.begin() + static_cast<std::ptrdiff_t>(k), buf.end(),
                    std::greater<>());
  double s = 0.0;
  for (std::size_t i = 0; i < k; ++i) s += buf[i];
  return s / static_cast<double>(k);
}

}  // namespace

CslsResult csls_lexicon(const MappingMatrix& m, const embed::EmbeddingTable& src,
                        const embed::EmbeddingTable& tgt, std::size_t k) {
  if (k == 0) throw ContractError("csls_lexicon: k must be at least 1");
  if (src.size() == 0 || tgt.size() == 0) throw ContractError("csls_lexicon: empty table");
  if (src.dim() != m.dim() || tgt.dim() != m.dim()) {
    throw DimensionError("csls_lexicon: table dims " + std::to_string(src.dim()) + "/" +
                         std::to_string(tgt.dim()) + " vs mapping dim " +
                         std::to_string(m.dim()));
  }
  CslsResult result;
  std::size_t k_t = k;
  std::size_t k_s = k;
  if (k > tgt.size()) {
    result.warnings.push_back("csls k=" + std::to_string(k) + " exceeds target vocabulary " +
                              std::to_string(tgt.size()) + "; clamped");
    k_t = tgt.size();
  }
  if (k > src.size()) {
    result.warnings.push_back("csls k=" + std::to_string(k) + " exceeds source vocabulary " +
                              std::to_string(src.size()) + "; clamped");
    k_s = src.size();
  }

  // Sorted processing makes the output independent of table insertion order.
  const auto s_order = sorted_order(src.words());
  const auto t_order = sorted_order(tgt.words());
  const auto ns = static_cast<Eigen::Index>(s_order.size());
  const auto nt = static_cast<Eigen::Index>(t_order.size());
  const auto d = static_cast<Eigen::Index>(m.dim());
  nn::Mat xs(ns, d);
  nn::Mat yt(nt, d);
  for (Eigen::Index i = 0; i < ns; ++i) xs.row(i) = src.row(s_order[static_cast<std::size_t>(i)]);
  for (Eigen::Index j = 0; j < nt; ++j) yt.row(j) = tgt.row(t_order[static_cast<std::size_t>(j)]);

  const nn::Mat mapped = normalized_rows(xs * m.weight().mat());
  const nn::Mat targets = normalized_rows(yt);
  const nn::Mat cos = mapped * targets.transpose();

  std::vector<double> r_t(static_cast<std::size_t>(ns));
  std::vector<double> r_s(static_cast<std::size_t>(nt));
  std::vector<double> buf;
  for (Eigen::Index i = 0; i < ns; ++i) {
    buf.assign(cos.row(i).data(), cos.row(i).data() + nt);
    r_t[static_cast<std::size_t>(i)] = mean_top_k(buf, k_t);
  }
  for (Eigen::Index j = 0; j < nt; ++j) {
    buf.resize(static_cast<std::size_t>(ns));
    for (Eigen::Index i = 0; i < ns; ++i) buf[static_cast<std::size_t>(i)] = cos(i, j);
    r_s[static_cast<std::size_t>(j)] = mean_top_k(buf, k_s);
  }

  result.lexicon.pairs.reserve(static_cast<std::size_t>(ns));
  for (Eigen::Index i = 0; i < ns; ++i) {
    Eigen::Index best = 0;
    double best_score = -std::numeric_limits<double>::infinity();
    for (Eigen::Index j = 0; j < nt; ++j) {
      const double score =
          2.0 * cos(i, j) - r_t[static_cast<std::size_t>(i)] - r_s[static_cast<std::size_t>(j)];
      if (score > best_score) {  // strict: earlier (smaller) word wins ties
        best_score = score;
        best = j;
      }
    }
    result.lexicon.pairs.emplace_back(src.words()[s_order[static_cast<std::size_t>(i)]],
                                      tgt.words()[t_order[static_cast<std::size_t>(best)]]);
  }
  return result;
}

double lexicon_precision(const SeedLexicon& induced, const SeedLexicon& gold) {
  if (gold.empty()) throw ContractError("lexicon_precision: empty gold lexicon");
  std::unordered_map<std::string, std::string> table;
  for (const auto& [s, t] : induced.pairs) table.emplace(s, t);
  std::size_t hits = 0;
  for (const auto& [s, t] : gold.pairs) {
    auto it = table.find(s);
    if (it != table.end() && it->second == t) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(gold.size());
}

LexiconSplit split_lexicon(const SeedLexicon& lex, double heldout_fraction, std::uint64_t seed) {
  if (!(heldout_fraction >= 0.0 && heldout_fraction < 1.0)) {
    throw ContractError("split_lexicon: held-out fraction must lie in [0, 1)");
  }
  std::vector<std::size_t> order(lex.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  Rng rng(seed);
  rng.shuffle(order);
  const auto seed_n = static_cast<std::size_t>(
      std::llround(static_cast<double>(lex.size()) * (1.0 - heldout_fraction)));
  std::vector<bool> in_seed(lex.size(), false);
  for (std::size_t i = 0; i < seed_n; ++i) in_seed[order[i]] = true;
  LexiconSplit out;
  for (std::size_t i = 0; i < lex.size(); ++i) {
    (in_seed[i] ? out.seed : out.heldout).pairs.push_back(lex.pairs[i]);
  }
  return out;
}

embed::EmbeddingTable subset_table(const embed::EmbeddingTable& table,
                                   const std::vector<std::string>& words) {
  embed::EmbeddingTable out(table.dim(), table.language());
  for (const auto& w : words) {
    auto idx = table.find(w);
    if (!idx || out.contains(w)) continue;
    const auto row = table.row(*idx);
    out.add(w, std::span<const double>(row.data(), static_cast<std::size_t>(row.size())));
  }
  return out;
}

SeedLexicon load_lexicon(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open lexicon: " + path);
  SeedLexicon lex;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos || tab == 0 || tab + 1 == line.size() ||
        line.find('\t', tab + 1) != std::string::npos) {
      throw ParseError(path + ": line " + std::to_string(lineno) +
                       ": expected 'source<TAB>target'");
    }
    lex.pairs.emplace_back(line.substr(0, tab), line.substr(tab + 1));
  }
  return lex;
}

void save_lexicon(const SeedLexicon& lex, const std::string& path) {
  std::ostringstream os;
  for (const auto& [s, t] : lex.pairs) os << s << '\t' << t << '\n';
  io::write_file_atomic(path, os.str());
}

embed::EmbeddingTable mapping_to_table(const nn::Mat& w) {
  embed::EmbeddingTable table(static_cast<std::size_t>(w.cols()));
  for (Eigen::Index i = 0; i < w.rows(); ++i) {
    Eigen::RowVectorXd r = w.row(i);
    table.add("row_" + std::to_string(i),
              std::span<const double>(r.data(), static_cast<std::size_t>(r.size())));
  }
  return table;
}

MappingMatrix load_mapping(const std::string& path, Direction direction, double beta) {
  const embed::EmbeddingTable table = embed::load_embeddings(path);
  if (table.size() != table.dim()) {
    throw DimensionError(path + ": mapping checkpoint has " + std::to_string(table.size()) +
                         " rows but dim " + std::to_string(table.dim()));
  }
  const auto d = static_cast<Eigen::Index>(table.dim());
  nn::Mat w(d, d);
  for (Eigen::Index i = 0; i < d; ++i) {
    auto idx = table.find("row_" + std::to_string(i));
    if (!idx) throw ParseError(path + ": missing row_" + std::to_string(i));
    w.row(i) = table.row(*idx);
  }
  return MappingMatrix(nn::Tensor::from_mat(std::move(w)), direction, beta);
}

void save_mapping(const MappingMatrix& m, const std::string& path) {
  embed::save_embeddings(mapping_to_table(m.weight().mat()), path);
}

}  // namespace clmn::align
