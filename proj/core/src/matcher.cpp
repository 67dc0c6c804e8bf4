// SPDX-License-Identifier: Apache-2.0
#include "clmn/matcher.hpp"

#include "clmn/errors.hpp"
#include "clmn/ops.hpp"
#include "clmn/random.hpp"

#include <cmath>

namespace clmn::match {

namespace {

nn::Tensor uniform_matrix(std::size_t rows, std::size_t cols, double bound, Rng& rng) {
  nn::Tensor t = nn::Tensor::zeros({rows, cols});
  for (double& v : t.data()) v = rng.uniform(-bound, bound);
  return t;
}

double xavier(std::size_t fan_in, std::size_t fan_out) {
  return std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
}

struct ParamSpec {
  std::string name;
  nn::Shape shape;
};

std::vector<ParamSpec> param_specs(const MatchDims& dims) {
  const std::size_t d = dims.d_model;
  const std::size_t h = dims.d_hidden;
  std::vector<ParamSpec> specs;
  for (std::size_t l = 1; l <= dims.levels; ++l) {
    for (const char* r : {"self", "cross"}) {
      const std::string base = "stack." + std::to_string(l) + "." + r;
      specs.push_back({base + ".weight", {d, d}});
      specs.push_back({base + ".bias", {d}});
    }
  }
  specs.push_back({"fuse.weight", {4 * d, d}});
  specs.push_back({"fuse.bias", {d}});
  for (const char* side : {"attr", "desc"}) {
    for (std::size_t k = 1; k <= 2; ++k) {
      const std::string base = std::string("gru.") + side + "." + std::to_string(k);
      specs.push_back({base + ".input_weight", {k == 1 ? d : h, 3 * h}});
      specs.push_back({base + ".recurrent_weight", {h, 3 * h}});
      specs.push_back({base + ".bias", {3 * h}});
    }
  }
  specs.push_back({"output.weight", {4 * dims.levels * h, 1}});
  specs.push_back({"output.bias", {1}});
  return specs;
}

void validate_dims(const MatchDims& dims) {
  if (dims.d_model == 0 || dims.d_hidden == 0) throw ContractError("model widths must be positive");
  if (dims.levels == 0) throw ContractError("at least one attention level (L >= 1) is required");
}

}  // namespace

MatchModelParams MatchModelParams::init(const MatchDims& dims, std::uint64_t seed) {
  validate_dims(dims);
  Rng rng(seed);
  MatchModelParams m;
  m.dims_ = dims;
  const double gru_bound = 1.0 / std::sqrt(static_cast<double>(dims.d_hidden));
  for (const auto& spec : param_specs(dims)) {
    nn::Tensor t;
    const bool is_bias = spec.shape.size() == 1;
    if (is_bias) {
      t = nn::Tensor::zeros(spec.shape);
    } else if (spec.name.rfind("gru.", 0) == 0) {
      t = uniform_matrix(spec.shape[0], spec.shape[1], gru_bound, rng);
    } else {
      t = uniform_matrix(spec.shape[0], spec.shape[1], xavier(spec.shape[0], spec.shape[1]), rng);
    }
    m.params_.add(spec.name, std::move(t));
  }
  return m;
}

MatchModelParams MatchModelParams::from_params(const MatchDims& dims, nn::ParamSet params) {
  validate_dims(dims);
  const auto specs = param_specs(dims);
  if (params.size() != specs.size()) {
    throw ContractError("match model expects " + std::to_string(specs.size()) +
                        " parameters, got " + std::to_string(params.size()));
  }
  for (const auto& spec : specs) {
    const nn::Tensor& t = params.at(spec.name);
    if (t.shape() != spec.shape) {
      throw DimensionError("parameter " + spec.name + " has shape " + nn::shape_string(t.shape()) +
                           ", expected " + nn::shape_string(spec.shape));
    }
  }
  MatchModelParams m;
  m.dims_ = dims;
  m.params_ = std::move(params);
  return m;
}

BoundParams bind(nn::Graph& g, const MatchModelParams& m, const std::string& prefix) {
  const auto& ps = m.params();
  auto p = [&](const std::string& name) { return g.param(prefix + name, ps.at(name)); };
  BoundParams b;
  b.dims = m.dims();
  for (std::size_t l = 1; l <= m.dims().levels; ++l) {
    const std::string base = "stack." + std::to_string(l) + ".";
    b.levels.push_back({p(base + "self.weight"), p(base + "self.bias"), p(base + "cross.weight"),
                        p(base + "cross.bias")});
  }
  b.fuse_weight = p("fuse.weight");
  b.fuse_bias = p("fuse.bias");
  for (int k = 0; k < 2; ++k) {
    const std::string a = "gru.attr." + std::to_string(k + 1) + ".";
    const std::string d = "gru.desc." + std::to_string(k + 1) + ".";
    b.attr_gru[k] = {p(a + "input_weight"), p(a + "recurrent_weight"), p(a + "bias")};
    b.desc_gru[k] = {p(d + "input_weight"), p(d + "recurrent_weight"), p(d + "bias")};
  }
  b.output_weight = p("output.weight");
  b.output_bias = p("output.bias");
  return b;
}

nn::Var attention(const nn::Var& q, const nn::Var& k, const nn::Var& v) {
  if (q.rows() == 0 || k.rows() == 0) throw ContractError("attention: empty query or key");
  if (k.rows() != v.rows()) {
    throw DimensionError("attention: key has " + std::to_string(k.rows()) + " rows, value has " +
                         std::to_string(v.rows()));
  }
  if (q.cols() != k.cols()) {
    throw DimensionError("attention: query width " + std::to_string(q.cols()) +
                         " vs key width " + std::to_string(k.cols()));
  }
  const double inv_sqrt_d = 1.0 / std::sqrt(static_cast<double>(q.cols()));
  nn::Var weights = nn::softmax_rows(nn::scale(nn::matmul_nt(q, k), inv_sqrt_d));
  return nn::matmul(weights, v);
}

namespace {

nn::Var project_residual(const nn::Var& x, const nn::Var& attended, const nn::Var& w,
                         const nn::Var& b) {
  return nn::add(x, nn::add_bias(nn::matmul(attended, w), b));
}

}  // namespace

RepStack build_stack(const nn::Var& attrs, const nn::Var& desc, const BoundParams& p) {
  if (attrs.rows() == 0 || desc.rows() == 0) throw ContractError("build_stack: empty input");
  const auto d = static_cast<Eigen::Index>(p.dims.d_model);
  if (attrs.cols() != d || desc.cols() != d) {
    throw DimensionError("build_stack: inputs have widths " + std::to_string(attrs.cols()) + "/" +
                         std::to_string(desc.cols()) + ", model width is " + std::to_string(d));
  }
  RepStack stack;
  nn::Var a_prev = attrs;
  nn::Var d_prev = desc;
  for (const auto& lv : p.levels) {
    RepStack::Level out;
    out.attr_self =
        project_residual(a_prev, attention(a_prev, a_prev, a_prev), lv.self_weight, lv.self_bias);
    out.desc_self =
        project_residual(d_prev, attention(d_prev, d_prev, d_prev), lv.self_weight, lv.self_bias);
    out.attr_cross = project_residual(a_prev, attention(a_prev, d_prev, d_prev), lv.cross_weight,
                                      lv.cross_bias);
    out.desc_cross = project_residual(d_prev, attention(d_prev, a_prev, a_prev), lv.cross_weight,
                                      lv.cross_bias);
    a_prev = out.attr_self;
    d_prev = out.desc_self;
    stack.levels.push_back(out);
  }
  return stack;
}

Interaction interact(const nn::Var& a, const nn::Var& d) {
  if (a.cols() != d.cols()) {
    throw DimensionError("interact: widths " + std::to_string(a.cols()) + " vs " +
                         std::to_string(d.cols()));
  }
  const double inv_sqrt_d = 1.0 / std::sqrt(static_cast<double>(a.cols()));
  Interaction out;
  out.m = nn::scale(nn::matmul_nt(a, d), inv_sqrt_d);
  out.attr_hat = nn::matmul(nn::softmax_rows(out.m), d);
  out.desc_hat = nn::matmul(nn::softmax_rows(nn::transpose(out.m)), a);
  return out;
}

nn::Var fuse(const nn::Var& x, const nn::Var& x_hat, const BoundParams& p) {
  if (x.rows() != x_hat.rows() || x.cols() != x_hat.cols()) {
    throw DimensionError("fuse: shapes differ [" + std::to_string(x.rows()) + "x" +
                         std::to_string(x.cols()) + "] vs [" + std::to_string(x_hat.rows()) + "x" +
                         std::to_string(x_hat.cols()) + "]");
  }
  nn::Var features =
      nn::concat_cols({nn::hadamard(x, x_hat), nn::sub(x, x_hat), x, x_hat});
  return nn::relu(nn::add_bias(nn::matmul(features, p.fuse_weight), p.fuse_bias));
}

namespace {

nn::Var summarize(nn::Var x, const nn::GruWeights (&layers)[2], const nn::Var& h0,
                  Eigen::Index batch) {
  nn::GruOutput first = nn::gru_layer(x, layers[0], h0, batch);
  nn::GruOutput second = nn::gru_layer(first.states, layers[1], h0, batch);
  return second.last;
}

}  // namespace

nn::Var aggregate_logit(const RepStack& stack, const BoundParams& p) {
  if (stack.levels.size() != p.levels.size()) {
    throw ContractError("aggregate: stack has " + std::to_string(stack.levels.size()) +
                        " levels, model expects " + std::to_string(p.levels.size()));
  }
  nn::Graph& g = p.output_weight.graph();
  const nn::Var h0 = g.constant(nn::Mat::Zero(1, static_cast<Eigen::Index>(p.dims.d_hidden)));
  // All (level, type) pairs share the fuse layer and each side's GRUs, and
  // sequences on one side have equal length, so they run as one batch.
  std::vector<nn::Var> attrs, attr_hats, descs, desc_hats;
  for (const auto& lv : stack.levels) {
    for (int r = 0; r < 2; ++r) {
      const nn::Var& a = r == 0 ? lv.attr_self : lv.attr_cross;
      const nn::Var& d = r == 0 ? lv.desc_self : lv.desc_cross;
      Interaction it = interact(a, d);
      attrs.push_back(a);
      attr_hats.push_back(it.attr_hat);
      descs.push_back(d);
      desc_hats.push_back(it.desc_hat);
    }
  }
  const auto pairs = static_cast<Eigen::Index>(attrs.size());
  nn::Var a_fused = fuse(nn::concat_rows(attrs), nn::concat_rows(attr_hats), p);
  nn::Var d_fused = fuse(nn::concat_rows(descs), nn::concat_rows(desc_hats), p);
  nn::Var a_last = summarize(a_fused, p.attr_gru, h0, pairs);
  nn::Var d_last = summarize(d_fused, p.desc_gru, h0, pairs);
  // Row k of [a_last | d_last] is pair k's (attribute, description) states;
  // flattening row-major gives the feature order of the output layer.
  nn::Var both = nn::concat_cols({a_last, d_last});
  nn::Var all = nn::reshape(both, 1, both.rows() * both.cols());
  return nn::add_bias(nn::matmul(all, p.output_weight), p.output_bias);
}

nn::Var aggregate_and_score(const RepStack& stack, const BoundParams& p) {
  return nn::sigmoid(aggregate_logit(stack, p));
}

double score_pair(const MatchModelParams& m, const nn::Mat& attrs, const nn::Mat& desc) {
  nn::Graph g(false);
  BoundParams p = bind(g, m);
  RepStack stack = build_stack(g.constant(attrs), g.constant(desc), p);
  return aggregate_and_score(stack, p).value()(0, 0);
}

DualScore dual_score(const embed::ContextualMatrix& attrs, const embed::ContextualMatrix& desc,
                     const MatchModelParams& m_en, const MatchModelParams& m_ch,
                     const align::MappingMatrix& w_ch2en, const align::MappingMatrix& w_en2ch) {
  DualScore s;
  s.score2 = score_pair(m_en, align::map_reps(w_ch2en, attrs).reps.mat(), desc.reps.mat());
  s.score1 = score_pair(m_ch, attrs.reps.mat(), align::map_reps(w_en2ch, desc).reps.mat());
  s.final = s.score1 + s.score2;
  return s;
}

std::string to_string(Mode m) {
  switch (m) {
    case Mode::kMono: return "mono";
    case Mode::kEn2Ch: return "en2ch";
    case Mode::kCh2En: return "ch2en";
    case Mode::kDual: return "dual";
  }
  return "dual";
}

Mode mode_from_string(const std::string& s) {
  if (s == "mono") return Mode::kMono;
  if (s == "en2ch") return Mode::kEn2Ch;
  if (s == "ch2en") return Mode::kCh2En;
  if (s == "dual") return Mode::kDual;
  throw ContractError("unknown mode '" + s + "' (expected mono|en2ch|ch2en|dual)");
}

ClmnModel::ClmnModel(Mode mode, MatchModelParams en, MatchModelParams ch,
                     align::MappingMatrix w_ch2en, align::MappingMatrix w_en2ch,
                     bool freeze_mapping)
    : mode_(mode),
      en_(std::move(en)),
      ch_(std::move(ch)),
      w_ch2en_(std::move(w_ch2en)),
      w_en2ch_(std::move(w_en2ch)),
      freeze_mapping_(freeze_mapping) {
  if (w_ch2en_.direction() != align::Direction::kCh2En ||
      w_en2ch_.direction() != align::Direction::kEn2Ch) {
    throw ContractError("mapping matrices passed in the wrong direction slots");
  }
  const std::size_t d = en_.dims().d_model;
  if (ch_.dims().d_model != d || w_ch2en_.dim() != d || w_en2ch_.dim() != d) {
    throw DimensionError("model width and mapping dims disagree");
  }
}

ClmnModel ClmnModel::init(Mode mode, const MatchDims& dims, align::MappingMatrix w_ch2en,
                          align::MappingMatrix w_en2ch, std::uint64_t seed, bool freeze_mapping) {
  return ClmnModel(mode, MatchModelParams::init(dims, derive_seed(seed, 1)),
                   MatchModelParams::init(dims, derive_seed(seed, 2)), std::move(w_ch2en),
                   std::move(w_en2ch), freeze_mapping);
}

ClmnModel::Logits ClmnModel::forward(nn::Graph& g, const nn::Mat& attrs,
                                     const nn::Mat& desc) const {
  Logits out;
  const bool learn_w = mapping_trainable();
  auto mapping = [&](const align::MappingMatrix& m, const char* name) {
    return learn_w ? g.param(name, m.weight()) : g.constant(m.weight().mat());
  };
  if (uses_target_space()) {
    nn::Var a = nn::matmul(g.constant(attrs), mapping(w_ch2en_, "mapping.ch2en"));
    BoundParams p = bind(g, en_, "en.");
    out.target_space = aggregate_logit(build_stack(a, g.constant(desc), p), p);
  }
  if (uses_source_space()) {
    nn::Var d = nn::matmul(g.constant(desc), mapping(w_en2ch_, "mapping.en2ch"));
    BoundParams p = bind(g, ch_, "ch.");
    out.source_space = aggregate_logit(build_stack(g.constant(attrs), d, p), p);
  }
  return out;
}

DualScore ClmnModel::score(const nn::Mat& attrs, const nn::Mat& desc) const {
  nn::Graph g(false);
  Logits l = forward(g, attrs, desc);
  DualScore s;
  auto prob = [](const nn::Var& v) { return nn::sigmoid(v).value()(0, 0); };
  if (l.source_space) s.score1 = prob(*l.source_space);
  if (l.target_space) s.score2 = prob(*l.target_space);
  s.final = s.score1 + s.score2;
  return s;
}

std::vector<std::pair<std::string, nn::Tensor*>> ClmnModel::trainable() {
  std::vector<std::pair<std::string, nn::Tensor*>> out;
  if (uses_target_space()) {
    for (auto& [name, t] : en_.params()) out.emplace_back("en." + name, &t);
  }
  if (uses_source_space()) {
    for (auto& [name, t] : ch_.params()) out.emplace_back("ch." + name, &t);
  }
  if (mapping_trainable()) {
    if (uses_target_space()) out.emplace_back("mapping.ch2en", &w_ch2en_.weight());
    if (uses_source_space()) out.emplace_back("mapping.en2ch", &w_en2ch_.weight());
  }
  return out;
}

std::vector<std::pair<std::string, const nn::Tensor*>> ClmnModel::all_tensors() const {
  std::vector<std::pair<std::string, const nn::Tensor*>> out;
  for (const auto& [name, t] : en_.params()) out.emplace_back("en." + name, &t);
  for (const auto& [name, t] : ch_.params()) out.emplace_back("ch." + name, &t);
  out.emplace_back("mapping.ch2en", &w_ch2en_.weight());
  out.emplace_back("mapping.en2ch", &w_en2ch_.weight());
  return out;
}

}  // namespace clmn::match
