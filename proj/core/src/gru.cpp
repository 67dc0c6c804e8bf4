// SPDX-License-Identifier: Apache-2.0
#include "clmn/gru.hpp"

#include "clmn/errors.hpp"
#include "clmn/ops.hpp"

#include <memory>
#include <string>

namespace clmn::nn {

namespace {

using Stride = Eigen::OuterStride<>;
using StepView = Eigen::Map<Mat, 0, Stride>;
using ConstStepView = Eigen::Map<const Mat, 0, Stride>;

// Rows t, t+T, t+2T, ... of a (B*T) x c matrix: time step t of every sequence.
StepView step(Mat& m, Eigen::Index t, Eigen::Index b, Eigen::Index T) {
  return StepView(m.data() + t * m.cols(), b, m.cols(), Stride(T * m.cols()));
}
ConstStepView step(const Mat& m, Eigen::Index t, Eigen::Index b, Eigen::Index T) {
  return ConstStepView(m.data() + t * m.cols(), b, m.cols(), Stride(T * m.cols()));
}

struct GruCache {
  Mat z;       // (B*T) x h
  Mat r;       // (B*T) x h
  Mat cand;    // (B*T) x h
  Mat h_prev;  // (B*T) x h, state entering step t
  Mat rh;      // (B*T) x h, r .* h_prev
};

std::string dims(const Mat& m) {
  return "[" + std::to_string(m.rows()) + "x" + std::to_string(m.cols()) + "]";
}

}  // namespace

GruOutput gru_layer(const Var& x, const GruWeights& w, const Var& h0, Eigen::Index batch) {
  const Mat& X = x.value();
  const Mat& Wx = w.input_weight.value();
  const Mat& U = w.recurrent_weight.value();
  const Mat& b = w.bias.value();
  const Mat& H0 = h0.value();

  if (X.rows() == 0) throw ContractError("gru_layer: empty sequence");
  if (batch < 1 || X.rows() % batch != 0) {
    throw ContractError("gru_layer: " + std::to_string(X.rows()) + " rows do not split into " +
                        std::to_string(batch) + " sequences");
  }
  const Eigen::Index B = batch;
  const Eigen::Index T = X.rows() / B;
  const Eigen::Index h = U.rows();
  if (U.cols() != 3 * h || Wx.cols() != 3 * h || Wx.rows() != X.cols() || b.rows() != 1 ||
      b.cols() != 3 * h || H0.rows() != 1 || H0.cols() != h) {
    throw DimensionError("gru_layer: inconsistent shapes x" + dims(X) + " Wx" + dims(Wx) + " U" +
                         dims(U) + " b" + dims(b) + " h0" + dims(H0));
  }

  auto cache = std::make_shared<GruCache>();
  GruCache& c = *cache;
  c.z.resize(B * T, h);
  c.r.resize(B * T, h);
  c.cand.resize(B * T, h);
  c.h_prev.resize(B * T, h);
  c.rh.resize(B * T, h);

  Mat xp = X * Wx;
  xp.rowwise() += b.row(0);

  Mat states(B * T, h);
  Mat hp = H0.replicate(B, 1);
  Mat zr(B, 2 * h);
  Mat cpre(B, h);
  for (Eigen::Index t = 0; t < T; ++t) {
    auto xt = step(xp, t, B, T);
    auto z = step(c.z, t, B, T);
    auto r = step(c.r, t, B, T);
    auto n = step(c.cand, t, B, T);
    auto rh = step(c.rh, t, B, T);
    step(c.h_prev, t, B, T) = hp;
    zr.noalias() = hp * U.leftCols(2 * h);
    zr += xt.leftCols(2 * h);
    z = (1.0 + (-zr.leftCols(h).array()).exp()).inverse().matrix();
    r = (1.0 + (-zr.rightCols(h).array()).exp()).inverse().matrix();
    rh = r.cwiseProduct(hp);
    cpre.noalias() = rh * U.rightCols(h);
    cpre += xt.rightCols(h);
    n = cpre.array().tanh().matrix();
    hp.array() += z.array() * (n.array() - hp.array());
    step(states, t, B, T) = hp;
  }

  const Var wx = w.input_weight;
  const Var wu = w.recurrent_weight;
  const Var wb = w.bias;
  Var out = x.graph().record(
      std::move(states), {x, wx, wu, wb, h0},
      [x, wx, wu, wb, h0, cache, B, T](Graph& g, const Mat&, const Mat& gy) {
        const Mat& Xv = x.value();
        const Mat& Wv = wx.value();
        const Mat& Uv = wu.value();
        const Eigen::Index hh = Uv.rows();
        const GruCache& c = *cache;

        Mat dxp(B * T, 3 * hh);  // gradients w.r.t. gate pre-activations
        Mat dh_next = Mat::Zero(B, hh);
        Mat dh(B, hh);
        Mat drh(B, hh);
        for (Eigen::Index t = T; t-- > 0;) {
          const auto hprev = step(c.h_prev, t, B, T).array();
          const auto z = step(c.z, t, B, T).array();
          const auto r = step(c.r, t, B, T).array();
          const auto n = step(c.cand, t, B, T).array();
          auto d = step(dxp, t, B, T);
          dh = step(gy, t, B, T) + dh_next;

          d.leftCols(hh) = (dh.array() * (n - hprev) * z * (1.0 - z)).matrix();
          d.rightCols(hh) = (dh.array() * z * (1.0 - n.square())).matrix();
          drh.noalias() = d.rightCols(hh) * Uv.rightCols(hh).transpose();
          d.middleCols(hh, hh) = (drh.array() * hprev * r * (1.0 - r)).matrix();

          dh_next = (dh.array() * (1.0 - z) + drh.array() * r).matrix();
          dh_next.noalias() += d.leftCols(2 * hh) * Uv.leftCols(2 * hh).transpose();
        }

        if (g.needs_grad(x)) g.accumulate(x, dxp * Wv.transpose());
        if (g.needs_grad(wx)) g.accumulate(wx, Xv.transpose() * dxp);
        if (g.needs_grad(wb)) g.accumulate(wb, dxp.colwise().sum());
        if (g.needs_grad(wu)) {
          Mat du(hh, 3 * hh);
          du.leftCols(2 * hh).noalias() = c.h_prev.transpose() * dxp.leftCols(2 * hh);
          du.rightCols(hh).noalias() = c.rh.transpose() * dxp.rightCols(hh);
          g.accumulate(wu, du);
        }
        if (g.needs_grad(h0)) g.accumulate(h0, dh_next.colwise().sum());
      });
  return {out, strided_rows(out, T - 1, T, B)};
}

}  // namespace clmn::nn
