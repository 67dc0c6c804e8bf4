// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "clmn/autodiff.hpp"

namespace clmn::nn {

/// Weights of one GRU layer. Gate blocks are laid out column-wise as
/// [update z | reset r | candidate], each `hidden` wide.
struct GruWeights {
  Var input_weight;      // d_in x 3h
  Var recurrent_weight;  // h x 3h
  Var bias;              // 1 x 3h
};

struct GruOutput {
  Var states;  // (B*T) x h, row b*T + t is sequence b's state after step t
  Var last;    // B x h, final state of each sequence
};

/// Runs the rows of `x` (T x d_in) through one GRU layer:
///   z  = sigmoid(x Wz + h Uz + bz)
///   r  = sigmoid(x Wr + h Ur + br)
///   h~ = tanh(x Wc + (r .* h) Uc + bc)
///   h' = (1 - z) .* h + z .* h~
/// The whole recurrence is one graph node with a hand-written
/// backpropagation-through-time pass.
///
/// `x` may hold `batch` equal-length sequences stacked row-wise, sequence b
/// in rows [b*T, (b+1)*T); they run in lockstep from the same h0 (1 x h).
/// Throws ContractError when T == 0 or the rows do not split evenly.
GruOutput gru_layer(const Var& x, const GruWeights& w, const Var& h0, Eigen::Index batch = 1);

}  // namespace clmn::nn
