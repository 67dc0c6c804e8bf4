// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "clmn/autodiff.hpp"

#include <vector>

namespace clmn::nn {

// Differentiable ops over Graph nodes. All shapes are (rows x cols); shape
// disagreements raise DimensionError naming both operands.

Var matmul(const Var& a, const Var& b);
/// a * b^T without materialising the transpose.
Var matmul_nt(const Var& a, const Var& b);
Var transpose(const Var& a);

Var add(const Var& a, const Var& b);
Var sub(const Var& a, const Var& b);
Var hadamard(const Var& a, const Var& b);
Var scale(const Var& a, double s);
/// Adds a 1 x cols bias to every row.
Var add_bias(const Var& x, const Var& bias);

Var relu(const Var& x);
Var sigmoid(const Var& x);
Var tanh(const Var& x);

/// Row-wise softmax with per-row max subtraction. NaN input raises NumericError.
Var softmax_rows(const Var& x);

Var concat_cols(const std::vector<Var>& parts);
Var concat_rows(const std::vector<Var>& parts);
Var row(const Var& x, Eigen::Index i);
/// Rows `first`, `first + stride`, ... (`count` of them).
Var strided_rows(const Var& x, Eigen::Index first, Eigen::Index stride, Eigen::Index count);
/// Row-major reinterpretation with the same number of entries.
Var reshape(const Var& x, Eigen::Index rows, Eigen::Index cols);
Var sum(const Var& x);

/// Binary cross-entropy of sigmoid(logit) against label y, computed from the
/// logit so saturated predictions stay finite. `logit` must be 1x1.
Var bce_with_logits(const Var& logit, double y);

}  // namespace clmn::nn
