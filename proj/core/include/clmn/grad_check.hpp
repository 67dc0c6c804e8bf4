// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "clmn/autodiff.hpp"

#include <functional>
#include <string>

namespace clmn::nn {

/// Builds a scalar loss on `g`, binding parameters from the set by name.
using ScalarFn = std::function<Var(Graph& g, const ParamSet& params)>;

struct GradCheckReport {
  double max_relative_error = 0.0;
  std::string worst_param;
  std::size_t worst_index = 0;
  double analytic = 0.0;
  double numeric = 0.0;
  std::size_t entries_checked = 0;
};

/// Compares reverse-mode gradients against central differences
/// (f(p+eps) - f(p-eps)) / 2eps for every parameter entry. Relative error is
/// |analytic - numeric| / max(|analytic|, |numeric|, 1e-8).
/// Throws ContractError for eps <= 0 and NumericError if f returns NaN.
GradCheckReport grad_check_report(const ScalarFn& f, ParamSet& params, double eps = 1e-5);

double grad_check(const ScalarFn& f, ParamSet& params, double eps = 1e-5);

}  // namespace clmn::nn
