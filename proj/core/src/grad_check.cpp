// SPDX-License-Identifier: Apache-2.0
#include "clmn/grad_check.hpp"

#include "clmn/errors.hpp"

#include <algorithm>
#include <cmath>

namespace clmn::nn {

namespace {

double evaluate(const ScalarFn& f, const ParamSet& params) {
  Graph g(false);
  Var loss = f(g, params);
  if (loss.value().size() != 1) throw ContractError("grad_check: function must return a scalar");
  const double v = loss.value()(0, 0);
  if (std::isnan(v)) throw NumericError("grad_check: function returned NaN");
  return v;
}

}  // namespace

GradCheckReport grad_check_report(const ScalarFn& f, ParamSet& params, double eps) {
  if (!(eps > 0.0)) throw ContractError("grad_check: eps must be positive");

  Graph g;
  Var loss = f(g, params);
  if (std::isnan(loss.value()(0, 0))) throw NumericError("grad_check: function returned NaN");
  const Gradients grads = g.backward(loss);

  GradCheckReport report;
  for (auto& [name, tensor] : params) {
    const bool has = grads.contains(name);
    auto data = tensor.data();
    for (std::size_t i = 0; i < data.size(); ++i) {
      const double saved = data[i];
      data[i] = saved + eps;
      const double up = evaluate(f, params);
      data[i] = saved - eps;
      const double down = evaluate(f, params);
      data[i] = saved;

      const double numeric = (up - down) / (2.0 * eps);
      const double analytic = has ? grads.at(name).data()[i] : 0.0;
      const double denom = std::max({std::abs(analytic), std::abs(numeric), 1e-8});
      const double rel = std::abs(analytic - numeric) / denom;
      ++report.entries_checked;
      if (rel > report.max_relative_error || report.worst_param.empty()) {
        report.max_relative_error = std::max(rel, report.max_relative_error);
        if (rel >= report.max_relative_error) {
          report.worst_param = name;
          report.worst_index = i;
          report.analytic = analytic;
          report.numeric = numeric;
        }
      }
    }
  }
  return report;
}

double grad_check(const ScalarFn& f, ParamSet& params, double eps) {
  return grad_check_report(f, params, eps).max_relative_error;
}

}  // namespace clmn::nn
