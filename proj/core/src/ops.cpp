// SPDX-License-Identifier: Apache-2.0
#include "clmn/ops.hpp"

#include "clmn/errors.hpp"

#include <cmath>
#include <string>

namespace clmn::nn {

namespace {

std::string dims(const Mat& m) {
  return "[" + std::to_string(m.rows()) + "x" + std::to_string(m.cols()) + "]";
}

void require_same_shape(const char* op, const Mat& a, const Mat& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw DimensionError(std::string(op) + ": shape mismatch " + dims(a) + " vs " + dims(b));
  }
}

void require_same_graph(const Var& a, const Var& b) {
  if (&a.graph() != &b.graph()) throw ContractError("operands belong to different graphs");
}

double softplus(double x) {
  return x > 0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
}

}  // namespace

Var matmul(const Var& a, const Var& b) {
  require_same_graph(a, b);
  const Mat& av = a.value();
  const Mat& bv = b.value();
  if (av.cols() != bv.rows()) {
    throw DimensionError("matmul: inner dimensions disagree " + dims(av) + " * " + dims(bv));
  }
  Mat out = av * bv;
  return a.graph().record(std::move(out), {a, b}, [a, b](Graph& g, const Mat&, const Mat& gy) {
    if (g.needs_grad(a)) g.accumulate(a, gy * b.value().transpose());
    if (g.needs_grad(b)) g.accumulate(b, a.value().transpose() * gy);
  });
}

Var matmul_nt(const Var& a, const Var& b) {
  require_same_graph(a, b);
  const Mat& av = a.value();
  const Mat& bv = b.value();
  if (av.cols() != bv.cols()) {
    throw DimensionError("matmul_nt: column counts disagree " + dims(av) + " * " + dims(bv) +
                         "^T");
  }
  Mat out = av * bv.transpose();
  return a.graph().record(std::move(out), {a, b}, [a, b](Graph& g, const Mat&, const Mat& gy) {
    if (g.needs_grad(a)) g.accumulate(a, gy * b.value());
    if (g.needs_grad(b)) g.accumulate(b, gy.transpose() * a.value());
  });
}

Var transpose(const Var& a) {
  Mat out = a.value().transpose();
  return a.graph().record(std::move(out), {a}, [a](Graph& g, const Mat&, const Mat& gy) {
    g.accumulate(a, gy.transpose());
  });
}

Var add(const Var& a, const Var& b) {
  require_same_graph(a, b);
  require_same_shape("add", a.value(), b.value());
  Mat out = a.value() + b.value();
  return a.graph().record(std::move(out), {a, b}, [a, b](Graph& g, const Mat&, const Mat& gy) {
    g.accumulate(a, gy);
    g.accumulate(b, gy);
  });
}

Var sub(const Var& a, const Var& b) {
  require_same_graph(a, b);
  require_same_shape("sub", a.value(), b.value());
  Mat out = a.value() - b.value();
  return a.graph().record(std::move(out), {a, b}, [a, b](Graph& g, const Mat&, const Mat& gy) {
    g.accumulate(a, gy);
    if (g.needs_grad(b)) g.accumulate(b, -gy);
  });
}

Var hadamard(const Var& a, const Var& b) {
  require_same_graph(a, b);
  require_same_shape("hadamard", a.value(), b.value());
  Mat out = a.value().cwiseProduct(b.value());
  return a.graph().record(std::move(out), {a, b}, [a, b](Graph& g, const Mat&, const Mat& gy) {
    if (g.needs_grad(a)) g.accumulate(a, gy.cwiseProduct(b.value()));
    if (g.needs_grad(b)) g.accumulate(b, gy.cwiseProduct(a.value()));
  });
}

Var scale(const Var& a, double s) {
  Mat out = a.value() * s;
  return a.graph().record(std::move(out), {a}, [a, s](Graph& g, const Mat&, const Mat& gy) {
    g.accumulate(a, gy * s);
  });
}

Var add_bias(const Var& x, const Var& bias) {
  require_same_graph(x, bias);
  const Mat& xv = x.value();
  const Mat& bv = bias.value();
  if (bv.rows() != 1 || bv.cols() != xv.cols()) {
    throw DimensionError("add_bias: bias " + dims(bv) + " does not fit " + dims(xv));
  }
  Mat out = xv.rowwise() + bv.row(0);
  return x.graph().record(std::move(out), {x, bias}, [x, bias](Graph& g, const Mat&, const Mat& gy) {
    g.accumulate(x, gy);
    if (g.needs_grad(bias)) g.accumulate(bias, gy.colwise().sum());
  });
}

Var relu(const Var& x) {
  Mat out = x.value().cwiseMax(0.0);
  return x.graph().record(std::move(out), {x}, [x](Graph& g, const Mat&, const Mat& gy) {
    g.accumulate(x, (x.value().array() > 0.0).select(gy, 0.0));
  });
}

Var sigmoid(const Var& x) {
  Mat out = x.value().unaryExpr([](double v) {
    if (v >= 0) return 1.0 / (1.0 + std::exp(-v));
    const double e = std::exp(v);
    return e / (1.0 + e);
  });
  return x.graph().record(std::move(out), {x}, [x](Graph& g, const Mat& s, const Mat& gy) {
    g.accumulate(x, gy.cwiseProduct(s.cwiseProduct((1.0 - s.array()).matrix())));
  });
}

Var tanh(const Var& x) {
  Mat out = x.value().array().tanh().matrix();
  return x.graph().record(std::move(out), {x}, [x](Graph& g, const Mat& t, const Mat& gy) {
    g.accumulate(x, gy.cwiseProduct((1.0 - t.array().square()).matrix()));
  });
}

Var softmax_rows(const Var& x) {
  const Mat& xv = x.value();
  if (!xv.allFinite()) throw NumericError("softmax_rows: non-finite input " + dims(xv));
  Mat out(xv.rows(), xv.cols());
  for (Eigen::Index i = 0; i < xv.rows(); ++i) {
    const double mx = xv.row(i).maxCoeff();
    out.row(i) = (xv.row(i).array() - mx).exp().matrix();
    out.row(i) /= out.row(i).sum();
  }
  return x.graph().record(std::move(out), {x}, [x](Graph& g, const Mat& s, const Mat& gy) {
    Eigen::VectorXd dots = gy.cwiseProduct(s).rowwise().sum();
    Mat gx = s.cwiseProduct((gy.colwise() - dots).eval());
    g.accumulate(x, gx);
  });
}

Var concat_cols(const std::vector<Var>& parts) {
  if (parts.empty()) throw ContractError("concat_cols: no operands");
  const Eigen::Index rows = parts.front().rows();
  Eigen::Index cols = 0;
  for (const Var& p : parts) {
    require_same_graph(parts.front(), p);
    if (p.rows() != rows) {
      throw DimensionError("concat_cols: row count mismatch " + dims(parts.front().value()) +
                           " vs " + dims(p.value()));
    }
    cols += p.cols();
  }
  Mat out(rows, cols);
  Eigen::Index off = 0;
  for (const Var& p : parts) {
    out.middleCols(off, p.cols()) = p.value();
    off += p.cols();
  }
  return parts.front().graph().record(std::move(out), parts, [parts](Graph& g, const Mat&, const Mat& gy) {
    Eigen::Index o = 0;
    for (const Var& p : parts) {
      if (g.needs_grad(p)) g.accumulate(p, gy.middleCols(o, p.cols()));
      o += p.cols();
    }
  });
}

Var concat_rows(const std::vector<Var>& parts) {
  if (parts.empty()) throw ContractError("concat_rows: no operands");
  const Eigen::Index cols = parts.front().cols();
  Eigen::Index rows = 0;
  for (const Var& p : parts) {
    require_same_graph(parts.front(), p);
    if (p.cols() != cols) {
      throw DimensionError("concat_rows: column count mismatch " + dims(parts.front().value()) +
                           " vs " + dims(p.value()));
    }
    rows += p.rows();
  }
  Mat out(rows, cols);
  Eigen::Index off = 0;
  for (const Var& p : parts) {
    out.middleRows(off, p.rows()) = p.value();
    off += p.rows();
  }
  return parts.front().graph().record(std::move(out), parts, [parts](Graph& g, const Mat&, const Mat& gy) {
    Eigen::Index o = 0;
    for (const Var& p : parts) {
      if (g.needs_grad(p)) g.accumulate(p, gy.middleRows(o, p.rows()));
      o += p.rows();
    }
  });
}

Var strided_rows(const Var& x, Eigen::Index first, Eigen::Index stride, Eigen::Index count) {
  if (count < 1 || stride < 1 || first < 0 || first + (count - 1) * stride >= x.rows()) {
    throw DimensionError("strided_rows: rows " + std::to_string(first) + "+k*" +
                         std::to_string(stride) + " (k<" + std::to_string(count) +
                         ") out of range for " + dims(x.value()));
  }
  Mat out(count, x.cols());
  for (Eigen::Index k = 0; k < count; ++k) out.row(k) = x.value().row(first + k * stride);
  return x.graph().record(std::move(out), {x}, [x, first, stride](Graph& g, const Mat&, const Mat& gy) {
    Mat gx = Mat::Zero(x.rows(), x.cols());
    for (Eigen::Index k = 0; k < gy.rows(); ++k) gx.row(first + k * stride) = gy.row(k);
    g.accumulate(x, gx);
  });
}

Var reshape(const Var& x, Eigen::Index rows, Eigen::Index cols) {
  if (rows < 0 || cols < 0 || rows * cols != x.value().size()) {
    throw DimensionError("reshape: cannot view " + dims(x.value()) + " as [" +
                         std::to_string(rows) + "x" + std::to_string(cols) + "]");
  }
  Mat out = Eigen::Map<const Mat>(x.value().data(), rows, cols);
  return x.graph().record(std::move(out), {x}, [x](Graph& g, const Mat&, const Mat& gy) {
    g.accumulate(x, Eigen::Map<const Mat>(gy.data(), x.rows(), x.cols()));
  });
}

Var row(const Var& x, Eigen::Index i) {
  if (i < 0 || i >= x.rows()) {
    throw DimensionError("row: index " + std::to_string(i) + " out of range for " +
                         dims(x.value()));
  }
  Mat out = x.value().row(i);
  return x.graph().record(std::move(out), {x}, [x, i](Graph& g, const Mat&, const Mat& gy) {
    Mat gx = Mat::Zero(x.rows(), x.cols());
    gx.row(i) = gy.row(0);
    g.accumulate(x, gx);
  });
}

Var sum(const Var& x) {
  Mat out(1, 1);
  out(0, 0) = x.value().sum();
  return x.graph().record(std::move(out), {x}, [x](Graph& g, const Mat&, const Mat& gy) {
    g.accumulate(x, Mat::Constant(x.rows(), x.cols(), gy(0, 0)));
  });
}

Var bce_with_logits(const Var& logit, double y) {
  const Mat& z = logit.value();
  if (z.size() != 1) throw DimensionError("bce_with_logits: logit must be 1x1, got " + dims(z));
  if (!(y >= 0.0 && y <= 1.0)) throw ContractError("bce_with_logits: label outside [0,1]");
  const double zv = z(0, 0);
  if (!std::isfinite(zv)) throw NumericError("bce_with_logits: non-finite logit");
  Mat out(1, 1);
  // -[y log s(z) + (1-y) log(1-s(z))] = y softplus(-z) + (1-y) softplus(z)
  out(0, 0) = y * softplus(-zv) + (1.0 - y) * softplus(zv);
  return logit.graph().record(std::move(out), {logit}, [logit, y](Graph& g, const Mat&, const Mat& gy) {
    const double zz = logit.value()(0, 0);
    const double s = zz >= 0 ? 1.0 / (1.0 + std::exp(-zz)) : std::exp(zz) / (1.0 + std::exp(zz));
    Mat gx(1, 1);
    gx(0, 0) = gy(0, 0) * (s - y);
    g.accumulate(logit, gx);
  });
}

}  // namespace clmn::nn
