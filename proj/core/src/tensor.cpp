// SPDX-License-Identifier: Apache-2.0
#include "clmn/tensor.hpp"

#include "clmn/errors.hpp"

#include <numeric>
#include <sstream>

namespace clmn::nn {

std::string shape_string(const Shape& shape) {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) os << 'x';
    os << shape[i];
  }
  os << ']';
  return os.str();
}

namespace {

std::pair<Eigen::Index, Eigen::Index> storage_dims(const Shape& shape) {
  if (shape.size() > 2) {
    throw DimensionError("tensor rank " + std::to_string(shape.size()) +
                         " not supported (max 2): " + shape_string(shape));
  }
  for (auto s : shape) {
    if (s == 0) throw DimensionError("tensor shape has a zero extent: " + shape_string(shape));
  }
  if (shape.empty()) return {1, 1};
  if (shape.size() == 1) return {1, static_cast<Eigen::Index>(shape[0])};
  return {static_cast<Eigen::Index>(shape[0]), static_cast<Eigen::Index>(shape[1])};
}

}  // namespace

Tensor::Tensor(Shape shape, std::span<const double> data, bool requires_grad)
    : shape_(std::move(shape)), requires_grad_(requires_grad) {
  auto [r, c] = storage_dims(shape_);
  if (static_cast<std::size_t>(r * c) != data.size()) {
    throw DimensionError("tensor data length " + std::to_string(data.size()) +
                         " does not match shape " + shape_string(shape_));
  }
  m_ = Eigen::Map<const Mat>(data.data(), r, c);
}

Tensor Tensor::zeros(Shape shape) {
  Tensor t;
  auto [r, c] = storage_dims(shape);
  t.shape_ = std::move(shape);
  t.m_ = Mat::Zero(r, c);
  return t;
}

Tensor Tensor::from_mat(Mat m) {
  Tensor t;
  t.shape_ = {static_cast<std::size_t>(m.rows()), static_cast<std::size_t>(m.cols())};
  storage_dims(t.shape_);
  t.m_ = std::move(m);
  return t;
}

Tensor Tensor::vector(std::initializer_list<double> values) {
  return Tensor({values.size()}, std::span<const double>(values.begin(), values.size()));
}

Tensor Tensor::matrix(std::initializer_list<std::initializer_list<double>> rows) {
  std::vector<double> flat;
  std::size_t cols = rows.size() ? rows.begin()->size() : 0;
  for (const auto& r : rows) {
    if (r.size() != cols) throw DimensionError("ragged matrix literal");
    flat.insert(flat.end(), r.begin(), r.end());
  }
  return Tensor({rows.size(), cols}, flat);
}

Tensor Tensor::scalar(double v) { return Tensor({}, std::span<const double>(&v, 1)); }

double Tensor::item() const {
  if (size() != 1) {
    throw DimensionError("item() on non-scalar tensor " + shape_string(shape_));
  }
  return m_(0, 0);
}

void check_finite(const Mat& m, const std::string& what) {
  if (!m.allFinite()) throw NumericError("non-finite value in " + what);
}

}  // namespace clmn::nn
