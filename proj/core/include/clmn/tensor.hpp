// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

namespace clmn::nn {

/// Row-major dense matrix of doubles; the storage type behind every Tensor.
using Mat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

using Shape = std::vector<std::size_t>;

std::string shape_string(const Shape& shape);

/// Dense tensor of rank 0, 1 or 2. Rank-1 tensors are stored as one row and
/// rank-0 tensors as a 1x1 matrix, so every tensor can be viewed as a Mat.
class Tensor {
 public:
  Tensor() = default;
  /// Throws DimensionError when product(shape) != data.size() or rank > 2.
  Tensor(Shape shape, std::span<const double> data, bool requires_grad = false);

  static Tensor zeros(Shape shape);
  static Tensor from_mat(Mat m);
  static Tensor vector(std::initializer_list<double> values);
  static Tensor matrix(std::initializer_list<std::initializer_list<double>> rows);
  static Tensor scalar(double v);

  const Shape& shape() const { return shape_; }
  std::size_t rank() const { return shape_.size(); }
  std::size_t size() const { return static_cast<std::size_t>(m_.size()); }
  Eigen::Index rows() const { return m_.rows(); }
  Eigen::Index cols() const { return m_.cols(); }

  std::span<const double> data() const { return {m_.data(), size()}; }
  std::span<double> data() { return {m_.data(), size()}; }

  const Mat& mat() const { return m_; }
  /// Mutable view; callers must keep the shape unchanged.
  Mat& mat() { return m_; }

  double item() const;

  bool requires_grad() const { return requires_grad_; }
  void set_requires_grad(bool v) { requires_grad_ = v; }

  bool all_finite() const { return m_.allFinite(); }

  bool operator==(const Tensor& other) const {
    return shape_ == other.shape_ && m_ == other.m_;
  }

 private:
  Shape shape_;
  Mat m_;
  bool requires_grad_ = false;
};

/// Throws NumericError naming `what` if any entry is NaN or infinite.
void check_finite(const Mat& m, const std::string& what);

}  // namespace clmn::nn
