#pragma once

#include <Eigen/Core>

#include <initializer_list>
#include <string>
#include <vector>

#include "bnaf/errors.hpp"

namespace bnaf {

using Index = Eigen::Index;
using Shape = std::vector<Index>;

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MatMap = Eigen::Map<RowMat>;
using ConstMatMap = Eigen::Map<const RowMat>;
using ArrMap = Eigen::Map<Eigen::ArrayXd>;
using ConstArrMap = Eigen::Map<const Eigen::ArrayXd>;

Index shape_numel(const Shape& shape);
std::string shape_str(const Shape& shape);

/// Dense float64 array with a shape, stored flat in row-major order.
/// Rank 0 (shape {}) is a scalar with one element. Tensors are plain
/// values: copying copies the data, and a constructed tensor is never
/// mutated by library code that received it by const reference.
class Tensor {
 public:
  Tensor() : shape_{}, data_(1) { data_[0] = 0.0; }
  explicit Tensor(Shape shape) : shape_(std::move(shape)), data_(shape_numel(shape_)) {
    data_.setZero();
  }
  Tensor(Shape shape, std::vector<double> values);

  static Tensor scalar(double v);
  static Tensor zeros(Shape shape) { return Tensor(std::move(shape)); }
  static Tensor full(Shape shape, double v);
  static Tensor ones(Shape shape) { return full(std::move(shape), 1.0); }
  static Tensor vector(std::initializer_list<double> values);
  static Tensor matrix(std::initializer_list<std::initializer_list<double>> rows);

  const Shape& shape() const { return shape_; }
  Index rank() const { return static_cast<Index>(shape_.size()); }
  Index numel() const { return data_.size(); }
  Index extent(Index axis) const { return shape_.at(static_cast<size_t>(axis)); }

  bool is_scalar() const { return data_.size() == 1; }
  double scalar_value() const;

  double* data() { return data_.data(); }
  const double* data() const { return data_.data(); }

  double& at(Index flat) { return data_[flat]; }
  double at(Index flat) const { return data_[flat]; }
  double& at(Index r, Index c);
  double at(Index r, Index c) const;

  /// Rows/cols of the canonical 2-D view: rank 2 maps directly, rank 1 is a
  /// single row, rank 0 is 1x1. Higher ranks are rejected.
  Index rows2d() const;
  Index cols2d() const;
  MatMap mat() { return MatMap(data_.data(), rows2d(), cols2d()); }
  ConstMatMap mat() const { return ConstMatMap(data_.data(), rows2d(), cols2d()); }
  ArrMap arr() { return ArrMap(data_.data(), data_.size()); }
  ConstArrMap arr() const { return ConstArrMap(data_.data(), data_.size()); }

  bool same_shape(const Tensor& other) const { return shape_ == other.shape_; }
  bool all_finite() const;
  /// Flat index of the first non-finite entry, or -1 if all entries are finite.
  Index first_non_finite() const;

  bool operator==(const Tensor& other) const;

 private:
  Shape shape_;
  Eigen::ArrayXd data_;
};

}  // namespace bnaf
