#include "bnaf/tensor.hpp"

#include <cmath>
#include <sstream>

namespace bnaf {

Index shape_numel(const Shape& shape) {
  Index n = 1;
  for (Index e : shape) {
    if (e < 0) throw DimensionError("negative extent in shape " + shape_str(shape));
    n *= e;
  }
  return n;
}

std::string shape_str(const Shape& shape) {
  std::ostringstream os;
  os << '[';
  for (size_t i = 0; i < shape.size(); ++i) {
    if (i) os << 'x';
    os << shape[i];
  }
  os << ']';
  return os.str();
}

Tensor::Tensor(Shape shape, std::vector<double> values)
    : shape_(std::move(shape)), data_(shape_numel(shape_)) {
  if (static_cast<Index>(values.size()) != data_.size()) {
    throw DimensionError("data length " + std::to_string(values.size()) +
                         " does not match shape " + shape_str(shape_));
  }
  for (Index i = 0; i < data_.size(); ++i) data_[i] = values[static_cast<size_t>(i)];
}

Tensor Tensor::scalar(double v) {
  Tensor t;
  t.data_[0] = v;
  return t;
}

Tensor Tensor::full(Shape shape, double v) {
  Tensor t(std::move(shape));
  t.data_.setConstant(v);
  return t;
}

Tensor Tensor::vector(std::initializer_list<double> values) {
  Tensor t({static_cast<Index>(values.size())});
  Index i = 0;
  for (double v : values) t.data_[i++] = v;
  return t;
}

Tensor Tensor::matrix(std::initializer_list<std::initializer_list<double>> rows) {
  const Index r = static_cast<Index>(rows.size());
  const Index c = r ? static_cast<Index>(rows.begin()->size()) : 0;
  Tensor t({r, c});
  Index i = 0;
  for (const auto& row : rows) {
    if (static_cast<Index>(row.size()) != c) throw DimensionError("ragged matrix literal");
    for (double v : row) t.data_[i++] = v;
  }
  return t;
}

double Tensor::scalar_value() const {
  if (!is_scalar()) throw ContractError("scalar_value on tensor of shape " + shape_str(shape_));
  return data_[0];
}

double& Tensor::at(Index r, Index c) { return data_[r * cols2d() + c]; }
double Tensor::at(Index r, Index c) const { return data_[r * cols2d() + c]; }

Index Tensor::rows2d() const {
  switch (shape_.size()) {
    case 0:
    case 1: return 1;
    case 2: return shape_[0];
    default: throw DimensionError("2-D view of rank>2 tensor " + shape_str(shape_));
  }
}

Index Tensor::cols2d() const {
  switch (shape_.size()) {
    case 0: return 1;
    case 1: return shape_[0];
    case 2: return shape_[1];
    default: throw DimensionError("2-D view of rank>2 tensor " + shape_str(shape_));
  }
}

bool Tensor::all_finite() const { return data_.isFinite().all(); }

Index Tensor::first_non_finite() const {
  for (Index i = 0; i < data_.size(); ++i) {
    if (!std::isfinite(data_[i])) return i;
  }
  return -1;
}

bool Tensor::operator==(const Tensor& other) const {
  return shape_ == other.shape_ && (data_ == other.data_).all();
}

}  // namespace bnaf
