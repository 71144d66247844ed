#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

namespace tnp {

using Shape = std::vector<std::size_t>;

std::size_t shape_product(std::span<const std::size_t> shape);

/// N-order real array stored row-major (last index fastest).
class DenseTensor {
 public:
  DenseTensor() = default;
  /// Zero-filled tensor. Every mode must be positive.
  explicit DenseTensor(Shape shape);
  DenseTensor(Shape shape, std::vector<double> data);

  const Shape& shape() const { return shape_; }
  std::size_t order() const { return shape_.size(); }
  std::size_t size() const { return data_.size(); }
  std::size_t dim(std::size_t mode) const { return shape_.at(mode); }

  std::span<double> data() { return data_; }
  std::span<const double> data() const { return data_; }
  const std::vector<double>& values() const { return data_; }

  double& operator[](std::size_t flat) { return data_[flat]; }
  double operator[](std::size_t flat) const { return data_[flat]; }

  std::size_t offset(std::span<const std::size_t> index) const;
  double& at(std::initializer_list<std::size_t> index);
  double at(std::initializer_list<std::size_t> index) const;

  /// Same data, new shape with identical element count.
  DenseTensor reshaped(Shape shape) const&;
  DenseTensor reshaped(Shape shape) &&;

  double norm() const;
  bool all_finite() const;

  friend bool operator==(const DenseTensor&, const DenseTensor&) = default;

 private:
  Shape shape_;
  std::vector<double> data_;
};

/// ||a - b||_2 / max(||b||_2, tiny). Shapes must agree.
double relative_error(const DenseTensor& a, const DenseTensor& b);

}  // namespace tnp
