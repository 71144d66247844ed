#include "tnp/dense_tensor.hpp"

#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "tnp/errors.hpp"

namespace tnp {

std::size_t shape_product(std::span<const std::size_t> shape) {
  std::size_t n = 1;
  for (std::size_t s : shape) {
    if (s != 0 && n > std::numeric_limits<std::size_t>::max() / s) {
      throw CapacityError("shape product overflows size_t");
    }
    n *= s;
  }
  return n;
}

namespace {

void check_modes(const Shape& shape) {
  for (std::size_t s : shape) {
    if (s == 0) throw StructuralError("tensor modes must be positive");
  }
}

}  // namespace

DenseTensor::DenseTensor(Shape shape) : shape_(std::move(shape)) {
  check_modes(shape_);
  data_.assign(shape_product(shape_), 0.0);
}

DenseTensor::DenseTensor(Shape shape, std::vector<double> data)
    : shape_(std::move(shape)), data_(std::move(data)) {
  check_modes(shape_);
  if (shape_product(shape_) != data_.size()) {
    throw StructuralError("tensor data length " + std::to_string(data_.size()) +
                          " does not match shape product " +
                          std::to_string(shape_product(shape_)));
  }
}

std::size_t DenseTensor::offset(std::span<const std::size_t> index) const {
  if (index.size() != shape_.size()) {
    throw StructuralError("index order does not match tensor order");
  }
  std::size_t flat = 0;
  for (std::size_t k = 0; k < shape_.size(); ++k) {
    if (index[k] >= shape_[k]) throw RangeError("tensor index out of range");
    flat = flat * shape_[k] + index[k];
  }
  return flat;
}

double& DenseTensor::at(std::initializer_list<std::size_t> index) {
  return data_[offset(std::span<const std::size_t>(index.begin(), index.size()))];
}

double DenseTensor::at(std::initializer_list<std::size_t> index) const {
  return data_[offset(std::span<const std::size_t>(index.begin(), index.size()))];
}

DenseTensor DenseTensor::reshaped(Shape shape) const& {
  return DenseTensor(std::move(shape), data_);
}

DenseTensor DenseTensor::reshaped(Shape shape) && {
  return DenseTensor(std::move(shape), std::move(data_));
}

double DenseTensor::norm() const {
  double s = 0.0;
  for (double v : data_) s += v * v;
  return std::sqrt(s);
}

bool DenseTensor::all_finite() const {
  for (double v : data_) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

double relative_error(const DenseTensor& a, const DenseTensor& b) {
  if (a.size() != b.size()) throw StructuralError("relative_error: size mismatch");
  double diff = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    diff += d * d;
  }
  const double denom = std::max(b.norm(), std::numeric_limits<double>::min());
  return std::sqrt(diff) / denom;
}

}  // namespace tnp
