#include "tnp/image.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <string>

#include "tnp/errors.hpp"

namespace tnp {

ImageGrid::ImageGrid(std::size_t height, std::size_t width, std::size_t channels, double fill)
    : height_(height),
      width_(width),
      channels_(channels),
      data_(height * width * channels, fill),
      original_{height, width} {
  if (height == 0 || width == 0 || channels == 0) {
    throw StructuralError("image dimensions must be positive");
  }
}

ImageGrid::ImageGrid(std::size_t height, std::size_t width, std::size_t channels,
                     std::vector<double> planar)
    : height_(height),
      width_(width),
      channels_(channels),
      data_(std::move(planar)),
      original_{height, width} {
  if (height == 0 || width == 0 || channels == 0) {
    throw StructuralError("image dimensions must be positive");
  }
  if (data_.size() != height * width * channels) {
    throw StructuralError("image data length " + std::to_string(data_.size()) +
                          " does not match " + std::to_string(height) + "x" +
                          std::to_string(width) + "x" + std::to_string(channels));
  }
}

std::span<double> ImageGrid::channel(std::size_t ch) {
  if (ch >= channels_) throw RangeError("channel index out of range");
  return std::span<double>(data_).subspan(ch * pixel_count(), pixel_count());
}

std::span<const double> ImageGrid::channel(std::size_t ch) const {
  if (ch >= channels_) throw RangeError("channel index out of range");
  return std::span<const double>(data_).subspan(ch * pixel_count(), pixel_count());
}

ImageGrid ImageGrid::channel_image(std::size_t ch) const {
  const auto c = channel(ch);
  ImageGrid out(height_, width_, 1, std::vector<double>(c.begin(), c.end()));
  out.original_ = original_;
  return out;
}

ImageGrid ImageGrid::stack(const std::vector<ImageGrid>& planes) {
  if (planes.empty()) throw StructuralError("cannot stack zero planes");
  const auto& first = planes.front();
  std::vector<double> data;
  data.reserve(first.pixel_count() * planes.size());
  for (const auto& p : planes) {
    if (p.channels() != 1 || p.height() != first.height() || p.width() != first.width()) {
      throw StructuralError("stack: planes must be single-channel and equally sized");
    }
    data.insert(data.end(), p.data_.begin(), p.data_.end());
  }
  ImageGrid out(first.height(), first.width(), planes.size(), std::move(data));
  out.original_ = first.original_;
  return out;
}

bool ImageGrid::same_shape(const ImageGrid& other) const {
  return height_ == other.height_ && width_ == other.width_ && channels_ == other.channels_;
}

bool ImageGrid::is_pow2_square() const {
  return height_ == width_ && height_ > 0 && std::has_single_bit(height_);
}

int ImageGrid::resolution_index() const {
  if (!is_pow2_square()) {
    throw StructuralError("image is " + std::to_string(height_) + "x" + std::to_string(width_) +
                          ", not a power-of-two square");
  }
  return std::countr_zero(height_);
}

bool ImageGrid::in_unit_range() const {
  return std::all_of(data_.begin(), data_.end(), [](double v) { return v >= 0.0 && v <= 1.0; });
}

bool ImageGrid::all_finite() const {
  return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
}

ImageGrid clamp_unit(ImageGrid img) {
  for (double& v : img.values()) v = std::clamp(v, 0.0, 1.0);
  return img;
}

}  // namespace tnp
