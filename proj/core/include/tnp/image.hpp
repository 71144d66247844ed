#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace tnp {

struct PixelSize {
  std::size_t height = 0;
  std::size_t width = 0;
  friend bool operator==(const PixelSize&, const PixelSize&) = default;
};

/// Planar multi-channel image of reals. Pipeline images live in [0,1]; the
/// same type also carries gradients and perturbation fields, so the range
/// is checked explicitly where it matters rather than on construction.
class ImageGrid {
 public:
  ImageGrid() = default;
  ImageGrid(std::size_t height, std::size_t width, std::size_t channels = 1,
            double fill = 0.0);
  ImageGrid(std::size_t height, std::size_t width, std::size_t channels,
            std::vector<double> planar);

  std::size_t height() const { return height_; }
  std::size_t width() const { return width_; }
  std::size_t channels() const { return channels_; }
  std::size_t pixel_count() const { return height_ * width_; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  double& operator()(std::size_t row, std::size_t col, std::size_t ch = 0) {
    return data_[(ch * height_ + row) * width_ + col];
  }
  double operator()(std::size_t row, std::size_t col, std::size_t ch = 0) const {
    return data_[(ch * height_ + row) * width_ + col];
  }

  std::span<double> values() { return data_; }
  std::span<const double> values() const { return data_; }
  std::span<double> channel(std::size_t ch);
  std::span<const double> channel(std::size_t ch) const;

  /// Extracts one channel as a single-channel image.
  ImageGrid channel_image(std::size_t ch) const;
  /// Stacks equally-sized single-channel images.
  static ImageGrid stack(const std::vector<ImageGrid>& planes);

  /// Size before power-of-two upsampling; equals (height, width) otherwise.
  PixelSize original_size() const { return original_; }
  void set_original_size(PixelSize s) { original_ = s; }

  bool same_shape(const ImageGrid& other) const;
  bool is_pow2_square() const;
  /// log2(height) for square power-of-two images.
  int resolution_index() const;
  bool in_unit_range() const;
  bool all_finite() const;

  friend bool operator==(const ImageGrid& a, const ImageGrid& b) {
    return a.height_ == b.height_ && a.width_ == b.width_ && a.channels_ == b.channels_ &&
           a.data_ == b.data_;
  }

 private:
  std::size_t height_ = 0;
  std::size_t width_ = 0;
  std::size_t channels_ = 0;
  std::vector<double> data_;
  PixelSize original_{};
};

ImageGrid clamp_unit(ImageGrid img);

}  // namespace tnp
