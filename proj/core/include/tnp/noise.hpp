#pragma once

// Synthetic perturbation fields and the histogram-based KL analysis of how
// their distribution changes under downsampling.

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "tnp/image.hpp"

namespace tnp {

enum class NoiseKind { kGaussian, kMog, kBeta, kUniform, kStructured };

std::string_view to_string(NoiseKind kind);
std::optional<NoiseKind> parse_noise_kind(std::string_view name);

struct NoiseSpec {
  NoiseKind kind = NoiseKind::kGaussian;
  /// Standard deviation of the Gaussian reference; the other random kinds
  /// are rescaled to this sample std when match_snr is set.
  double sigma = 0.3;
  bool match_snr = true;
  /// Amplitude of the structured kind (infinity norm).
  double epsilon = 8.0 / 255.0;
  /// Band-pass scales of the structured kind (difference of Gaussians).
  double band_low_sigma = 1.0;
  double band_high_sigma = 3.0;
  std::uint64_t seed = 0;
};

ImageGrid gen_noise(const NoiseSpec& spec, std::size_t height, std::size_t width,
                    std::size_t channels = 1);

/// Adds a field to an image and clamps to [0,1].
ImageGrid add_clamped(const ImageGrid& img, const ImageGrid& noise);

struct Histogram {
  double lo = 0.0;
  double hi = 0.0;
  std::vector<std::size_t> counts;
  double mean = 0.0;
  double stddev = 0.0;
  std::size_t samples = 0;
};

inline constexpr std::size_t kDefaultKlBins = 100;
inline constexpr double kKlSmoothing = 1e-10;

/// Histogram over [mean - 4 std, mean + 4 std] with equal-width bins.
Histogram moment_histogram(std::span<const double> values, std::size_t bins);

/// KL(histogram || Gaussian with the sample mean and variance). Both sides
/// get additive smoothing and are renormalized, so the result is >= 0.
double kl_vs_gaussian(std::span<const double> values, std::size_t bins = kDefaultKlBins);

enum class DownsampleMethod { kAvgPool, kStride };
std::string_view to_string(DownsampleMethod method);

struct LevelStats {
  int level = 0;
  double kl = 0.0;
  Histogram histogram;
};

/// KL-vs-Gaussian of the field at levels 0..levels of repeated downsampling.
std::vector<LevelStats> downsample_distribution_sweep(const ImageGrid& noise, int levels,
                                                      DownsampleMethod method,
                                                      std::size_t bins = kDefaultKlBins);

}  // namespace tnp
