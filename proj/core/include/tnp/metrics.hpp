#pragma once

#include <limits>
#include <string_view>

#include "tnp/image.hpp"

namespace tnp {

inline constexpr double kSsimC1 = 0.01 * 0.01;
inline constexpr double kSsimC2 = 0.03 * 0.03;
inline constexpr int kSsimWindow = 11;
inline constexpr double kSsimSigma = 1.5;

/// Comparison groups of a denoising table: clean vs its reconstruction,
/// perturbed vs its reconstruction, and the two reconstructions.
enum class PairRole { kCln, kAdv, kRec };
std::string_view to_string(PairRole role);

double mse(const ImageGrid& x, const ImageGrid& y);

/// 10*log10(1/MSE) for [0,1] data; +infinity when the images are equal.
double psnr(const ImageGrid& x, const ImageGrid& y);

struct NrmseResult {
  double value = 0.0;
  /// Reference had zero range, value is the plain RMSE.
  bool range_fallback = false;
};
NrmseResult nrmse(const ImageGrid& reference, const ImageGrid& y);

struct SsimResult {
  double value = 0.0;
  /// Image smaller than the window; a single global window was used.
  bool global_fallback = false;
};

/// Mean SSIM over all fully contained 11x11 Gaussian windows (sigma 1.5),
/// averaged over channels.
SsimResult ssim(const ImageGrid& x, const ImageGrid& y);

struct SsimGradient {
  double value = 0.0;
  ImageGrid grad;  // d ssim / d x
  bool global_fallback = false;
};
SsimGradient ssim_grad(const ImageGrid& x, const ImageGrid& y);

struct MetricReport {
  PairRole role = PairRole::kCln;
  double nrmse = 0.0;
  double ssim = 0.0;
  double psnr = 0.0;  // +inf for identical images
  bool nrmse_range_fallback = false;
  bool ssim_global_fallback = false;
};

MetricReport compare_images(const ImageGrid& reference, const ImageGrid& y, PairRole role);

}  // namespace tnp
