#pragma once

// Coarse-to-fine gradient fitting of QTT cores to an image: start from an
// average-pooled copy, fit, prolong the cores one resolution up at each
// scheduled iteration, and continue until the full resolution.

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "tnp/dense_tensor.hpp"
#include "tnp/image.hpp"
#include "tnp/qtt_image.hpp"
#include "tnp/tensor_train.hpp"

namespace tnp {

struct FitConfig {
  int D = 8;  // final resolution index
  int l = 2;  // coarse levels below D to start from
  int T = 600;
  /// Iterations at which the resolution steps up; empty means evenly
  /// spaced t_k = k*T/(l+1).
  std::vector<int> upsample_iters;
  std::size_t max_rank = 64;
  double learn_rate = 8.0;
  /// Uniform init half-width; nullopt picks it so the initial contraction
  /// has init_gain times the target's RMS.
  std::optional<double> init_scale;
  double init_gain = 0.2;
  double round_tol = 0.0;
  int max_halvings = 20;
  std::uint64_t seed = 0;

  void validate() const;
  std::vector<int> schedule() const;
};

struct LevelRecord {
  int resolution = 0;
  int first_iteration = 0;  // 1-based
  int iterations = 0;
  double psnr = 0.0;  // fit vs pooled target at the end of the level
  double ssim = 0.0;
  double seconds = 0.0;
};

struct FitTrace {
  std::vector<double> loss;  // one entry per iteration, before its update
  std::vector<LevelRecord> levels;
};

struct FitResult {
  TTFormat tt;
  FitTrace trace;
};

/// Rank bound at bond k of an order-d mode-4 QTT: min(4^k, 4^(d-k), max_rank).
std::vector<std::size_t> qtt_rank_bounds(int d, std::size_t max_rank);

/// Order-d mode-4 TT with i.i.d. uniform [-init_scale, init_scale] entries.
TTFormat init_cores(int d, std::size_t max_rank, double init_scale, std::uint64_t seed);

/// Half-width making E[y^2] of a random init equal to target_rms^2.
double matched_init_scale(const std::vector<std::size_t>& ranks, std::size_t mode_size,
                          double target_rms);

/// 0.5 * mean((y - target)^2).
double half_mse(const DenseTensor& y, const DenseTensor& target);

struct StepResult {
  TTFormat tt;
  DenseTensor contraction;  // tt_contract(tt)
  double loss_before = 0.0;
  double loss_after = 0.0;
  double step = 0.0;  // learning rate actually used, 0 if no step was taken
  int halvings = 0;
};

using TensorLoss = std::function<double(const DenseTensor&)>;

/// One gradient step on the cores given dL/dy in tensor space. Starts at
/// learn_rate and halves it while the loss increases, at most max_halvings
/// times; if nothing decreases the loss the TT is returned unchanged.
StepResult backtracking_step(const TTFormat& tt, const DenseTensor& loss_grad_y,
                             double loss_before, const TensorLoss& loss, double learn_rate,
                             int max_halvings);

/// One step on 0.5 * MSE(tt_contract(tt) - target).
StepResult gd_step(const TTFormat& tt, const DenseTensor& target, double learn_rate,
                   int max_halvings = 20);
StepResult gd_step(const TTFormat& tt, const QuantizedTensor& target, double learn_rate,
                   int max_halvings = 20);

/// Fits one channel at resolution cfg.D.
FitResult putt_fit(const ImageGrid& img, const FitConfig& cfg);

/// Plain gradient descent from a given TT to a dense target.
FitResult gd_fit(TTFormat tt, const DenseTensor& target, int iterations, double learn_rate,
                 int max_halvings);

ImageGrid qtt_to_image(const TTFormat& tt);

}  // namespace tnp
