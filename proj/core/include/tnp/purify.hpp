#pragma once

// Tensor network purification. The coarsest stage is a plain PuTT fit of
// the pooled input; every finer stage starts from the prolonged previous
// TT and minimizes
//
//   0.5 mean((x_d - (y + delta*))^2) + w * 0.5 mean((prior - y)^2)
//
// over the cores, where prior is the prolonged previous reconstruction and
// delta* comes from a few sign-ascent steps on SSIM(y + delta, x_d) inside
// the box |delta| <= eta, projected so that y + delta* stays in [0,1].

#include <cstdint>
#include <vector>

#include "tnp/image.hpp"
#include "tnp/putt.hpp"
#include "tnp/tensor_train.hpp"

namespace tnp {

struct PurifyConfig {
  int D = 8;
  int l = 1;
  int T = 100;            // outer iterations per adversarial stage
  int N = 1;              // inner ascent steps
  double alpha = 0.1;     // inner step scale
  double eta = 0.1;       // inner box radius
  double beta = 0.005;    // outer learning rate
  std::size_t max_rank = 64;
  double prior_weight = 1.0;
  double round_tol = 0.0;
  int max_halvings = 20;
  /// PuTT settings for the coarsest stage; D is overridden with D - l.
  FitConfig fit{};
  std::uint64_t seed = 0;
  /// Check the inner-max box and feasibility invariants every iteration
  /// and the frozen prior at the end of every stage.
  bool check_invariants = false;

  void validate() const;
  FitConfig coarse_fit_config() const;
};

struct InnerMaxState {
  ImageGrid delta;       // after the last clipped ascent step, |delta| <= eta
  ImageGrid delta_star;  // clip(y + delta, 0, 1) - y
  double eta = 0.0;
};

InnerMaxState inner_maximize(const ImageGrid& y_hat, const ImageGrid& x_d, double alpha,
                             double eta, int steps);

struct ObjectiveValue {
  double loss = 0.0;
  ImageGrid grad;  // dL/dy_hat, delta* held constant
};

ObjectiveValue objective_loss_and_grad(const ImageGrid& x_d, const ImageGrid& y_hat,
                                       const ImageGrid& delta_star, const ImageGrid& prior,
                                       double prior_weight = 1.0);

struct InvariantCounts {
  std::size_t checks = 0;
  std::size_t box_violations = 0;          // |delta| > eta somewhere
  std::size_t feasibility_violations = 0;  // y + delta* outside [0,1]
  std::size_t prior_mutations = 0;         // prior changed within a stage

  std::size_t total_violations() const {
    return box_violations + feasibility_violations + prior_mutations;
  }
  InvariantCounts& operator+=(const InvariantCounts& o);
};

struct StageTrace {
  int resolution = 0;
  std::vector<double> loss;  // objective before each outer update
  double seconds = 0.0;
  InvariantCounts invariants;
};

/// One adversarial stage at resolution d for a single channel. x_full is
/// the resolution-D input plane; prev is the TT fitted at d-1.
TTFormat tnp_stage(const ImageGrid& x_full, const TTFormat& prev, int d,
                   const PurifyConfig& cfg, StageTrace* trace = nullptr);

struct ChannelTrace {
  FitTrace coarse;
  std::vector<StageTrace> stages;
};

struct PurifyTrace {
  std::vector<ChannelTrace> channels;
  InvariantCounts invariants() const;
};

struct PurifyResult {
  ImageGrid purified;             // original size, clamped to [0,1]
  ImageGrid purified_pow2;        // 2^D x 2^D before resizing back
  std::vector<TTFormat> channels;  // resolution-D TT per channel
  PurifyTrace trace;
};

PurifyResult tnp_purify(const ImageGrid& img, const PurifyConfig& cfg);

}  // namespace tnp
