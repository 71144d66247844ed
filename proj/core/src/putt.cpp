#include "tnp/putt.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>
#include <string>

#include "tnp/errors.hpp"
#include "tnp/metrics.hpp"

namespace tnp {

namespace {

constexpr double kDivergenceFactor = 1e6;

double mean_square(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return s / static_cast<double>(v.size());
}

std::string beta_str(double beta) {
  std::ostringstream os;
  os << beta;
  return os.str();
}

}  // namespace

void FitConfig::validate() const {
  if (D < 1 || D > 12) throw ConfigError("fit: D must be in [1, 12]");
  if (l < 0 || l >= D) throw ConfigError("fit: need 0 <= l < D");
  if (T < 0) throw ConfigError("fit: T must be nonnegative");
  if (max_rank == 0) throw ConfigError("fit: max_rank must be positive");
  if (!(learn_rate > 0.0)) throw ConfigError("fit: learn_rate must be positive");
  if (init_scale && *init_scale < 0.0) throw ConfigError("fit: init_scale must be >= 0");
  if (!(init_gain > 0.0)) throw ConfigError("fit: init_gain must be positive");
  if (round_tol < 0.0) throw ConfigError("fit: round_tol must be >= 0");
  if (max_halvings < 0) throw ConfigError("fit: max_halvings must be >= 0");
  if (!upsample_iters.empty()) {
    if (static_cast<int>(upsample_iters.size()) != l) {
      throw ConfigError("fit: upsample_iters needs exactly l entries");
    }
    for (std::size_t k = 0; k < upsample_iters.size(); ++k) {
      if (upsample_iters[k] < 1 || upsample_iters[k] > T) {
        throw ConfigError("fit: upsample iterations must lie in [1, T]");
      }
      if (k > 0 && upsample_iters[k] <= upsample_iters[k - 1]) {
        throw ConfigError("fit: upsample iterations must be strictly increasing");
      }
    }
  } else if (l > 0 && T < l + 1) {
    throw ConfigError("fit: T too small for the default schedule");
  }
}

std::vector<int> FitConfig::schedule() const {
  if (!upsample_iters.empty()) return upsample_iters;
  std::vector<int> s;
  for (int k = 1; k <= l; ++k) s.push_back(k * T / (l + 1));
  return s;
}

std::vector<std::size_t> qtt_rank_bounds(int d, std::size_t max_rank) {
  std::vector<std::size_t> r(static_cast<std::size_t>(d) + 1, 1);
  for (int k = 1; k < d; ++k) {
    const int e = std::min(k, d - k);
    // 4^e overflows long before it matters; cap the exponent.
    const std::size_t bound = e >= 16 ? max_rank : (std::size_t{1} << (2 * e));
    r[static_cast<std::size_t>(k)] = std::min(bound, max_rank);
  }
  return r;
}

TTFormat init_cores(int d, std::size_t max_rank, double init_scale, std::uint64_t seed) {
  if (d < 1) throw RangeError("init_cores needs d >= 1");
  const auto r = qtt_rank_bounds(d, max_rank);
  std::mt19937_64 gen(seed);
  std::uniform_real_distribution<double> u(-init_scale, init_scale);
  std::vector<DenseTensor> cores;
  for (int k = 0; k < d; ++k) {
    DenseTensor c(Shape{r[static_cast<std::size_t>(k)], 4, r[static_cast<std::size_t>(k) + 1]});
    if (init_scale > 0.0) {
      for (double& v : c.data()) v = u(gen);
    }
    cores.push_back(std::move(c));
  }
  return TTFormat(std::move(cores));
}

double matched_init_scale(const std::vector<std::size_t>& ranks, std::size_t mode_size,
                          double target_rms) {
  (void)mode_size;
  const std::size_t d = ranks.size() - 1;
  double log_bonds = 0.0;
  for (std::size_t k = 1; k < d; ++k) log_bonds += std::log(static_cast<double>(ranks[k]));
  // E[y^2] = prod_k Var(core entry) * prod_bonds r_k, Var = s^2 / 3.
  const double log_var =
      (2.0 * std::log(std::max(target_rms, 1e-12)) - log_bonds) / static_cast<double>(d);
  return std::sqrt(3.0 * std::exp(log_var));
}

double half_mse(const DenseTensor& y, const DenseTensor& target) {
  if (y.size() != target.size()) throw StructuralError("half_mse: size mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    const double d = y[i] - target[i];
    s += d * d;
  }
  return 0.5 * s / static_cast<double>(y.size());
}

StepResult backtracking_step(const TTFormat& tt, const DenseTensor& loss_grad_y,
                             double loss_before, const TensorLoss& loss, double learn_rate,
                             int max_halvings) {
  StepResult out{tt, {}, loss_before, loss_before, 0.0, 0};
  const auto grads = mse_core_gradients(tt, loss_grad_y);
  bool any = false;
  for (const auto& g : grads) {
    for (double v : g.data()) {
      if (v != 0.0) {
        any = true;
        break;
      }
    }
    if (any) break;
  }
  if (!any) {
    out.contraction = tt_contract(tt);
    return out;
  }
  double step = learn_rate;
  double last_trial = loss_before;
  for (int h = 0; h <= max_halvings; ++h) {
    TTFormat cand = tt_axpy(tt, -step, grads);
    DenseTensor y = tt_contract(cand);
    const double l = loss(y);
    last_trial = l;
    if (std::isfinite(l) && l <= loss_before) {
      out.tt = std::move(cand);
      out.contraction = std::move(y);
      out.loss_after = l;
      out.step = step;
      out.halvings = h;
      return out;
    }
    step *= 0.5;
  }
  if (!std::isfinite(last_trial) || last_trial > kDivergenceFactor * loss_before) {
    throw DivergenceError("gradient step diverged with learning rate beta=" +
                          beta_str(learn_rate) + " even after " + std::to_string(max_halvings) +
                          " halvings");
  }
  out.contraction = tt_contract(tt);
  out.halvings = max_halvings;
  return out;
}

StepResult gd_step(const TTFormat& tt, const DenseTensor& target, double learn_rate,
                   int max_halvings) {
  const DenseTensor y = tt_contract(tt);
  if (y.size() != target.size()) throw StructuralError("gd_step: target shape mismatch");
  DenseTensor grad = y;
  const double inv_n = 1.0 / static_cast<double>(y.size());
  for (std::size_t i = 0; i < grad.size(); ++i) grad[i] = (y[i] - target[i]) * inv_n;
  return backtracking_step(
      tt, grad, half_mse(y, target), [&](const DenseTensor& c) { return half_mse(c, target); },
      learn_rate, max_halvings);
}

StepResult gd_step(const TTFormat& tt, const QuantizedTensor& target, double learn_rate,
                   int max_halvings) {
  return gd_step(tt, target.tensor, learn_rate, max_halvings);
}

ImageGrid qtt_to_image(const TTFormat& tt) { return dequantize(tt_contract(tt)); }

namespace {

// Runs `iterations` descent steps on one target, appending to trace.loss.
TTFormat descend(TTFormat tt, const DenseTensor& target, int iterations, double learn_rate,
                 int max_halvings, double reference_loss, FitTrace& trace) {
  DenseTensor y = tt_contract(tt);
  const double inv_n = 1.0 / static_cast<double>(y.size());
  const TensorLoss loss = [&](const DenseTensor& c) { return half_mse(c, target); };
  for (int t = 0; t < iterations; ++t) {
    const double before = half_mse(y, target);
    trace.loss.push_back(before);
    DenseTensor grad(y.shape());
    for (std::size_t i = 0; i < grad.size(); ++i) grad[i] = (y[i] - target[i]) * inv_n;
    StepResult s = backtracking_step(tt, grad, before, loss, learn_rate, max_halvings);
    if (!std::isfinite(s.loss_after) || s.loss_after > kDivergenceFactor * reference_loss) {
      throw DivergenceError("fit diverged with learning rate beta=" + beta_str(learn_rate));
    }
    // Rebalancing is a gauge change: same tensor, better-conditioned cores.
    tt = tt_balance(s.tt);
    y = std::move(s.contraction);
  }
  return tt;
}

}  // namespace

FitResult putt_fit(const ImageGrid& img, const FitConfig& cfg) {
  cfg.validate();
  if (img.channels() != 1) throw StructuralError("putt_fit fits one channel at a time");
  if (img.resolution_index() != cfg.D) {
    throw StructuralError("putt_fit: image resolution " + std::to_string(img.resolution_index()) +
                          " does not match D=" + std::to_string(cfg.D));
  }
  using Clock = std::chrono::steady_clock;
  const auto schedule = cfg.schedule();

  int d = cfg.D - cfg.l;
  QuantizedTensor target = quantize(avgpool(img, cfg.l));
  const double rms = std::sqrt(mean_square(target.tensor.data()));
  const double scale =
      cfg.init_scale ? *cfg.init_scale
                     : matched_init_scale(qtt_rank_bounds(d, cfg.max_rank), 4, cfg.init_gain * rms);
  TTFormat tt = init_cores(d, cfg.max_rank, scale, cfg.seed);
  const double reference_loss =
      std::max(half_mse(tt_contract(tt), target.tensor), std::numeric_limits<double>::min());

  FitResult result;
  result.trace.loss.reserve(static_cast<std::size_t>(cfg.T));
  int t = 1;
  auto close_level = [&](int first, Clock::time_point start) {
    LevelRecord rec;
    rec.resolution = d;
    rec.first_iteration = first;
    rec.iterations = t - first;
    const ImageGrid fit = qtt_to_image(tt);
    const ImageGrid ref = dequantize(target);
    rec.psnr = psnr(ref, fit);
    rec.ssim = ssim(ref, fit).value;
    rec.seconds = std::chrono::duration<double>(Clock::now() - start).count();
    result.trace.levels.push_back(rec);
  };

  for (std::size_t level = 0; level <= schedule.size(); ++level) {
    const auto start = Clock::now();
    const int first = t;
    const int stop = level < schedule.size() ? schedule[level] : cfg.T + 1;
    tt = descend(std::move(tt), target.tensor, stop - t, cfg.learn_rate, cfg.max_halvings,
                 reference_loss, result.trace);
    t = stop;
    close_level(first, start);
    if (level < schedule.size()) {
      tt = tt_balance(prolong_image(tt, cfg.max_rank, cfg.round_tol));
      ++d;
      target = quantize(avgpool(img, cfg.D - d));
    }
  }
  if (!tt.all_finite()) throw NumericError("putt_fit produced non-finite cores");
  result.tt = std::move(tt);
  return result;
}

FitResult gd_fit(TTFormat tt, const DenseTensor& target, int iterations, double learn_rate,
                 int max_halvings) {
  FitResult result;
  const double reference_loss =
      std::max(half_mse(tt_contract(tt), target), std::numeric_limits<double>::min());
  const auto start = std::chrono::steady_clock::now();
  result.tt = descend(std::move(tt), target, iterations, learn_rate, max_halvings,
                      reference_loss, result.trace);
  LevelRecord rec;
  rec.resolution = -1;
  rec.first_iteration = 1;
  rec.iterations = iterations;
  rec.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  result.trace.levels.push_back(rec);
  return result;
}

}  // namespace tnp
