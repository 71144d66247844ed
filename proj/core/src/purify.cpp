#include "tnp/purify.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <string>

#include "tnp/errors.hpp"
#include "tnp/metrics.hpp"
#include "tnp/qtt_image.hpp"
#include "tnp/rng.hpp"

namespace tnp {

namespace {

double sign(double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); }

// Largest value v' near v with base + v' inside [0,1] in floating point.
double feasible_offset(double base, double v) {
  const double target = std::clamp(base + v, 0.0, 1.0);
  double off = target - base;
  while (base + off > 1.0) off = std::nextafter(off, -std::numeric_limits<double>::infinity());
  while (base + off < 0.0) off = std::nextafter(off, std::numeric_limits<double>::infinity());
  return off;
}

void require_same(const ImageGrid& a, const ImageGrid& b, const char* what) {
  if (!a.same_shape(b)) throw StructuralError(std::string(what) + ": image shapes differ");
}

}  // namespace

void PurifyConfig::validate() const {
  if (D < 1 || D > 12) throw ConfigError("purify: D must be in [1, 12]");
  if (l < 0 || l >= D) throw ConfigError("purify: need 0 <= l < D");
  if (T < 0) throw ConfigError("purify: T must be nonnegative");
  if (N < 1) throw ConfigError("purify: N must be >= 1");
  if (!(alpha > 0.0)) throw ConfigError("purify: alpha must be positive");
  if (!(eta >= 0.0)) throw ConfigError("purify: eta must be nonnegative");
  if (!(beta > 0.0)) throw ConfigError("purify: beta must be positive");
  if (max_rank == 0) throw ConfigError("purify: max_rank must be positive");
  if (!(prior_weight >= 0.0)) throw ConfigError("purify: prior_weight must be >= 0");
  if (max_halvings < 0) throw ConfigError("purify: max_halvings must be >= 0");
  coarse_fit_config().validate();
}

FitConfig PurifyConfig::coarse_fit_config() const {
  FitConfig f = fit;
  f.D = D - l;
  f.max_rank = max_rank;
  return f;
}

InvariantCounts& InvariantCounts::operator+=(const InvariantCounts& o) {
  checks += o.checks;
  box_violations += o.box_violations;
  feasibility_violations += o.feasibility_violations;
  prior_mutations += o.prior_mutations;
  return *this;
}

InvariantCounts PurifyTrace::invariants() const {
  InvariantCounts total;
  for (const auto& ch : channels) {
    for (const auto& st : ch.stages) total += st.invariants;
  }
  return total;
}

InnerMaxState inner_maximize(const ImageGrid& y_hat, const ImageGrid& x_d, double alpha,
                             double eta, int steps) {
  require_same(y_hat, x_d, "inner_maximize");
  InnerMaxState st;
  st.eta = eta;
  st.delta = ImageGrid(y_hat.height(), y_hat.width(), y_hat.channels());
  auto delta = st.delta.values();
  const auto y = y_hat.values();
  ImageGrid probe = y_hat;
  for (int n = 0; n < steps; ++n) {
    auto p = probe.values();
    for (std::size_t i = 0; i < p.size(); ++i) p[i] = y[i] + delta[i];
    const SsimGradient g = ssim_grad(probe, x_d);
    const auto gv = g.grad.values();
    for (std::size_t i = 0; i < delta.size(); ++i) {
      delta[i] = std::clamp(delta[i] + alpha * sign(gv[i]), -eta, eta);
    }
  }
  st.delta_star = ImageGrid(y_hat.height(), y_hat.width(), y_hat.channels());
  auto ds = st.delta_star.values();
  for (std::size_t i = 0; i < ds.size(); ++i) ds[i] = feasible_offset(y[i], delta[i]);
  return st;
}

ObjectiveValue objective_loss_and_grad(const ImageGrid& x_d, const ImageGrid& y_hat,
                                       const ImageGrid& delta_star, const ImageGrid& prior,
                                       double prior_weight) {
  require_same(x_d, y_hat, "objective_loss_and_grad");
  require_same(x_d, delta_star, "objective_loss_and_grad");
  require_same(x_d, prior, "objective_loss_and_grad");
  const auto x = x_d.values();
  const auto y = y_hat.values();
  const auto ds = delta_star.values();
  const auto p = prior.values();
  const double inv_n = 1.0 / static_cast<double>(x.size());
  ObjectiveValue out;
  out.grad = ImageGrid(x_d.height(), x_d.width(), x_d.channels());
  auto g = out.grad.values();
  double fit = 0.0, reg = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double r1 = (y[i] + ds[i]) - x[i];
    const double r2 = y[i] - p[i];
    fit += r1 * r1;
    reg += r2 * r2;
    g[i] = (r1 + prior_weight * r2) * inv_n;
  }
  out.loss = 0.5 * fit * inv_n + prior_weight * 0.5 * reg * inv_n;
  return out;
}

TTFormat tnp_stage(const ImageGrid& x_full, const TTFormat& prev, int d, const PurifyConfig& cfg,
                   StageTrace* trace) {
  if (x_full.channels() != 1) throw StructuralError("tnp_stage works on one channel");
  const int full = x_full.resolution_index();
  if (full != cfg.D) throw StructuralError("tnp_stage: input is not at resolution D");
  if (d < 1 || d > cfg.D || static_cast<int>(prev.order()) != d - 1) {
    throw StructuralError("tnp_stage: stage resolution " + std::to_string(d) +
                          " does not follow a TT of order " + std::to_string(prev.order()));
  }
  const auto start = std::chrono::steady_clock::now();
  StageTrace local;
  StageTrace& tr = trace != nullptr ? *trace : local;
  tr.resolution = d;

  TTFormat tt = tt_balance(prolong_image(prev, cfg.max_rank, cfg.round_tol));
  DenseTensor y = tt_contract(tt);
  const ImageGrid prior = dequantize(y);
  const ImageGrid prior_copy = cfg.check_invariants ? prior : ImageGrid();
  const ImageGrid x_d = avgpool(x_full, cfg.D - d);
  const DenseTensor qx = quantize(x_d).tensor;
  const DenseTensor qp = quantize(prior).tensor;
  const double inv_n = 1.0 / static_cast<double>(qx.size());

  for (int t = 0; t < cfg.T; ++t) {
    const ImageGrid y_hat = dequantize(y);
    const InnerMaxState inner = inner_maximize(y_hat, x_d, cfg.alpha, cfg.eta, cfg.N);
    if (cfg.check_invariants) {
      ++tr.invariants.checks;
      const auto dv = inner.delta.values();
      if (std::any_of(dv.begin(), dv.end(), [&](double v) { return std::abs(v) > cfg.eta; })) {
        ++tr.invariants.box_violations;
      }
      const auto yv = y_hat.values();
      const auto sv = inner.delta_star.values();
      for (std::size_t i = 0; i < yv.size(); ++i) {
        const double v = yv[i] + sv[i];
        if (v < 0.0 || v > 1.0) {
          ++tr.invariants.feasibility_violations;
          break;
        }
      }
    }
    const ObjectiveValue e = objective_loss_and_grad(x_d, y_hat, inner.delta_star, prior, cfg.prior_weight);
    tr.loss.push_back(e.loss);
    const DenseTensor qd = quantize(inner.delta_star).tensor;
    const DenseTensor qg = quantize(e.grad).tensor;
    const TensorLoss loss = [&](const DenseTensor& c) {
      double fit = 0.0, reg = 0.0;
      for (std::size_t i = 0; i < c.size(); ++i) {
        const double r1 = (c[i] + qd[i]) - qx[i];
        const double r2 = c[i] - qp[i];
        fit += r1 * r1;
        reg += r2 * r2;
      }
      return 0.5 * fit * inv_n + cfg.prior_weight * 0.5 * reg * inv_n;
    };
    StepResult s = backtracking_step(tt, qg, e.loss, loss, cfg.beta, cfg.max_halvings);
    tt = tt_balance(s.tt);
    y = std::move(s.contraction);
  }
  if (cfg.check_invariants && !(prior == prior_copy)) ++tr.invariants.prior_mutations;
  tr.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return tt;
}

PurifyResult tnp_purify(const ImageGrid& img, const PurifyConfig& cfg) {
  cfg.validate();
  if (!img.all_finite()) throw NumericError("purify: input contains NaN or Inf");
  const ImageGrid x = resize_to_pow2(img, cfg.D);
  const FitConfig coarse_cfg = cfg.coarse_fit_config();

  PurifyResult result;
  std::vector<ImageGrid> planes;
  for (std::size_t ch = 0; ch < x.channels(); ++ch) {
    const ImageGrid plane = x.channel_image(ch);
    FitConfig fc = coarse_cfg;
    fc.seed = derive_seed(cfg.seed, {ch});
    ChannelTrace ct;
    FitResult fit = putt_fit(avgpool(plane, cfg.l), fc);
    if (!fit.tt.all_finite()) {
      throw NumericError("purify: NaN in coarse PuTT stage (channel " + std::to_string(ch) + ")");
    }
    ct.coarse = std::move(fit.trace);
    TTFormat tt = std::move(fit.tt);
    for (int d = cfg.D - cfg.l + 1; d <= cfg.D; ++d) {
      StageTrace st;
      tt = tnp_stage(plane, tt, d, cfg, &st);
      if (!tt.all_finite()) {
        throw NumericError("purify: NaN in adversarial stage d=" + std::to_string(d) +
                           " (channel " + std::to_string(ch) + ")");
      }
      ct.stages.push_back(std::move(st));
    }
    planes.push_back(clamp_unit(qtt_to_image(tt)));
    result.channels.push_back(std::move(tt));
    result.trace.channels.push_back(std::move(ct));
  }
  result.purified_pow2 = ImageGrid::stack(planes);
  result.purified_pow2.set_original_size(x.original_size());
  result.purified = resize_from_pow2(result.purified_pow2, x.original_size());
  if (!result.purified.all_finite()) throw NumericError("purify: NaN in final resize");
  return result;
}

}  // namespace tnp
