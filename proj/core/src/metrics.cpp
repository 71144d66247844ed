#include "tnp/metrics.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <vector>

#include "tnp/errors.hpp"

namespace tnp {

namespace {

void require_same_shape(const ImageGrid& x, const ImageGrid& y, const char* what) {
  if (!x.same_shape(y)) throw StructuralError(std::string(what) + ": image shapes differ");
}

using Kernel = std::array<double, kSsimWindow>;

const Kernel& gaussian_kernel() {
  static const Kernel k = [] {
    Kernel w{};
    double s = 0.0;
    for (int i = 0; i < kSsimWindow; ++i) {
      const double t = i - kSsimWindow / 2;
      w[static_cast<std::size_t>(i)] = std::exp(-t * t / (2.0 * kSsimSigma * kSsimSigma));
      s += w[static_cast<std::size_t>(i)];
    }
    for (double& v : w) v /= s;
    return w;
  }();
  return k;
}

// Separable "valid" correlation: h x w -> (h-10) x (w-10).
std::vector<double> filter_valid(std::span<const double> in, std::size_t h, std::size_t w) {
  const auto& k = gaussian_kernel();
  const std::size_t oh = h - kSsimWindow + 1, ow = w - kSsimWindow + 1;
  std::vector<double> tmp(h * ow, 0.0);
  for (std::size_t r = 0; r < h; ++r) {
    for (std::size_t c = 0; c < ow; ++c) {
      double s = 0.0;
      for (std::size_t t = 0; t < k.size(); ++t) s += k[t] * in[r * w + c + t];
      tmp[r * ow + c] = s;
    }
  }
  std::vector<double> out(oh * ow, 0.0);
  for (std::size_t r = 0; r < oh; ++r) {
    for (std::size_t t = 0; t < k.size(); ++t) {
      const double kt = k[t];
      const double* src = &tmp[(r + t) * ow];
      double* dst = &out[r * ow];
      for (std::size_t c = 0; c < ow; ++c) dst[c] += kt * src[c];
    }
  }
  return out;
}

// Adjoint of filter_valid: (h-10) x (w-10) -> h x w.
std::vector<double> filter_adjoint(const std::vector<double>& in, std::size_t h, std::size_t w) {
  const auto& k = gaussian_kernel();
  const std::size_t oh = h - kSsimWindow + 1, ow = w - kSsimWindow + 1;
  std::vector<double> tmp(h * ow, 0.0);
  for (std::size_t r = 0; r < oh; ++r) {
    for (std::size_t t = 0; t < k.size(); ++t) {
      const double kt = k[t];
      const double* src = &in[r * ow];
      double* dst = &tmp[(r + t) * ow];
      for (std::size_t c = 0; c < ow; ++c) dst[c] += kt * src[c];
    }
  }
  std::vector<double> out(h * w, 0.0);
  for (std::size_t r = 0; r < h; ++r) {
    for (std::size_t c = 0; c < ow; ++c) {
      const double v = tmp[r * ow + c];
      for (std::size_t t = 0; t < k.size(); ++t) out[r * w + c + t] += k[t] * v;
    }
  }
  return out;
}

struct LocalStats {
  double s = 0.0;     // local SSIM
  double d_mu = 0.0;  // partial wrt local mean of x
  double d_xx = 0.0;  // partial wrt local E[x^2]
  double d_xy = 0.0;  // partial wrt local E[xy]
};

LocalStats local_ssim(double mx, double my, double exx, double eyy, double exy) {
  const double vx = exx - mx * mx;
  const double vy = eyy - my * my;
  const double cxy = exy - mx * my;
  const double num1 = 2.0 * mx * my + kSsimC1;
  const double num2 = 2.0 * cxy + kSsimC2;
  const double den1 = mx * mx + my * my + kSsimC1;
  const double den2 = vx + vy + kSsimC2;
  LocalStats st;
  st.s = (num1 * num2) / (den1 * den2);
  st.d_mu = st.s * (2.0 * my / num1 - 2.0 * mx / den1 - 2.0 * my / num2 + 2.0 * mx / den2);
  st.d_xx = -st.s / den2;
  st.d_xy = 2.0 * st.s / num2;
  return st;
}

// Sum of local SSIM over one channel; adds d(sum)/dx * scale into grad.
double channel_ssim(std::span<const double> x, std::span<const double> y, std::size_t h,
                    std::size_t w, bool global, double scale, std::span<double> grad,
                    bool with_grad) {
  const std::size_t n = h * w;
  if (global) {
    double mx = 0, my = 0, exx = 0, eyy = 0, exy = 0;
    for (std::size_t i = 0; i < n; ++i) {
      mx += x[i];
      my += y[i];
      exx += x[i] * x[i];
      eyy += y[i] * y[i];
      exy += x[i] * y[i];
    }
    const double inv = 1.0 / static_cast<double>(n);
    const LocalStats st = local_ssim(mx * inv, my * inv, exx * inv, eyy * inv, exy * inv);
    if (with_grad) {
      for (std::size_t i = 0; i < n; ++i) {
        grad[i] += scale * inv * (st.d_mu + 2.0 * x[i] * st.d_xx + y[i] * st.d_xy);
      }
    }
    return st.s;
  }
  std::vector<double> xx(n), yy(n), xy(n);
  for (std::size_t i = 0; i < n; ++i) {
    xx[i] = x[i] * x[i];
    yy[i] = y[i] * y[i];
    xy[i] = x[i] * y[i];
  }
  const auto mu_x = filter_valid(x, h, w);
  const auto mu_y = filter_valid(y, h, w);
  const auto e_xx = filter_valid(xx, h, w);
  const auto e_yy = filter_valid(yy, h, w);
  const auto e_xy = filter_valid(xy, h, w);
  const std::size_t m = mu_x.size();
  double total = 0.0;
  std::vector<double> g_mu, g_xx, g_xy;
  if (with_grad) {
    g_mu.resize(m);
    g_xx.resize(m);
    g_xy.resize(m);
  }
  for (std::size_t p = 0; p < m; ++p) {
    const LocalStats st = local_ssim(mu_x[p], mu_y[p], e_xx[p], e_yy[p], e_xy[p]);
    total += st.s;
    if (with_grad) {
      g_mu[p] = st.d_mu;
      g_xx[p] = st.d_xx;
      g_xy[p] = st.d_xy;
    }
  }
  if (with_grad) {
    const auto a = filter_adjoint(g_mu, h, w);
    const auto b = filter_adjoint(g_xx, h, w);
    const auto c = filter_adjoint(g_xy, h, w);
    for (std::size_t i = 0; i < n; ++i) {
      grad[i] += scale * (a[i] + 2.0 * x[i] * b[i] + y[i] * c[i]);
    }
  }
  return total;
}

SsimGradient ssim_impl(const ImageGrid& x, const ImageGrid& y, bool with_grad) {
  require_same_shape(x, y, "ssim");
  const std::size_t h = x.height(), w = x.width();
  const bool global = h < static_cast<std::size_t>(kSsimWindow) ||
                      w < static_cast<std::size_t>(kSsimWindow);
  const double windows =
      global ? 1.0 : static_cast<double>((h - kSsimWindow + 1) * (w - kSsimWindow + 1));
  const double scale = 1.0 / (windows * static_cast<double>(x.channels()));
  SsimGradient out;
  out.global_fallback = global;
  if (with_grad) out.grad = ImageGrid(h, w, x.channels());
  double total = 0.0;
  for (std::size_t c = 0; c < x.channels(); ++c) {
    std::span<double> g = with_grad ? out.grad.channel(c) : std::span<double>();
    total += channel_ssim(x.channel(c), y.channel(c), h, w, global, scale, g, with_grad);
  }
  out.value = total * scale;
  return out;
}

}  // namespace

std::string_view to_string(PairRole role) {
  switch (role) {
    case PairRole::kCln: return "CLN";
    case PairRole::kAdv: return "ADV";
    case PairRole::kRec: return "REC";
  }
  return "?";
}

double mse(const ImageGrid& x, const ImageGrid& y) {
  require_same_shape(x, y, "mse");
  const auto a = x.values();
  const auto b = y.values();
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return s / static_cast<double>(a.size());
}

double psnr(const ImageGrid& x, const ImageGrid& y) {
  const double m = mse(x, y);
  if (m == 0.0) return std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(1.0 / m);
}

NrmseResult nrmse(const ImageGrid& reference, const ImageGrid& y) {
  const double rmse = std::sqrt(mse(reference, y));
  const auto [lo, hi] = std::minmax_element(reference.values().begin(), reference.values().end());
  const double range = *hi - *lo;
  if (range <= 0.0) return {rmse, true};
  return {rmse / range, false};
}

SsimResult ssim(const ImageGrid& x, const ImageGrid& y) {
  const auto r = ssim_impl(x, y, false);
  return {r.value, r.global_fallback};
}

SsimGradient ssim_grad(const ImageGrid& x, const ImageGrid& y) { return ssim_impl(x, y, true); }

MetricReport compare_images(const ImageGrid& reference, const ImageGrid& y, PairRole role) {
  MetricReport r;
  r.role = role;
  const auto n = nrmse(reference, y);
  r.nrmse = n.value;
  r.nrmse_range_fallback = n.range_fallback;
  const auto s = ssim(reference, y);
  r.ssim = s.value;
  r.ssim_global_fallback = s.global_fallback;
  r.psnr = psnr(reference, y);
  return r;
}

}  // namespace tnp
