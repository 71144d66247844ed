#include "tnp/noise.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "tnp/errors.hpp"
#include "tnp/qtt_image.hpp"

namespace tnp {

namespace {

double sample_std(std::span<const double> v, double* mean_out = nullptr) {
  double mean = 0.0;
  for (double x : v) mean += x;
  mean /= static_cast<double>(v.size());
  double var = 0.0;
  for (double x : v) var += (x - mean) * (x - mean);
  var /= static_cast<double>(v.size());
  if (mean_out != nullptr) *mean_out = mean;
  return std::sqrt(var);
}

std::vector<double> gaussian_taps(double sigma) {
  const int radius = std::max(1, static_cast<int>(std::ceil(3.0 * sigma)));
  std::vector<double> k(static_cast<std::size_t>(2 * radius + 1));
  double s = 0.0;
  for (int i = -radius; i <= radius; ++i) {
    const double v = std::exp(-0.5 * i * i / (sigma * sigma));
    k[static_cast<std::size_t>(i + radius)] = v;
    s += v;
  }
  for (double& v : k) v /= s;
  return k;
}

std::size_t reflect(long i, std::size_t n) {
  const long m = static_cast<long>(n);
  while (i < 0 || i >= m) i = i < 0 ? -i - 1 : 2 * m - i - 1;
  return static_cast<std::size_t>(i);
}

std::vector<double> blur(std::span<const double> in, std::size_t h, std::size_t w, double sigma) {
  const auto k = gaussian_taps(sigma);
  const long radius = static_cast<long>(k.size() / 2);
  std::vector<double> tmp(h * w), out(h * w);
  for (std::size_t r = 0; r < h; ++r) {
    for (std::size_t c = 0; c < w; ++c) {
      double s = 0.0;
      for (long t = -radius; t <= radius; ++t) {
        s += k[static_cast<std::size_t>(t + radius)] *
             in[r * w + reflect(static_cast<long>(c) + t, w)];
      }
      tmp[r * w + c] = s;
    }
  }
  for (std::size_t r = 0; r < h; ++r) {
    for (std::size_t c = 0; c < w; ++c) {
      double s = 0.0;
      for (long t = -radius; t <= radius; ++t) {
        s += k[static_cast<std::size_t>(t + radius)] *
             tmp[reflect(static_cast<long>(r) + t, h) * w + c];
      }
      out[r * w + c] = s;
    }
  }
  return out;
}

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

}  // namespace

std::string_view to_string(NoiseKind kind) {
  switch (kind) {
    case NoiseKind::kGaussian: return "gaussian";
    case NoiseKind::kMog: return "mog";
    case NoiseKind::kBeta: return "beta";
    case NoiseKind::kUniform: return "uniform";
    case NoiseKind::kStructured: return "structured";
  }
  return "?";
}

std::optional<NoiseKind> parse_noise_kind(std::string_view name) {
  for (auto k : {NoiseKind::kGaussian, NoiseKind::kMog, NoiseKind::kBeta, NoiseKind::kUniform,
                 NoiseKind::kStructured}) {
    if (to_string(k) == name) return k;
  }
  return std::nullopt;
}

std::string_view to_string(DownsampleMethod method) {
  return method == DownsampleMethod::kAvgPool ? "avgpool" : "stride";
}

ImageGrid gen_noise(const NoiseSpec& spec, std::size_t height, std::size_t width,
                    std::size_t channels) {
  if (spec.sigma <= 0.0 || spec.epsilon < 0.0) throw ConfigError("noise scale must be positive");
  ImageGrid field(height, width, channels);
  std::mt19937_64 gen(spec.seed);
  auto v = field.values();

  switch (spec.kind) {
    case NoiseKind::kGaussian: {
      std::normal_distribution<double> n(0.0, spec.sigma);
      for (double& x : v) x = n(gen);
      return field;
    }
    case NoiseKind::kMog: {
      std::normal_distribution<double> n(0.0, 0.5);
      std::bernoulli_distribution pick(0.5);
      for (double& x : v) x = (pick(gen) ? 1.0 : -1.0) + n(gen);
      break;
    }
    case NoiseKind::kBeta: {
      // Beta(1/2, 1/2) is the arcsine law: F^{-1}(u) = sin^2(pi u / 2).
      std::uniform_real_distribution<double> u(0.0, 1.0);
      for (double& x : v) {
        const double s = std::sin(0.5 * std::numbers::pi * u(gen));
        x = s * s - 0.5;
      }
      break;
    }
    case NoiseKind::kUniform: {
      std::uniform_real_distribution<double> u(-0.5, 0.5);
      for (double& x : v) x = u(gen);
      break;
    }
    case NoiseKind::kStructured: {
      std::normal_distribution<double> n(0.0, 1.0);
      for (std::size_t c = 0; c < channels; ++c) {
        auto plane = field.channel(c);
        std::vector<double> white(plane.size());
        for (double& x : white) x = n(gen);
        const auto lo = blur(white, height, width, spec.band_low_sigma);
        const auto hi = blur(white, height, width, spec.band_high_sigma);
        for (std::size_t i = 0; i < plane.size(); ++i) {
          plane[i] = (lo[i] - hi[i]) >= 0.0 ? spec.epsilon : -spec.epsilon;
        }
      }
      return field;
    }
  }
  if (spec.match_snr) {
    const double s = sample_std(v);
    if (s > 0.0) {
      const double scale = spec.sigma / s;
      for (double& x : v) x *= scale;
    }
  }
  return field;
}

ImageGrid add_clamped(const ImageGrid& img, const ImageGrid& noise) {
  if (!img.same_shape(noise)) throw StructuralError("add_clamped: shapes differ");
  ImageGrid out = img;
  auto o = out.values();
  const auto n = noise.values();
  for (std::size_t i = 0; i < o.size(); ++i) o[i] = std::clamp(o[i] + n[i], 0.0, 1.0);
  return out;
}

Histogram moment_histogram(std::span<const double> values, std::size_t bins) {
  if (bins == 0) throw RangeError("histogram needs at least one bin");
  if (values.size() < 2) throw RangeError("histogram needs at least two samples");
  const auto [mn, mx] = std::minmax_element(values.begin(), values.end());
  if (*mn == *mx) throw RangeError("zero-variance samples have no matched Gaussian");
  Histogram h;
  h.stddev = sample_std(values, &h.mean);
  if (!(h.stddev > 0.0)) throw RangeError("zero-variance samples have no matched Gaussian");
  h.samples = values.size();
  h.lo = h.mean - 4.0 * h.stddev;
  h.hi = h.mean + 4.0 * h.stddev;
  h.counts.assign(bins, 0);
  const double width = (h.hi - h.lo) / static_cast<double>(bins);
  for (double x : values) {
    if (x < h.lo || x > h.hi) continue;
    auto b = static_cast<std::size_t>((x - h.lo) / width);
    h.counts[std::min(b, bins - 1)] += 1;
  }
  return h;
}

double kl_vs_gaussian(std::span<const double> values, std::size_t bins) {
  const Histogram h = moment_histogram(values, bins);
  std::size_t inside = 0;
  for (auto c : h.counts) inside += c;
  const double width = (h.hi - h.lo) / static_cast<double>(bins);

  std::vector<double> p(bins), q(bins);
  double psum = 0.0, qsum = 0.0;
  for (std::size_t b = 0; b < bins; ++b) {
    const double a = h.lo + width * static_cast<double>(b);
    const double mass = normal_cdf((a + width - h.mean) / h.stddev) -
                        normal_cdf((a - h.mean) / h.stddev);
    p[b] = (inside > 0 ? static_cast<double>(h.counts[b]) / static_cast<double>(inside) : 0.0) +
           kKlSmoothing;
    q[b] = mass + kKlSmoothing;
    psum += p[b];
    qsum += q[b];
  }
  double kl = 0.0;
  for (std::size_t b = 0; b < bins; ++b) {
    const double pb = p[b] / psum;
    const double qb = q[b] / qsum;
    kl += pb * std::log(pb / qb);
  }
  return std::max(kl, 0.0);
}

std::vector<LevelStats> downsample_distribution_sweep(const ImageGrid& noise, int levels,
                                                      DownsampleMethod method, std::size_t bins) {
  const int d = noise.resolution_index();
  if (levels < 0 || levels > d) throw RangeError("sweep levels exceed image resolution");
  std::vector<LevelStats> out;
  ImageGrid cur = noise;
  for (int l = 0; l <= levels; ++l) {
    if (l > 0) {
      cur = method == DownsampleMethod::kAvgPool ? avgpool(cur, 1) : stride_sample(cur, 1);
    }
    LevelStats s;
    s.level = l;
    s.histogram = moment_histogram(cur.values(), bins);
    s.kl = kl_vs_gaussian(cur.values(), bins);
    out.push_back(std::move(s));
  }
  return out;
}

}  // namespace tnp
