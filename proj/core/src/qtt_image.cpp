#include "tnp/qtt_image.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <string>

#include "tnp/errors.hpp"

namespace tnp {

namespace {

void require_levels(const ImageGrid& img, int levels) {
  const int d = img.resolution_index();
  if (levels < 0 || levels > d) {
    throw RangeError("requested " + std::to_string(levels) +
                     " pooling levels on a resolution-" + std::to_string(d) + " image");
  }
}

ImageGrid pool_once(const ImageGrid& img) {
  const std::size_t h = img.height() / 2, w = img.width() / 2;
  ImageGrid out(h, w, img.channels());
  for (std::size_t c = 0; c < img.channels(); ++c) {
    for (std::size_t r = 0; r < h; ++r) {
      for (std::size_t q = 0; q < w; ++q) {
        // Same summation order as mean_last_mode: (0,0), (0,1), (1,0), (1,1).
        const double s = img(2 * r, 2 * q, c) + img(2 * r, 2 * q + 1, c) +
                         img(2 * r + 1, 2 * q, c) + img(2 * r + 1, 2 * q + 1, c);
        out(r, q, c) = s * 0.25;
      }
    }
  }
  return out;
}

double sample_bilinear(std::span<const double> plane, std::size_t h, std::size_t w, double y,
                       double x) {
  const auto y0 = static_cast<std::size_t>(std::floor(y));
  const auto x0 = static_cast<std::size_t>(std::floor(x));
  const std::size_t y1 = std::min(y0 + 1, h - 1);
  const std::size_t x1 = std::min(x0 + 1, w - 1);
  const double fy = y - static_cast<double>(y0);
  const double fx = x - static_cast<double>(x0);
  const double top = plane[y0 * w + x0] * (1.0 - fx) + plane[y0 * w + x1] * fx;
  const double bot = plane[y1 * w + x0] * (1.0 - fx) + plane[y1 * w + x1] * fx;
  return top * (1.0 - fy) + bot * fy;
}

ImageGrid resize_bilinear(const ImageGrid& img, std::size_t th, std::size_t tw) {
  ImageGrid out(th, tw, img.channels());
  const double sy = th > 1 ? static_cast<double>(img.height() - 1) / static_cast<double>(th - 1) : 0.0;
  const double sx = tw > 1 ? static_cast<double>(img.width() - 1) / static_cast<double>(tw - 1) : 0.0;
  for (std::size_t c = 0; c < img.channels(); ++c) {
    const auto plane = img.channel(c);
    for (std::size_t r = 0; r < th; ++r) {
      const double y = std::min(static_cast<double>(r) * sy, static_cast<double>(img.height() - 1));
      for (std::size_t q = 0; q < tw; ++q) {
        const double x = std::min(static_cast<double>(q) * sx, static_cast<double>(img.width() - 1));
        out(r, q, c) = sample_bilinear(plane, img.height(), img.width(), y, x);
      }
    }
  }
  return out;
}

}  // namespace

std::size_t quantized_offset(std::size_t row, std::size_t col, int d) {
  std::size_t flat = 0;
  for (int k = d - 1; k >= 0; --k) {
    const std::size_t i = (row >> k) & 1U;
    const std::size_t j = (col >> k) & 1U;
    flat = flat * 4 + 2 * i + j;
  }
  return flat;
}

QuantizedTensor quantize(const ImageGrid& img, std::size_t channel) {
  const int d = img.resolution_index();
  if (d < 1) throw StructuralError("quantize needs at least a 2x2 image");
  const auto plane = img.channel(channel);
  std::vector<double> data(plane.size());
  const std::size_t n = img.width();
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t c = 0; c < n; ++c) data[quantized_offset(r, c, d)] = plane[r * n + c];
  }
  return {DenseTensor(Shape(static_cast<std::size_t>(d), 4), std::move(data)),
          BitOrder::kScaleMajor};
}

ImageGrid dequantize(const DenseTensor& t) {
  const std::size_t d = t.order();
  if (t.size() == 0) throw StructuralError("dequantize: empty tensor");
  for (std::size_t k = 0; k < d; ++k) {
    if (t.dim(k) != 4) {
      throw StructuralError("dequantize: mode " + std::to_string(k) + " has size " +
                            std::to_string(t.dim(k)) + ", expected 4");
    }
  }
  const std::size_t n = std::size_t{1} << d;
  ImageGrid img(n, n, 1);
  auto plane = img.channel(0);
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t c = 0; c < n; ++c) {
      plane[r * n + c] = t[quantized_offset(r, c, static_cast<int>(d))];
    }
  }
  return img;
}

ImageGrid dequantize(const QuantizedTensor& qt) { return dequantize(qt.tensor); }

DenseTensor mean_last_mode(const DenseTensor& t) {
  // Order 1 reduces to an order-0 scalar, the 1x1 pooled image.
  if (t.order() < 1) throw StructuralError("mean_last_mode needs order >= 1");
  const std::size_t last = t.dim(t.order() - 1);
  Shape shape(t.shape().begin(), t.shape().end() - 1);
  DenseTensor out(shape);
  for (std::size_t i = 0; i < out.size(); ++i) {
    double s = 0.0;
    for (std::size_t k = 0; k < last; ++k) s += t[i * last + k];
    out[i] = s / static_cast<double>(last);
  }
  return out;
}

ImageGrid avgpool(const ImageGrid& img, int levels) {
  require_levels(img, levels);
  ImageGrid out = img;
  for (int l = 0; l < levels; ++l) out = pool_once(out);
  out.set_original_size({out.height(), out.width()});
  return out;
}

ImageGrid stride_sample(const ImageGrid& img, int levels) {
  require_levels(img, levels);
  const std::size_t step = std::size_t{1} << levels;
  const std::size_t h = img.height() / step, w = img.width() / step;
  ImageGrid out(h, w, img.channels());
  for (std::size_t c = 0; c < img.channels(); ++c) {
    for (std::size_t r = 0; r < h; ++r) {
      for (std::size_t q = 0; q < w; ++q) out(r, q, c) = img(r * step, q * step, c);
    }
  }
  return out;
}

MPOFormat build_prolongation_mpo_1d(int d) {
  if (d < 1) throw RangeError("prolongation needs d >= 1");
  // Bond index is the carry travelling from fine to coarse bits: left bond
  // is carry-out, right bond carry-in. An input bit equals the output bit
  // plus carry-in, modulo 2.
  auto bit_core = [](std::size_t left) {
    DenseTensor core(Shape{left, 2, 2, 2});
    for (std::size_t cout = 0; cout < left; ++cout) {
      for (std::size_t out = 0; out < 2; ++out) {
        for (std::size_t cin = 0; cin < 2; ++cin) {
          const std::size_t sum = out + cin;
          if (sum / 2 != cout) continue;
          core.at({cout, out, sum % 2, cin}) = 1.0;
        }
      }
    }
    return core;
  };
  std::vector<DenseTensor> cores;
  cores.push_back(bit_core(1));
  for (int l = 1; l < d; ++l) cores.push_back(bit_core(2));
  // Even outputs copy their sample; odd outputs average it with the next.
  DenseTensor terminal(Shape{2, 2, 1, 1});
  terminal.at({0, 0, 0, 0}) = 1.0;
  terminal.at({0, 1, 0, 0}) = 0.5;
  terminal.at({1, 1, 0, 0}) = 0.5;
  cores.push_back(std::move(terminal));
  return MPOFormat(std::move(cores));
}

MPOFormat build_prolongation_mpo(int d) {
  const MPOFormat one = build_prolongation_mpo_1d(d);
  std::vector<DenseTensor> cores;
  for (const auto& a : one.cores()) {
    const std::size_t sl = a.dim(0), no = a.dim(1), ni = a.dim(2), sr = a.dim(3);
    DenseTensor k(Shape{sl * sl, no * no, ni * ni, sr * sr});
    for (std::size_t lr = 0; lr < sl; ++lr)
      for (std::size_t lc = 0; lc < sl; ++lc)
        for (std::size_t orow = 0; orow < no; ++orow)
          for (std::size_t ocol = 0; ocol < no; ++ocol)
            for (std::size_t irow = 0; irow < ni; ++irow)
              for (std::size_t icol = 0; icol < ni; ++icol)
                for (std::size_t rr = 0; rr < sr; ++rr)
                  for (std::size_t rc = 0; rc < sr; ++rc) {
                    const double v = a.at({lr, orow, irow, rr}) * a.at({lc, ocol, icol, rc});
                    if (v != 0.0) {
                      k.at({lr * sl + lc, orow * no + ocol, irow * ni + icol, rr * sr + rc}) = v;
                    }
                  }
    cores.push_back(std::move(k));
  }
  return MPOFormat(std::move(cores));
}

TTFormat prolong_image(const TTFormat& tt, std::size_t max_rank, double tol) {
  for (std::size_t m : tt.mode_sizes()) {
    if (m != 4) throw StructuralError("prolong_image expects a mode-4 QTT");
  }
  const MPOFormat op = build_prolongation_mpo(static_cast<int>(tt.order()));
  return tt_round(mpo_apply(op, tt), max_rank, tol);
}

int min_resolution_index(std::size_t height, std::size_t width) {
  const std::size_t m = std::max(height, width);
  return static_cast<int>(std::bit_width(m - 1));
}

ImageGrid resize_to_pow2(const ImageGrid& img, int D) {
  if (D < 0 || D >= 31) throw RangeError("resolution index out of range");
  const int need = min_resolution_index(img.height(), img.width());
  if (D < need) {
    throw RangeError("resolution " + std::to_string(D) + " too small for " +
                     std::to_string(img.height()) + "x" + std::to_string(img.width()));
  }
  const std::size_t n = std::size_t{1} << D;
  ImageGrid out = (img.height() == n && img.width() == n) ? img : resize_bilinear(img, n, n);
  out.set_original_size({img.height(), img.width()});
  return out;
}

ImageGrid resize_from_pow2(const ImageGrid& img, PixelSize target) {
  if (target.height == 0 || target.width == 0) throw RangeError("target size must be positive");
  ImageGrid out = (img.height() == target.height && img.width() == target.width)
                      ? img
                      : resize_bilinear(img, target.height, target.width);
  out = clamp_unit(std::move(out));
  out.set_original_size(target);
  return out;
}

}  // namespace tnp
