#pragma once

// Quantized-tensor view of power-of-two images and the multiscale maps
// between resolutions.
//
// A 2^d x 2^d plane becomes an order-d tensor with every mode of size 4.
// Mode k (0-based) holds the k-th most significant row bit i_k and column
// bit j_k as index 2*i_k + j_k, so coarse scales come first and the last
// mode indexes positions inside a 2x2 block.

#include <cstddef>

#include "tnp/dense_tensor.hpp"
#include "tnp/image.hpp"
#include "tnp/tensor_train.hpp"

namespace tnp {

enum class BitOrder { kScaleMajor };

struct QuantizedTensor {
  DenseTensor tensor;
  BitOrder bit_order = BitOrder::kScaleMajor;

  int resolution_index() const { return static_cast<int>(tensor.order()); }
};

/// Flat tensor offset of pixel (row, col) at resolution d.
std::size_t quantized_offset(std::size_t row, std::size_t col, int d);

QuantizedTensor quantize(const ImageGrid& img, std::size_t channel = 0);
ImageGrid dequantize(const QuantizedTensor& qt);
/// Dequantizes any tensor whose modes are all 4 (e.g. a TT contraction).
ImageGrid dequantize(const DenseTensor& t);

/// Averages the last (finest) mode away: order d -> order d-1.
DenseTensor mean_last_mode(const DenseTensor& t);

ImageGrid avgpool(const ImageGrid& img, int levels);
ImageGrid stride_sample(const ImageGrid& img, int levels);

/// 1-D linear-interpolation prolongation 2^d -> 2^(d+1) as an MPO with
/// d input-bearing cores plus one output-only terminal core. The last
/// output sample interpolates against an implicit zero.
MPOFormat build_prolongation_mpo_1d(int d);

/// Kronecker product of the 1-D operator on rows and columns, acting on
/// order-d mode-4 QTTs and producing order d+1.
MPOFormat build_prolongation_mpo(int d);

/// Upsamples the QTT of a resolution-d plane to resolution d+1, then
/// rounds to max_rank.
TTFormat prolong_image(const TTFormat& tt, std::size_t max_rank, double tol);

/// Bilinear, corner-aligned resize of every dimension to 2^D.
ImageGrid resize_to_pow2(const ImageGrid& img, int D);
/// Bilinear, corner-aligned resize to target, clamped to [0,1].
ImageGrid resize_from_pow2(const ImageGrid& img, PixelSize target);

/// Smallest D with 2^D >= max(height, width).
int min_resolution_index(std::size_t height, std::size_t width);

}  // namespace tnp
