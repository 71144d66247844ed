#include <doctest.h>

#include <random>

#include "oracles.hpp"
#include "tnp/errors.hpp"
#include "tnp/qtt_image.hpp"

using namespace tnp;

namespace {

// Linear interpolation 2^d -> 2^(d+1), last sample against zero.
std::vector<std::vector<double>> prolong_matrix(std::size_t n) {
  std::vector<std::vector<double>> p(2 * n, std::vector<double>(n, 0.0));
  for (std::size_t i = 0; i < n; ++i) {
    p[2 * i][i] = 1.0;
    p[2 * i + 1][i] = 0.5;
    if (i + 1 < n) p[2 * i + 1][i + 1] = 0.5;
  }
  return p;
}

// P X P^T on one plane.
ImageGrid dense_prolong(const ImageGrid& x) {
  std::size_t n = x.height();
  auto p = prolong_matrix(n);
  ImageGrid out(2 * n, 2 * n);
  for (std::size_t r = 0; r < 2 * n; ++r)
    for (std::size_t c = 0; c < 2 * n; ++c) {
      double s = 0.0;
      for (std::size_t a = 0; a < n; ++a)
        for (std::size_t b = 0; b < n; ++b) s += p[r][a] * x(a, b) * p[c][b];
      out(r, c) = s;
    }
  return out;
}

// Order-d, mode-2 QTT of a length-2^d vector.
TTFormat vector_tt(const std::vector<double>& v) {
  std::size_t d = 0;
  while ((std::size_t{1} << d) < v.size()) ++d;
  return tt_svd(DenseTensor(Shape(d, 2), v), 64, 0.0);
}

}  // namespace

TEST_SUITE("quantization") {
  TEST_CASE("2x2 image enumerates (row bit, column bit)") {
    ImageGrid img(2, 2, 1, {1, 2, 3, 4});
    QuantizedTensor q = quantize(img);
    CHECK(q.tensor.shape() == Shape{4});
    CHECK(q.tensor.values() == std::vector<double>{1, 2, 3, 4});
    CHECK(dequantize(q) == img);
  }

  TEST_CASE("constant image quantizes to a constant tensor") {
    ImageGrid img(8, 8, 1, 0.37);
    QuantizedTensor q = quantize(img);
    CHECK(q.tensor.shape() == Shape{4, 4, 4});
    for (double v : q.tensor.values()) CHECK(v == 0.37);
    CHECK(dequantize(q) == img);
  }

  TEST_CASE("index map matches the bit-interleaving oracle exhaustively") {
    std::mt19937_64 rng(1);
    ImageGrid img = oracle::random_image(rng, 4, 4);
    QuantizedTensor q = quantize(img);
    for (std::size_t r = 0; r < 4; ++r)
      for (std::size_t c = 0; c < 4; ++c) {
        std::size_t m0 = 2 * (r >> 1) + (c >> 1), m1 = 2 * (r & 1) + (c & 1);
        CHECK(q.tensor.at({m0, m1}) == img(r, c));
      }
    CHECK(dequantize(q) == img);
  }

  TEST_CASE("round trip is bit-exact up to 2^11") {
    std::mt19937_64 rng(2);
    for (std::size_t n : {2u, 4u, 16u, 128u, 2048u}) {
      ImageGrid img = oracle::random_image(rng, n, n);
      CHECK(dequantize(quantize(img)) == img);
    }
  }

  TEST_CASE("structural errors") {
    CHECK_THROWS_AS(quantize(ImageGrid(4, 8)), StructuralError);
    CHECK_THROWS_AS(quantize(ImageGrid(6, 6)), StructuralError);
    CHECK_THROWS_AS(dequantize(DenseTensor({4, 2})), StructuralError);
    CHECK_THROWS_AS(dequantize(DenseTensor()), StructuralError);
    CHECK_THROWS_AS(mean_last_mode(DenseTensor(Shape{})), StructuralError);
  }

  TEST_CASE("pooling commutes with averaging the last mode") {
    std::mt19937_64 rng(3);
    for (std::size_t n : {2u, 8u, 64u, 256u}) {
      ImageGrid img = oracle::random_image(rng, n, n);
      CHECK(dequantize(mean_last_mode(quantize(img).tensor)) == avgpool(img, 1));
    }
  }
}

TEST_SUITE("pooling and sampling") {
  TEST_CASE("zero levels is the identity") {
    std::mt19937_64 rng(4);
    ImageGrid img = oracle::random_image(rng, 8, 8, 3);
    CHECK(avgpool(img, 0) == img);
    CHECK(stride_sample(img, 0) == img);
  }

  TEST_CASE("2x2 hand examples") {
    CHECK(avgpool(ImageGrid(2, 2, 1, {0, 0, 1, 1}), 1).values()[0] == 0.5);
    CHECK(stride_sample(ImageGrid(2, 2, 1, {0.1, 0.2, 0.3, 0.4}), 1).values()[0] == 0.1);
  }

  TEST_CASE("random 16x16 against block-mean and index oracles") {
    std::mt19937_64 rng(5);
    ImageGrid img = oracle::random_image(rng, 16, 16);
    ImageGrid pooled = avgpool(img, 2), strided = stride_sample(img, 2);
    REQUIRE(pooled.height() == 4);
    REQUIRE(strided.height() == 4);
    for (std::size_t i = 0; i < 4; ++i)
      for (std::size_t j = 0; j < 4; ++j) {
        double s = 0.0;
        for (std::size_t a = 0; a < 4; ++a)
          for (std::size_t b = 0; b < 4; ++b) s += img(4 * i + a, 4 * j + b);
        CHECK(pooled(i, j) == doctest::Approx(s / 16).epsilon(1e-12));
        CHECK(strided(i, j) == img(4 * i, 4 * j));
      }
  }

  TEST_CASE("too many levels is a range error") {
    CHECK_THROWS_AS(avgpool(ImageGrid(8, 8), 4), RangeError);
    CHECK_THROWS_AS(stride_sample(ImageGrid(8, 8), 4), RangeError);
  }
}

TEST_SUITE("prolongation") {
  TEST_CASE("1-D operator at d=2 materializes to the printed 8x4 matrix") {
    const double expect[8][4] = {{1, 0, 0, 0},     {0.5, 0.5, 0, 0}, {0, 1, 0, 0},
                                 {0, 0.5, 0.5, 0}, {0, 0, 1, 0},     {0, 0, 0.5, 0.5},
                                 {0, 0, 0, 1},     {0, 0, 0, 0.5}};
    DenseTensor m = mpo_to_dense(build_prolongation_mpo_1d(2));
    REQUIRE(m.shape() == Shape{8, 4});
    for (std::size_t r = 0; r < 8; ++r)
      for (std::size_t c = 0; c < 4; ++c) CHECK(m.at({r, c}) == expect[r][c]);
  }

  TEST_CASE("1-D operator on a length-4 vector equals the matrix product") {
    std::vector<double> v{0.2, -1.0, 3.0, 0.5};
    TTFormat y = mpo_apply(build_prolongation_mpo_1d(2), vector_tt(v));
    auto expect = oracle::matvec(prolong_matrix(4), v);
    CHECK(oracle::rel_err(tt_contract(y).values(), expect) <= 1e-12);
  }

  TEST_CASE("ones stay ones except the last interpolated sample") {
    TTFormat y = mpo_apply(build_prolongation_mpo_1d(3), vector_tt(std::vector<double>(8, 1.0)));
    DenseTensor d = tt_contract(y);
    REQUIRE(d.size() == 16);
    for (std::size_t i = 0; i < 15; ++i) CHECK(d[i] == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(d[15] == doctest::Approx(0.5).epsilon(1e-12));
  }

  TEST_CASE("2-D operator on a constant image follows the Kronecker oracle") {
    ImageGrid img(8, 8, 1, 0.6);
    TTFormat tt = tt_svd(quantize(img).tensor, 64, 0.0);
    ImageGrid up = dequantize(tt_contract(mpo_apply(build_prolongation_mpo(3), tt)));
    ImageGrid expect = dense_prolong(img);
    REQUIRE(up.height() == 16);
    for (std::size_t r = 0; r < 16; ++r)
      for (std::size_t c = 0; c < 16; ++c) CHECK(up(r, c) == doctest::Approx(expect(r, c)).epsilon(1e-12));
    CHECK(up(5, 7) == doctest::Approx(0.6));
    CHECK(up(15, 3) == doctest::Approx(0.3));
    CHECK(up(15, 15) == doctest::Approx(0.15));
  }

  TEST_CASE("prolong_image at full rank equals the dense product") {
    std::mt19937_64 rng(6);
    for (std::size_t n : {4u, 8u, 16u}) {
      ImageGrid img = oracle::random_image(rng, n, n);
      TTFormat tt = tt_svd(quantize(img).tensor, 256, 0.0);
      ImageGrid up = dequantize(tt_contract(prolong_image(tt, 1024, 0.0)));
      ImageGrid expect = dense_prolong(img);
      double worst = 0.0;
      for (std::size_t i = 0; i < up.size(); ++i)
        worst = std::max(worst, std::abs(up.values()[i] - expect.values()[i]));
      CHECK(worst <= 1e-8);
    }
  }

  TEST_CASE("pooling after prolongation reproduces constant interiors") {
    ImageGrid img(16, 16, 1, 0.42);
    TTFormat tt = tt_svd(quantize(img).tensor, 64, 0.0);
    ImageGrid back = avgpool(dequantize(tt_contract(prolong_image(tt, 64, 0.0))), 1);
    for (std::size_t r = 0; r < 15; ++r)
      for (std::size_t c = 0; c < 15; ++c) CHECK(back(r, c) == doctest::Approx(0.42).epsilon(1e-6));
  }

  TEST_CASE("pooling after prolongation is the (9,3,3,1)/16 stencil") {
    // Pooling the interpolated 2x2 block at (i,j) averages x(i,j) with
    // half-weights toward its right and lower neighbours.
    std::mt19937_64 rng(7);
    ImageGrid img = oracle::random_image(rng, 16, 16);
    TTFormat tt = tt_svd(quantize(img).tensor, 256, 0.0);
    ImageGrid back = avgpool(dequantize(tt_contract(prolong_image(tt, 256, 0.0))), 1);
    auto at = [&](std::size_t r, std::size_t c) { return r < 16 && c < 16 ? img(r, c) : 0.0; };
    for (std::size_t r = 0; r < 16; ++r)
      for (std::size_t c = 0; c < 16; ++c) {
        double s = (9 * at(r, c) + 3 * at(r + 1, c) + 3 * at(r, c + 1) + at(r + 1, c + 1)) / 16;
        CHECK(back(r, c) == doctest::Approx(s).epsilon(1e-8));
      }
  }

  TEST_CASE("operator ranks") {
    MPOFormat p1 = build_prolongation_mpo_1d(3);
    CHECK(p1.order() == 4);
    CHECK(p1.input_dims() == Shape{2, 2, 2, 1});
    CHECK(p1.output_dims() == Shape{2, 2, 2, 2});
    MPOFormat p2 = build_prolongation_mpo(3);
    CHECK(p2.input_dims() == Shape{4, 4, 4, 1});
    CHECK(p2.output_dims() == Shape{4, 4, 4, 4});
    CHECK_THROWS_AS(build_prolongation_mpo(0), RangeError);
  }
}

TEST_SUITE("power-of-two resizing") {
  TEST_CASE("already the right size passes through bit-exactly") {
    std::mt19937_64 rng(8);
    ImageGrid img = oracle::random_image(rng, 16, 16, 3);
    ImageGrid out = resize_to_pow2(img, 4);
    CHECK(out == img);
    CHECK(out.original_size() == PixelSize{16, 16});
  }

  TEST_CASE("2x2 checkerboard upsamples to the hand bilinear grid") {
    ImageGrid img(2, 2, 1, {0, 1, 1, 0});
    ImageGrid out = resize_to_pow2(img, 2);
    const double t = 1.0 / 3, f = 4.0 / 9, g = 5.0 / 9;
    const double expect[4][4] = {{0, t, 2 * t, 1}, {t, f, g, 2 * t}, {2 * t, g, f, t}, {1, 2 * t, t, 0}};
    for (std::size_t r = 0; r < 4; ++r)
      for (std::size_t c = 0; c < 4; ++c) CHECK(out(r, c) == doctest::Approx(expect[r][c]).epsilon(1e-12));
    CHECK(out.original_size() == PixelSize{2, 2});
  }

  TEST_CASE("224 to 256 and back keeps channels and size") {
    std::mt19937_64 rng(9);
    ImageGrid img = oracle::random_image(rng, 224, 224, 3);
    ImageGrid up = resize_to_pow2(img, 8);
    CHECK(up.height() == 256);
    CHECK(up.width() == 256);
    CHECK(up.channels() == 3);
    CHECK(up.original_size() == PixelSize{224, 224});
    ImageGrid down = resize_from_pow2(up, up.original_size());
    CHECK(down.height() == 224);
    CHECK(down.channels() == 3);
    CHECK(down.in_unit_range());
  }

  TEST_CASE("inverse shape checks") {
    ImageGrid a = resize_from_pow2(ImageGrid(4, 4, 1, 0.5), {2, 2});
    CHECK(a.height() == 2);
    ImageGrid b = resize_from_pow2(ImageGrid(16, 16, 3, 2.0), {16, 16});
    CHECK(b.height() == 16);
    for (double v : b.values()) CHECK(v == 1.0);
  }

  TEST_CASE("too small a resolution is a range error") {
    CHECK_THROWS_AS(resize_to_pow2(ImageGrid(20, 10), 4), RangeError);
    CHECK(min_resolution_index(20, 10) == 5);
    CHECK(min_resolution_index(16, 16) == 4);
  }
}
