#include <doctest.h>

#include <cmath>
#include <limits>
#include <random>

#include "oracles.hpp"
#include "tnp/errors.hpp"
#include "tnp/metrics.hpp"

using namespace tnp;

TEST_SUITE("psnr and nrmse") {
  TEST_CASE("identical images") {
    std::mt19937_64 rng(1);
    ImageGrid x = oracle::random_image(rng, 8, 8, 3);
    CHECK(std::isinf(psnr(x, x)));
    CHECK(psnr(x, x) > 0);
    CHECK(nrmse(x, x).value == 0.0);
  }

  TEST_CASE("closed forms") {
    ImageGrid x(4, 4, 1, 0.2), y(4, 4, 1, 0.3);
    CHECK(psnr(x, y) == doctest::Approx(20.0).epsilon(1e-12));
    ImageGrid full(2, 2, 1, {0.0, 0.3, 0.6, 0.9});
    ImageGrid shifted(2, 2, 1, {0.1, 0.4, 0.7, 1.0});
    // Range of the reference is 0.9, RMSE is 0.1.
    CHECK(nrmse(full, shifted).value == doctest::Approx(0.1 / 0.9).epsilon(1e-12));
    ImageGrid unit(2, 2, 1, {0.0, 0.3, 0.6, 1.0});
    ImageGrid unit_shift(2, 2, 1, {0.1, 0.4, 0.7, 1.1});
    CHECK(nrmse(unit, unit_shift).value == doctest::Approx(0.1).epsilon(1e-12));
  }

  TEST_CASE("random pairs against the formula") {
    std::mt19937_64 rng(2);
    for (int rep = 0; rep < 10; ++rep) {
      ImageGrid x = oracle::random_image(rng, 9, 13, 2), y = oracle::random_image(rng, 9, 13, 2);
      double s = 0.0, lo = 1e9, hi = -1e9;
      for (std::size_t i = 0; i < x.size(); ++i) {
        double d = x.values()[i] - y.values()[i];
        s += d * d;
        lo = std::min(lo, x.values()[i]);
        hi = std::max(hi, x.values()[i]);
      }
      double m = s / static_cast<double>(x.size());
      CHECK(std::abs(psnr(x, y) - 10 * std::log10(1 / m)) <= 1e-10);
      CHECK(std::abs(nrmse(x, y).value - std::sqrt(m) / (hi - lo)) <= 1e-12);
      CHECK(psnr(x, y) == 10.0 * std::log10(1.0 / mse(x, y)));
    }
  }

  TEST_CASE("constant reference falls back to plain RMSE") {
    ImageGrid x(4, 4, 1, 0.5), y(4, 4, 1, 0.7);
    NrmseResult r = nrmse(x, y);
    CHECK(r.range_fallback);
    CHECK(r.value == doctest::Approx(0.2));
  }

  TEST_CASE("shape mismatch") {
    CHECK_THROWS_AS(psnr(ImageGrid(4, 4), ImageGrid(4, 5)), StructuralError);
    CHECK_THROWS_AS(nrmse(ImageGrid(4, 4), ImageGrid(4, 4, 3)), StructuralError);
    CHECK_THROWS_AS(ssim(ImageGrid(16, 16), ImageGrid(16, 17)), StructuralError);
  }
}

TEST_SUITE("ssim") {
  TEST_CASE("self-similarity is one with a finite gradient") {
    std::mt19937_64 rng(3);
    ImageGrid x = oracle::random_image(rng, 24, 24, 3);
    CHECK(std::abs(ssim(x, x).value - 1.0) <= 1e-9);
    SsimGradient g = ssim_grad(x, x);
    CHECK(g.grad.all_finite());
  }

  TEST_CASE("two constants follow the closed form") {
    ImageGrid x(16, 16, 1, 0.0), y(16, 16, 1, 1.0);
    CHECK(ssim(x, y).value == doctest::Approx(kSsimC1 / (1.0 + kSsimC1)).epsilon(1e-12));
  }

  TEST_CASE("matches the direct windowed oracle") {
    std::mt19937_64 rng(4);
    for (int rep = 0; rep < 5; ++rep) {
      ImageGrid x = oracle::random_image(rng, 20, 17, 2), y = oracle::random_image(rng, 20, 17, 2);
      SsimResult s = ssim(x, y);
      CHECK_FALSE(s.global_fallback);
      CHECK(s.value == doctest::Approx(oracle::ssim_direct(x, y)).epsilon(1e-12));
    }
  }

  TEST_CASE("symmetric and bounded") {
    std::mt19937_64 rng(5);
    for (int rep = 0; rep < 10; ++rep) {
      ImageGrid x = oracle::random_image(rng, 16, 16), y = oracle::random_image(rng, 16, 16);
      double a = ssim(x, y).value, b = ssim(y, x).value;
      CHECK(std::abs(a - b) <= 1e-12);
      CHECK(a >= -1.0);
      CHECK(a <= 1.0);
    }
  }

  TEST_CASE("gradient matches central finite differences") {
    std::mt19937_64 rng(6);
    ImageGrid x = oracle::random_image(rng, 16, 16), y = oracle::random_image(rng, 16, 16);
    SsimGradient g = ssim_grad(x, y);
    CHECK(g.value == doctest::Approx(ssim(x, y).value).epsilon(1e-14));
    double worst = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      double fd = oracle::central_difference([&] { return ssim(x, y).value; }, x.values()[i], 1e-5);
      worst = std::max(worst, oracle::entry_rel_err(g.grad.values()[i], fd, 1e-6));
    }
    CHECK(worst <= 1e-4);
  }

  TEST_CASE("small images use one global window") {
    std::mt19937_64 rng(7);
    ImageGrid x = oracle::random_image(rng, 6, 6), y = oracle::random_image(rng, 6, 6);
    SsimGradient g = ssim_grad(x, y);
    CHECK(g.global_fallback);
    CHECK(ssim(x, y).global_fallback);
    for (std::size_t i = 0; i < x.size(); ++i) {
      double fd = oracle::central_difference([&] { return ssim(x, y).value; }, x.values()[i], 1e-5);
      CHECK(oracle::entry_rel_err(g.grad.values()[i], fd, 1e-6) <= 1e-4);
    }
  }

  TEST_CASE("metric report carries the role and all three values") {
    std::mt19937_64 rng(8);
    ImageGrid x = oracle::random_image(rng, 16, 16), y = oracle::random_image(rng, 16, 16);
    MetricReport r = compare_images(x, y, PairRole::kRec);
    CHECK(to_string(r.role) == "REC");
    CHECK(to_string(PairRole::kCln) == "CLN");
    CHECK(to_string(PairRole::kAdv) == "ADV");
    CHECK(r.psnr == psnr(x, y));
    CHECK(r.ssim == ssim(x, y).value);
    CHECK(r.nrmse == nrmse(x, y).value);
    CHECK(r.nrmse >= 0.0);
  }
}
