#include "tnp/synthetic.hpp"

#include <cmath>
#include <numbers>
#include <random>

namespace tnp {

ImageGrid smooth_synthetic_image(std::size_t size, std::uint64_t seed, std::size_t channels) {
  std::mt19937_64 gen(seed);
  std::uniform_int_distribution<int> freq(-4, 4);
  std::uniform_real_distribution<double> phase(0.0, 2.0 * std::numbers::pi);
  std::uniform_real_distribution<double> amp(0.05, 0.1);
  ImageGrid img(size, size, channels);
  const double n = static_cast<double>(size);
  for (std::size_t c = 0; c < channels; ++c) {
    for (int wave = 0; wave < 3; ++wave) {
      int fx = 0, fy = 0;
      while (fx == 0 && fy == 0) {
        fx = freq(gen);
        fy = freq(gen);
      }
      const double a = amp(gen);
      const double ph = phase(gen);
      for (std::size_t r = 0; r < size; ++r) {
        for (std::size_t q = 0; q < size; ++q) {
          const double arg = 2.0 * std::numbers::pi *
                                 (fx * static_cast<double>(q) + fy * static_cast<double>(r)) / n +
                             ph;
          img(r, q, c) += a * std::sin(arg);
        }
      }
    }
    for (double& v : img.channel(c)) v += 0.5;
  }
  return img;
}

}  // namespace tnp
