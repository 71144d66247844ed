#pragma once

#include <cstddef>
#include <cstdint>

#include "tnp/image.hpp"

namespace tnp {

/// 0.5 plus three low-frequency plane waves (1 to 4 cycles per image) with
/// random phases and orientations; values stay inside [0.2, 0.8].
ImageGrid smooth_synthetic_image(std::size_t size, std::uint64_t seed, std::size_t channels = 1);

}  // namespace tnp
