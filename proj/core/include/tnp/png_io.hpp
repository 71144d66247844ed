#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include "tnp/image.hpp"

namespace tnp {

/// Reads an 8-bit PNG as gray (1 channel) or RGB (3 channels), value/255.
/// Alpha is dropped; palette and 16-bit inputs are converted by libpng.
ImageGrid read_png(const std::filesystem::path& path);

/// Byte written for a [0,1] value: floor(clamp(v) * 255 + 0.5).
std::uint8_t to_byte(double v);

/// The image exactly as write_png followed by read_png would return it.
ImageGrid to_8bit_levels(const ImageGrid& img);

/// Writes 8-bit gray or RGB with round-half-up of value*255 after clamping
/// to [0,1]. Goes through a temporary file and a rename.
void write_png(const std::filesystem::path& path, const ImageGrid& img);

/// Atomically replaces path with the given bytes (temp file + rename).
void write_file_atomic(const std::filesystem::path& path, const std::string& bytes);

}  // namespace tnp
