#include "tnp/png_io.hpp"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <string>
#include <vector>

#include "tnp/errors.hpp"

namespace tnp {

namespace {

std::filesystem::path temp_sibling(const std::filesystem::path& path) {
  auto tmp = path;
  tmp += ".tmp";
  return tmp;
}

}  // namespace

ImageGrid read_png(const std::filesystem::path& path) {
  png_image image{};
  image.version = PNG_IMAGE_VERSION;
  if (png_image_begin_read_from_file(&image, path.c_str()) == 0) {
    throw IoError("cannot read PNG " + path.string() + ": " + image.message);
  }
  const bool color = (image.format & PNG_FORMAT_FLAG_COLOR) != 0;
  image.format = color ? PNG_FORMAT_RGB : PNG_FORMAT_GRAY;
  const std::size_t channels = color ? 3 : 1;
  std::vector<std::uint8_t> buf(PNG_IMAGE_SIZE(image));
  if (png_image_finish_read(&image, nullptr, buf.data(), 0, nullptr) == 0) {
    const std::string msg = image.message;
    png_image_free(&image);
    throw IoError("cannot decode PNG " + path.string() + ": " + msg);
  }
  const std::size_t h = image.height, w = image.width;
  ImageGrid img(h, w, channels);
  for (std::size_t r = 0; r < h; ++r) {
    for (std::size_t c = 0; c < w; ++c) {
      for (std::size_t ch = 0; ch < channels; ++ch) {
        img(r, c, ch) = static_cast<double>(buf[(r * w + c) * channels + ch]) / 255.0;
      }
    }
  }
  return img;
}

std::uint8_t to_byte(double v) {
  return static_cast<std::uint8_t>(std::floor(std::clamp(v, 0.0, 1.0) * 255.0 + 0.5));
}

ImageGrid to_8bit_levels(const ImageGrid& img) {
  ImageGrid out = img;
  for (double& v : out.values()) v = static_cast<double>(to_byte(v)) / 255.0;
  return out;
}

void write_png(const std::filesystem::path& path, const ImageGrid& img) {
  if (img.channels() != 1 && img.channels() != 3) {
    throw StructuralError("write_png supports 1 or 3 channels");
  }
  const std::size_t h = img.height(), w = img.width(), channels = img.channels();
  std::vector<std::uint8_t> buf(h * w * channels);
  for (std::size_t r = 0; r < h; ++r) {
    for (std::size_t c = 0; c < w; ++c) {
      for (std::size_t ch = 0; ch < channels; ++ch) {
        buf[(r * w + c) * channels + ch] = to_byte(img(r, c, ch));
      }
    }
  }
  png_image image{};
  image.version = PNG_IMAGE_VERSION;
  image.width = static_cast<png_uint_32>(w);
  image.height = static_cast<png_uint_32>(h);
  image.format = channels == 3 ? PNG_FORMAT_RGB : PNG_FORMAT_GRAY;
  const auto tmp = temp_sibling(path);
  if (png_image_write_to_file(&image, tmp.c_str(), 0, buf.data(), 0, nullptr) == 0) {
    const std::string msg = image.message;
    std::filesystem::remove(tmp);
    throw IoError("cannot write PNG " + path.string() + ": " + msg);
  }
  std::filesystem::rename(tmp, path);
}

void write_file_atomic(const std::filesystem::path& path, const std::string& bytes) {
  const auto tmp = temp_sibling(path);
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + tmp.string() + " for writing");
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw IoError("short write to " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

}  // namespace tnp
