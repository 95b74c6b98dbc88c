#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

namespace simuda::datakit {

/// 8-bit RGB image, row-major, channels interleaved.
struct Image {
  int height = 0;
  int width = 0;
  std::vector<std::uint8_t> pixels;

  Image() = default;
  Image(int h, int w, std::uint8_t fill = 0) : height(h), width(w), pixels(static_cast<std::size_t>(h) * w * 3, fill) {}

  std::uint8_t& at(int y, int x, int c) { return pixels[(static_cast<std::size_t>(y) * width + x) * 3 + c]; }
  std::uint8_t at(int y, int x, int c) const { return pixels[(static_cast<std::size_t>(y) * width + x) * 3 + c]; }

  friend bool operator==(const Image&, const Image&) = default;
};

/// Normalized float image (H x W x 3, interleaved), the model's input unit.
struct FloatImage {
  int height = 0;
  int width = 0;
  std::vector<float> values;

  friend bool operator==(const FloatImage&, const FloatImage&) = default;
};

/// Decodes a PNG/JPEG file to RGB. Throws DataError carrying the path.
Image load_image(const std::filesystem::path& path);

/// Encodes by extension (.png or .jpg). Throws DataError on failure.
void save_image(const std::filesystem::path& path, const Image& image);

/// Bilinear resize; area averaging when shrinking.
Image resize(const Image& image, int height, int width);

}  // namespace simuda::datakit
