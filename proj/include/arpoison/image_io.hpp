#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

namespace arpoison {

/// 8-bit RGB image, interleaved, row-major.
struct RgbImage {
  int height = 0;
  int width = 0;
  std::vector<std::uint8_t> pixels;
};

/// Reads a PNG, expanding palette/gray/16-bit and dropping alpha so the
/// result is always 8-bit RGB.
RgbImage read_png(const std::filesystem::path& path);

void write_png(const std::filesystem::path& path, const RgbImage& image);

}  // namespace arpoison
