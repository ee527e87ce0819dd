#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <vector>

#include "svq/matrix.hpp"

namespace svq {

/// 8-bit grayscale raster.
struct GrayImage {
  std::size_t width = 0;
  std::size_t height = 0;
  std::vector<std::uint8_t> pixels;  // row-major, height * width

  GrayImage() = default;
  GrayImage(std::size_t w, std::size_t h, std::uint8_t fill = 0)
      : width(w), height(h), pixels(w * h, fill) {}
  std::uint8_t& at(std::size_t x, std::size_t y) { return pixels[y * width + x]; }
  std::uint8_t at(std::size_t x, std::size_t y) const { return pixels[y * width + x]; }
};

/// round(clamp(v, 0, 1) * 255)
std::uint8_t to_gray(double v) noexcept;

/// Binary P5: "P5\n<w> <h>\n255\n" followed by the raw bytes.
void write_pgm(std::ostream& out, const GrayImage& img);
void save_pgm(const std::filesystem::path& path, const GrayImage& img);  // IoError
GrayImage read_pgm(std::istream& in);  // ConfigError

}  // namespace svq
