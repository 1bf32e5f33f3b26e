#ifndef LPDPL_IMAGE_HPP
#define LPDPL_IMAGE_HPP

#include <cstdint>
#include <vector>

#include "lpdpl/errors.hpp"

namespace lpdpl {

// 8-bit grayscale raster, row-major.
struct GrayImage {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> data;

  GrayImage() = default;
  GrayImage(int w, int h, std::uint8_t fill = 0)
      : width(w), height(h), data(static_cast<std::size_t>(w) * h, fill) {}

  std::uint8_t& at(int row, int col) { return data[static_cast<std::size_t>(row) * width + col]; }
  std::uint8_t at(int row, int col) const { return data[static_cast<std::size_t>(row) * width + col]; }
  bool empty() const { return width <= 0 || height <= 0; }
};

// Row-major values in {0, 1}; 1 marks ink.
struct BinaryImage {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> data;

  BinaryImage() = default;
  BinaryImage(int w, int h, std::uint8_t fill = 0)
      : width(w), height(h), data(static_cast<std::size_t>(w) * h, fill) {}

  std::uint8_t& at(int row, int col) { return data[static_cast<std::size_t>(row) * width + col]; }
  std::uint8_t at(int row, int col) const { return data[static_cast<std::size_t>(row) * width + col]; }
  int foreground_count() const {
    int c = 0;
    for (auto v : data) c += v;
    return c;
  }
};

// Size-normalized binary glyph, the feature-extraction input.
struct NormalizedGlyph {
  static constexpr int side = 32;
  std::vector<std::uint8_t> data; // side*side values in {0,1}, row-major

  NormalizedGlyph() : data(static_cast<std::size_t>(side) * side, 0) {}

  std::uint8_t& at(int row, int col) { return data[static_cast<std::size_t>(row) * side + col]; }
  std::uint8_t at(int row, int col) const { return data[static_cast<std::size_t>(row) * side + col]; }
};

} // namespace lpdpl

#endif
