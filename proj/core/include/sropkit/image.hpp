#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace sropkit {

// Row-major single-channel grid of doubles.
struct Image {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> pixels;

  Image() = default;
  Image(std::size_t r, std::size_t c, double fill = 0.0)
      : rows(r), cols(c), pixels(r * c, fill) {}
  Image(std::size_t r, std::size_t c, std::vector<double> values);

  bool square() const noexcept { return rows == cols; }
  double& at(std::size_t r, std::size_t c) { return pixels[r * cols + c]; }
  double at(std::size_t r, std::size_t c) const { return pixels[r * cols + c]; }
};

// Counter-clockwise quarter turn, applied `turns` times.
Image rotate90(const Image& image, int turns = 1);

// Planar multi-channel image (channel-major, then row-major).
struct MultiImage {
  std::size_t channels = 0;
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> pixels;

  std::span<const double> plane(std::size_t c) const {
    return {pixels.data() + c * rows * cols, rows * cols};
  }
  std::span<double> plane(std::size_t c) {
    return {pixels.data() + c * rows * cols, rows * cols};
  }
  Image channel(std::size_t c) const;
};

}  // namespace sropkit
