#include "sropkit/image.hpp"

#include "sropkit/error.hpp"

namespace sropkit {

Image::Image(std::size_t r, std::size_t c, std::vector<double> values)
    : rows(r), cols(c), pixels(std::move(values)) {
  if (pixels.size() != rows * cols) {
    throw InvalidInput("image: pixel count does not match dimensions");
  }
}

Image rotate90(const Image& image, int turns) {
  turns = ((turns % 4) + 4) % 4;
  Image current = image;
  for (int t = 0; t < turns; ++t) {
    Image next(current.cols, current.rows);
    // out(r, c) = in(c, cols - 1 - r)
    for (std::size_t r = 0; r < next.rows; ++r) {
      for (std::size_t c = 0; c < next.cols; ++c) {
        next.at(r, c) = current.at(c, current.cols - 1 - r);
      }
    }
    current = std::move(next);
  }
  return current;
}

Image MultiImage::channel(std::size_t c) const {
  if (c >= channels) throw InvalidInput("image: channel index out of range");
  auto p = plane(c);
  return Image(rows, cols, std::vector<double>(p.begin(), p.end()));
}

}  // namespace sropkit
