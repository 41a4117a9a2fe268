#include "sropkit/synth.hpp"

#include <algorithm>
#include <cmath>

#include <json.hpp>

#include "sropkit/error.hpp"

namespace sropkit {

const char* to_string(BlendMode mode) {
  return mode == BlendMode::case_i ? "CASE_I" : "CASE_II";
}

BlendMode parse_blend_mode(const std::string& text) {
  if (text == "CASE_I" || text == "case_i" || text == "I" || text == "1") return BlendMode::case_i;
  if (text == "CASE_II" || text == "case_ii" || text == "II" || text == "2") {
    return BlendMode::case_ii;
  }
  throw InvalidParameter("blend mode must be CASE_I or CASE_II, got '" + text + "'");
}

MultiImage resize_bilinear(const MultiImage& image, std::size_t rows, std::size_t cols) {
  if (image.rows < 2 || image.cols < 2) throw InvalidInput("resize: source must be at least 2x2");
  if (rows == 0 || cols == 0) throw InvalidInput("resize: target must be non-empty");
  MultiImage out{image.channels, rows, cols, std::vector<double>(image.channels * rows * cols)};
  const double sy = static_cast<double>(image.rows) / static_cast<double>(rows);
  const double sx = static_cast<double>(image.cols) / static_cast<double>(cols);
  const double max_y = static_cast<double>(image.rows - 1);
  const double max_x = static_cast<double>(image.cols - 1);
  for (std::size_t c = 0; c < image.channels; ++c) {
    const auto src = image.plane(c);
    auto dst = out.plane(c);
    for (std::size_t y = 0; y < rows; ++y) {
      const double fy = std::clamp((static_cast<double>(y) + 0.5) * sy - 0.5, 0.0, max_y);
      const auto y0 = static_cast<std::size_t>(fy);
      const std::size_t y1 = std::min(y0 + 1, image.rows - 1);
      const double ty = fy - static_cast<double>(y0);
      for (std::size_t x = 0; x < cols; ++x) {
        const double fx = std::clamp((static_cast<double>(x) + 0.5) * sx - 0.5, 0.0, max_x);
        const auto x0 = static_cast<std::size_t>(fx);
        const std::size_t x1 = std::min(x0 + 1, image.cols - 1);
        const double tx = fx - static_cast<double>(x0);
        const double top = src[y0 * image.cols + x0] * (1 - tx) + src[y0 * image.cols + x1] * tx;
        const double bottom = src[y1 * image.cols + x0] * (1 - tx) + src[y1 * image.cols + x1] * tx;
        dst[y * cols + x] = top * (1 - ty) + bottom * ty;
      }
    }
  }
  return out;
}

MultiImage resize_bilinear(std::span<const std::uint8_t> planar, std::size_t channels,
                           std::size_t rows, std::size_t cols, std::size_t out_rows,
                           std::size_t out_cols) {
  if (planar.size() != channels * rows * cols) throw InvalidInput("resize: buffer size mismatch");
  MultiImage img{channels, rows, cols, std::vector<double>(planar.size())};
  std::transform(planar.begin(), planar.end(), img.pixels.begin(),
                 [](std::uint8_t v) { return v / 255.0; });
  return resize_bilinear(img, out_rows, out_cols);
}

MultiImage to_grayscale(const MultiImage& rgb) {
  if (rgb.channels != 3) throw InvalidInput("to_grayscale: expected 3 channels");
  MultiImage out{1, rgb.rows, rgb.cols, std::vector<double>(rgb.rows * rgb.cols)};
  const auto r = rgb.plane(0);
  const auto g = rgb.plane(1);
  const auto b = rgb.plane(2);
  for (std::size_t i = 0; i < out.pixels.size(); ++i) {
    out.pixels[i] = 0.299 * r[i] + 0.587 * g[i] + 0.114 * b[i];
  }
  return out;
}

Image blend_case(const Image& digit, const Image& frog, double w) {
  if (!(w >= 0.0 && w <= 1.0)) throw InvalidParameter("blend weight w must lie in [0, 1]");
  if (digit.rows != frog.rows || digit.cols != frog.cols) {
    throw InvalidInput("blend: digit and frog sizes differ");
  }
  Image out(digit.rows, digit.cols);
  for (std::size_t i = 0; i < out.pixels.size(); ++i) {
    out.pixels[i] = w * frog.pixels[i] + (1.0 - w) * digit.pixels[i];
  }
  return out;
}

std::string provenance_to_json(const Provenance& p) {
  nlohmann::json j{{"mode", to_string(p.mode)},
                   {"w", p.w},
                   {"seed", p.seed},
                   {"frog_source", "cifar10"},
                   {"frog_index", p.frog_index},
                   {"blended_count", p.blended_count}};
  return j.dump(2) + "\n";
}

SyntheticDataset generate_dataset(const BlendSpec& spec, const LabeledImages& digits,
                                  const LabeledImages& frog_source) {
  if (digits.count == 0) throw InvalidInput("synth: digit source is empty");
  if (digits.channels != 1) throw InvalidInput("synth: digits must be single-channel");
  if (!(spec.w >= 0.0 && spec.w <= 1.0)) throw InvalidParameter("blend weight w must lie in [0, 1]");

  std::size_t frog_index = 0;
  if (spec.frog_index) {
    frog_index = *spec.frog_index;
    if (frog_index >= frog_source.count) throw InvalidInput("synth: frog index out of range");
  } else {
    const auto it = std::find(frog_source.labels.begin(), frog_source.labels.end(),
                              kCifarFrogLabel);
    if (it == frog_source.labels.end()) throw InvalidInput("synth: no frog in the CIFAR-10 set");
    frog_index = static_cast<std::size_t>(it - frog_source.labels.begin());
  }
  const MultiImage frog_rgb =
      resize_bilinear(frog_source.image(frog_index), frog_source.channels, frog_source.rows,
                      frog_source.cols, digits.rows, digits.cols);
  const MultiImage frog_gray = frog_rgb.channels == 3 ? to_grayscale(frog_rgb) : frog_rgb;

  SyntheticDataset out;
  out.count = digits.count;
  out.rows = digits.rows;
  out.cols = digits.cols;
  out.labels = digits.labels;
  out.frog = frog_gray.channel(0);
  out.images.resize(digits.count * digits.rows * digits.cols);
  out.provenance = Provenance{spec.mode, spec.w, spec.seed, frog_index, 0};

  const std::size_t area = digits.rows * digits.cols;
  for (std::size_t i = 0; i < digits.count; ++i) {
    const auto px = digits.image(i);
    float* dst = out.images.data() + i * area;
    const bool blend = spec.mode == BlendMode::case_ii || digits.labels[i] == 1;
    if (!blend) {
      for (std::size_t j = 0; j < area; ++j) dst[j] = static_cast<float>(px[j] / 255.0);
      continue;
    }
    for (std::size_t j = 0; j < area; ++j) {
      const double digit = px[j] / 255.0;
      dst[j] = static_cast<float>(spec.w * out.frog.pixels[j] + (1.0 - spec.w) * digit);
    }
    ++out.provenance.blended_count;
  }
  return out;
}

}  // namespace sropkit
