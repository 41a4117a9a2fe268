#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "sropkit/image.hpp"
#include "sropkit/npy.hpp"

namespace sropkit {

// N images of channels x rows x cols u8 pixels (planar), with labels.
struct LabeledImages {
  std::size_t count = 0;
  std::size_t channels = 0;
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<std::uint8_t> pixels;
  std::vector<std::uint8_t> labels;

  std::size_t image_size() const noexcept { return channels * rows * cols; }
  std::span<const std::uint8_t> image(std::size_t i) const {
    return {pixels.data() + i * image_size(), image_size()};
  }
  // Pixels divided by 255.
  MultiImage image_f64(std::size_t i) const;
};

inline constexpr std::uint32_t kMnistImageMagic = 0x00000803;
inline constexpr std::uint32_t kMnistLabelMagic = 0x00000801;
inline constexpr std::size_t kCifarRecordBytes = 1 + 3 * 32 * 32;
inline constexpr std::uint8_t kCifarFrogLabel = 6;

// IDX image and label files. Both must agree on N and carry exactly the
// payload their headers announce.
LabeledImages read_mnist_idx(std::span<const std::uint8_t> images,
                             std::span<const std::uint8_t> labels);

// One CIFAR-10 binary batch: records of one label byte followed by the
// R, G and B 32 x 32 planes.
LabeledImages read_cifar10_batch(std::span<const std::uint8_t> bytes);

LabeledImages filter_by_label(const LabeledImages& set, std::uint8_t label);

// Interprets an NPY array as one image. Accepted layouts: (H, W),
// (H, W, C) with C in {1, 3} and (C, H, W) with C in {1, 3}. u8 data is
// scaled by 1/255, float data is taken as is.
MultiImage image_from_npy(const NpyTensor& tensor);

// Every *.npy file in `dir`, sorted by file name. A file holding an
// (N, H, W, C) or (N, C, H, W) batch contributes N images.
std::vector<MultiImage> load_image_dir(const std::filesystem::path& dir);

}  // namespace sropkit
