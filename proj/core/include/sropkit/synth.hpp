#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "sropkit/datasets.hpp"
#include "sropkit/image.hpp"

namespace sropkit {

// CASE_I: the frog goes into label-1 digits only, making it a label cue.
// CASE_II: the frog goes into every digit and carries no label information.
enum class BlendMode { case_i, case_ii };

const char* to_string(BlendMode mode);
BlendMode parse_blend_mode(const std::string& text);

// Half-pixel-centred bilinear resampling with edge clamping. u8 input is
// scaled to [0, 1].
MultiImage resize_bilinear(const MultiImage& image, std::size_t rows, std::size_t cols);
MultiImage resize_bilinear(std::span<const std::uint8_t> planar, std::size_t channels,
                           std::size_t rows, std::size_t cols, std::size_t out_rows,
                           std::size_t out_cols);

// Rec.601 luma 0.299 R + 0.587 G + 0.114 B.
MultiImage to_grayscale(const MultiImage& rgb);

// w * frog + (1 - w) * digit, pixelwise.
Image blend_case(const Image& digit, const Image& frog, double w);

struct BlendSpec {
  BlendMode mode = BlendMode::case_i;
  double w = 0.5;
  std::uint64_t seed = 0;
  // Index into the CIFAR-10 set of the frog image; the default picks the
  // first record labelled frog.
  std::optional<std::size_t> frog_index;
};

struct Provenance {
  BlendMode mode = BlendMode::case_i;
  double w = 0.0;
  std::uint64_t seed = 0;
  std::size_t frog_index = 0;
  std::size_t blended_count = 0;
};

std::string provenance_to_json(const Provenance& p);

struct SyntheticDataset {
  std::size_t count = 0;
  std::size_t rows = 28;
  std::size_t cols = 28;
  std::vector<float> images;  // N x rows x cols in [0, 1]
  std::vector<std::uint8_t> labels;
  Provenance provenance;
  // The grayscale frog at digit resolution; also the probe image for
  // frog-pattern SROPs.
  Image frog;
};

SyntheticDataset generate_dataset(const BlendSpec& spec, const LabeledImages& digits,
                                  const LabeledImages& frog_source);

}  // namespace sropkit
