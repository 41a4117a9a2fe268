#include "sropkit/datasets.hpp"

#include <algorithm>

#include "sropkit/error.hpp"

namespace sropkit {

namespace {

std::uint32_t read_be32(std::span<const std::uint8_t> bytes, std::size_t offset) {
  return (static_cast<std::uint32_t>(bytes[offset]) << 24) |
         (static_cast<std::uint32_t>(bytes[offset + 1]) << 16) |
         (static_cast<std::uint32_t>(bytes[offset + 2]) << 8) |
         static_cast<std::uint32_t>(bytes[offset + 3]);
}

void check_payload(std::size_t actual, std::size_t expected, const char* what) {
  if (actual < expected) {
    throw ParseError(ParseErrorKind::truncated,
                     std::string(what) + ": payload is " + std::to_string(actual) +
                         " bytes, header announces " + std::to_string(expected));
  }
  if (actual > expected) {
    throw ParseError(ParseErrorKind::size_mismatch,
                     std::string(what) + ": trailing bytes after payload");
  }
}

MultiImage planar_from(const std::vector<double>& values, std::size_t c, std::size_t h,
                       std::size_t w, bool channels_last, double scale) {
  MultiImage img{c, h, w, std::vector<double>(c * h * w)};
  for (std::size_t ch = 0; ch < c; ++ch) {
    for (std::size_t y = 0; y < h; ++y) {
      for (std::size_t x = 0; x < w; ++x) {
        const std::size_t src =
            channels_last ? (y * w + x) * c + ch : (ch * h + y) * w + x;
        img.pixels[(ch * h + y) * w + x] = values[src] * scale;
      }
    }
  }
  return img;
}

}  // namespace

MultiImage LabeledImages::image_f64(std::size_t i) const {
  const auto px = image(i);
  MultiImage out{channels, rows, cols, std::vector<double>(px.size())};
  std::transform(px.begin(), px.end(), out.pixels.begin(),
                 [](std::uint8_t v) { return v / 255.0; });
  return out;
}

LabeledImages read_mnist_idx(std::span<const std::uint8_t> images,
                             std::span<const std::uint8_t> labels) {
  if (images.size() < 16) {
    throw ParseError(ParseErrorKind::truncated, "mnist images: header shorter than 16 bytes");
  }
  if (labels.size() < 8) {
    throw ParseError(ParseErrorKind::truncated, "mnist labels: header shorter than 8 bytes");
  }
  if (read_be32(images, 0) != kMnistImageMagic) {
    throw ParseError(ParseErrorKind::bad_magic, "mnist images: expected 0x00000803");
  }
  if (read_be32(labels, 0) != kMnistLabelMagic) {
    throw ParseError(ParseErrorKind::bad_magic, "mnist labels: expected 0x00000801");
  }
  LabeledImages set;
  set.count = read_be32(images, 4);
  set.rows = read_be32(images, 8);
  set.cols = read_be32(images, 12);
  set.channels = 1;
  if (read_be32(labels, 4) != set.count) {
    throw ParseError(ParseErrorKind::size_mismatch, "mnist: image and label counts differ");
  }
  check_payload(images.size() - 16, set.count * set.rows * set.cols, "mnist images");
  check_payload(labels.size() - 8, set.count, "mnist labels");
  set.pixels.assign(images.begin() + 16, images.end());
  set.labels.assign(labels.begin() + 8, labels.end());
  for (auto l : set.labels) {
    if (l > 9) throw ParseError(ParseErrorKind::bad_value, "mnist labels: label above 9");
  }
  return set;
}

LabeledImages read_cifar10_batch(std::span<const std::uint8_t> bytes) {
  if (bytes.empty() || bytes.size() % kCifarRecordBytes != 0) {
    throw ParseError(ParseErrorKind::size_mismatch,
                     "cifar10: length is not a positive multiple of 3073");
  }
  LabeledImages set;
  set.count = bytes.size() / kCifarRecordBytes;
  set.channels = 3;
  set.rows = 32;
  set.cols = 32;
  set.labels.reserve(set.count);
  set.pixels.reserve(set.count * set.image_size());
  for (std::size_t i = 0; i < set.count; ++i) {
    const auto record = bytes.subspan(i * kCifarRecordBytes, kCifarRecordBytes);
    if (record[0] > 9) throw ParseError(ParseErrorKind::bad_value, "cifar10: label above 9");
    set.labels.push_back(record[0]);
    set.pixels.insert(set.pixels.end(), record.begin() + 1, record.end());
  }
  return set;
}

LabeledImages filter_by_label(const LabeledImages& set, std::uint8_t label) {
  LabeledImages out{0, set.channels, set.rows, set.cols, {}, {}};
  for (std::size_t i = 0; i < set.count; ++i) {
    if (set.labels[i] != label) continue;
    const auto px = set.image(i);
    out.pixels.insert(out.pixels.end(), px.begin(), px.end());
    out.labels.push_back(label);
    ++out.count;
  }
  return out;
}

MultiImage image_from_npy(const NpyTensor& tensor) {
  const auto& s = tensor.shape();
  const double scale = tensor.dtype() == NpyDtype::u8 ? 1.0 / 255.0 : 1.0;
  const auto values = tensor.to_f64();
  if (s.size() == 2) return planar_from(values, 1, s[0], s[1], false, scale);
  if (s.size() == 3) {
    if (s[2] == 1 || s[2] == 3) {
      return planar_from(values, s[2], s[0], s[1], true, scale);
    }
    if (s[0] == 1 || s[0] == 3) return planar_from(values, s[0], s[1], s[2], false, scale);
  }
  throw InvalidInput("npy image: unsupported shape");
}

std::vector<MultiImage> load_image_dir(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) {
    throw InvalidInput("not a directory: " + dir.string());
  }
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".npy") {
      files.push_back(entry.path());
    }
  }
  std::sort(files.begin(), files.end());
  std::vector<MultiImage> images;
  for (const auto& f : files) {
    const NpyTensor t = load_npy(f);
    if (t.shape().size() == 4) {
      const auto& s = t.shape();
      const bool channels_last = s[3] == 1 || s[3] == 3;
      const std::size_t per = s[1] * s[2] * s[3];
      const auto values = t.to_f64();
      const double scale = t.dtype() == NpyDtype::u8 ? 1.0 / 255.0 : 1.0;
      for (std::size_t i = 0; i < s[0]; ++i) {
        std::vector<double> one(values.begin() + static_cast<std::ptrdiff_t>(i * per),
                                values.begin() + static_cast<std::ptrdiff_t>((i + 1) * per));
        images.push_back(channels_last ? planar_from(one, s[3], s[1], s[2], true, scale)
                                       : planar_from(one, s[1], s[2], s[3], false, scale));
      }
    } else {
      images.push_back(image_from_npy(t));
    }
  }
  if (images.empty()) throw InvalidInput("no .npy images in " + dir.string());
  return images;
}

}  // namespace sropkit
