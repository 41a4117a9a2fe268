#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace sropkit {

enum class NpyDtype { f32_le, f64_le, u8 };

std::size_t dtype_size(NpyDtype dtype);
// NumPy descr string: '<f4', '<f8' or '|u1'.
const char* dtype_descr(NpyDtype dtype);

// Row-major tensor held as raw little-endian bytes.
class NpyTensor {
 public:
  NpyTensor() = default;
  NpyTensor(std::vector<std::size_t> shape, NpyDtype dtype,
            std::vector<std::uint8_t> bytes);

  static NpyTensor from_f32(std::vector<std::size_t> shape, std::span<const float> values);
  static NpyTensor from_f64(std::vector<std::size_t> shape, std::span<const double> values);
  static NpyTensor from_u8(std::vector<std::size_t> shape, std::span<const std::uint8_t> values);

  const std::vector<std::size_t>& shape() const noexcept { return shape_; }
  NpyDtype dtype() const noexcept { return dtype_; }
  const std::vector<std::uint8_t>& bytes() const noexcept { return bytes_; }
  std::size_t element_count() const noexcept;

  // Element-wise conversion; u8 values are returned unscaled.
  std::vector<double> to_f64() const;
  std::vector<float> to_f32() const;

  friend bool operator==(const NpyTensor&, const NpyTensor&) = default;

 private:
  std::vector<std::size_t> shape_;
  NpyDtype dtype_ = NpyDtype::f32_le;
  std::vector<std::uint8_t> bytes_;
};

// NPY version 1.0 with fortran_order False. Throws ParseError with a kind
// that distinguishes bad magic, unsupported dtype, malformed header and a
// payload whose length disagrees with the shape.
NpyTensor read_npy(std::span<const std::uint8_t> bytes);
std::vector<std::uint8_t> write_npy(const NpyTensor& tensor);

// Header fields only; the payload is not read.
struct NpyHeader {
  std::vector<std::size_t> shape;
  NpyDtype dtype = NpyDtype::f32_le;
  std::size_t data_offset = 0;
};
NpyHeader read_npy_header(std::span<const std::uint8_t> bytes);
NpyHeader read_npy_header(const std::filesystem::path& path);

NpyTensor load_npy(const std::filesystem::path& path);
void save_npy(const std::filesystem::path& path, const NpyTensor& tensor);

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path);
// Writes to a sibling temporary and renames it over `path`.
void write_file_atomic(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);
void write_file_atomic(const std::filesystem::path& path, const std::string& text);

}  // namespace sropkit
