#include "sropkit/npy.hpp"

#include <bit>
#include <cctype>
#include <cstring>
#include <fstream>
#include <random>
#include <sstream>

#include "sropkit/error.hpp"

namespace sropkit {

static_assert(std::endian::native == std::endian::little,
              "NPY payloads are copied verbatim; big-endian hosts are unsupported");

namespace {

constexpr std::uint8_t kMagic[] = {0x93, 'N', 'U', 'M', 'P', 'Y'};
constexpr std::size_t kPreamble = 10;  // magic + version + u16 header length

std::size_t product(const std::vector<std::size_t>& shape) {
  std::size_t n = 1;
  for (auto d : shape) n *= d;
  return n;
}

// Minimal reader for the Python dict literal NumPy writes in the header.
class HeaderParser {
 public:
  explicit HeaderParser(std::string_view text) : s_(text) {}

  NpyHeader parse() {
    NpyHeader h;
    bool have_descr = false, have_order = false, have_shape = false;
    expect('{');
    while (true) {
      skip_ws();
      if (peek() == '}') {
        ++pos_;
        break;
      }
      const std::string key = parse_string();
      expect(':');
      if (key == "descr") {
        h.dtype = parse_descr(parse_string());
        have_descr = true;
      } else if (key == "fortran_order") {
        if (parse_word() != "False") {
          throw ParseError(ParseErrorKind::bad_header, "npy: fortran_order must be False");
        }
        have_order = true;
      } else if (key == "shape") {
        h.shape = parse_shape();
        have_shape = true;
      } else {
        throw ParseError(ParseErrorKind::bad_header, "npy: unexpected key '" + key + "'");
      }
      skip_ws();
      if (peek() == ',') {
        ++pos_;
      } else if (peek() != '}') {
        throw ParseError(ParseErrorKind::bad_header, "npy: malformed header dict");
      }
    }
    if (!have_descr || !have_order || !have_shape) {
      throw ParseError(ParseErrorKind::bad_header, "npy: header lacks descr/fortran_order/shape");
    }
    return h;
  }

 private:
  char peek() const {
    if (pos_ >= s_.size()) {
      throw ParseError(ParseErrorKind::bad_header, "npy: header ends early");
    }
    return s_[pos_];
  }
  void skip_ws() {
    while (pos_ < s_.size() && (s_[pos_] == ' ' || s_[pos_] == '\t')) ++pos_;
  }
  void expect(char c) {
    skip_ws();
    if (peek() != c) {
      throw ParseError(ParseErrorKind::bad_header, std::string("npy: expected '") + c + "'");
    }
    ++pos_;
  }
  std::string parse_string() {
    skip_ws();
    const char quote = peek();
    if (quote != '\'' && quote != '"') {
      throw ParseError(ParseErrorKind::bad_header, "npy: expected quoted string");
    }
    ++pos_;
    std::string out;
    while (peek() != quote) out += s_[pos_++];
    ++pos_;
    return out;
  }
  std::string parse_word() {
    skip_ws();
    std::string out;
    while (pos_ < s_.size() && std::isalpha(static_cast<unsigned char>(s_[pos_]))) {
      out += s_[pos_++];
    }
    return out;
  }
  std::vector<std::size_t> parse_shape() {
    expect('(');
    std::vector<std::size_t> shape;
    while (true) {
      skip_ws();
      if (peek() == ')') {
        ++pos_;
        return shape;
      }
      if (!std::isdigit(static_cast<unsigned char>(peek()))) {
        throw ParseError(ParseErrorKind::bad_header, "npy: bad shape entry");
      }
      std::size_t v = 0;
      while (std::isdigit(static_cast<unsigned char>(peek()))) {
        v = v * 10 + static_cast<std::size_t>(s_[pos_++] - '0');
      }
      shape.push_back(v);
      skip_ws();
      if (peek() == ',') ++pos_;
    }
  }
  static NpyDtype parse_descr(const std::string& d) {
    if (d == "<f4") return NpyDtype::f32_le;
    if (d == "<f8") return NpyDtype::f64_le;
    if (d == "|u1" || d == "<u1" || d == "u1") return NpyDtype::u8;
    throw ParseError(ParseErrorKind::unsupported_dtype, "npy: dtype '" + d + "'");
  }

  std::string_view s_;
  std::size_t pos_ = 0;
};

std::string header_text(const NpyTensor& t) {
  std::ostringstream h;
  h << "{'descr': '" << dtype_descr(t.dtype()) << "', 'fortran_order': False, 'shape': (";
  for (std::size_t i = 0; i < t.shape().size(); ++i) {
    if (i) h << ", ";
    h << t.shape()[i];
  }
  if (t.shape().size() == 1) h << ',';
  h << "), }";
  std::string text = h.str();
  const std::size_t unpadded = kPreamble + text.size() + 1;
  const std::size_t padded = (unpadded + 63) / 64 * 64;
  text.append(padded - unpadded, ' ');
  text += '\n';
  return text;
}

}  // namespace

std::size_t dtype_size(NpyDtype dtype) {
  switch (dtype) {
    case NpyDtype::f32_le:
      return 4;
    case NpyDtype::f64_le:
      return 8;
    case NpyDtype::u8:
      return 1;
  }
  return 0;
}

const char* dtype_descr(NpyDtype dtype) {
  switch (dtype) {
    case NpyDtype::f32_le:
      return "<f4";
    case NpyDtype::f64_le:
      return "<f8";
    case NpyDtype::u8:
      return "|u1";
  }
  return "?";
}

NpyTensor::NpyTensor(std::vector<std::size_t> shape, NpyDtype dtype,
                     std::vector<std::uint8_t> bytes)
    : shape_(std::move(shape)), dtype_(dtype), bytes_(std::move(bytes)) {
  if (bytes_.size() != product(shape_) * dtype_size(dtype_)) {
    throw ParseError(ParseErrorKind::size_mismatch,
                     "npy: byte count does not match shape and dtype");
  }
}

NpyTensor NpyTensor::from_f32(std::vector<std::size_t> shape, std::span<const float> values) {
  std::vector<std::uint8_t> bytes(values.size_bytes());
  if (!bytes.empty()) std::memcpy(bytes.data(), values.data(), bytes.size());
  return NpyTensor(std::move(shape), NpyDtype::f32_le, std::move(bytes));
}

NpyTensor NpyTensor::from_f64(std::vector<std::size_t> shape, std::span<const double> values) {
  std::vector<std::uint8_t> bytes(values.size_bytes());
  if (!bytes.empty()) std::memcpy(bytes.data(), values.data(), bytes.size());
  return NpyTensor(std::move(shape), NpyDtype::f64_le, std::move(bytes));
}

NpyTensor NpyTensor::from_u8(std::vector<std::size_t> shape,
                             std::span<const std::uint8_t> values) {
  return NpyTensor(std::move(shape), NpyDtype::u8,
                   std::vector<std::uint8_t>(values.begin(), values.end()));
}

std::size_t NpyTensor::element_count() const noexcept { return product(shape_); }

std::vector<double> NpyTensor::to_f64() const {
  const std::size_t n = element_count();
  std::vector<double> out(n);
  switch (dtype_) {
    case NpyDtype::f32_le:
      for (std::size_t i = 0; i < n; ++i) {
        float v;
        std::memcpy(&v, bytes_.data() + 4 * i, 4);
        out[i] = v;
      }
      break;
    case NpyDtype::f64_le:
      if (n) std::memcpy(out.data(), bytes_.data(), 8 * n);
      break;
    case NpyDtype::u8:
      for (std::size_t i = 0; i < n; ++i) out[i] = bytes_[i];
      break;
  }
  return out;
}

std::vector<float> NpyTensor::to_f32() const {
  if (dtype_ == NpyDtype::f32_le) {
    std::vector<float> out(element_count());
    if (!out.empty()) std::memcpy(out.data(), bytes_.data(), bytes_.size());
    return out;
  }
  const auto wide = to_f64();
  return std::vector<float>(wide.begin(), wide.end());
}

NpyHeader read_npy_header(std::span<const std::uint8_t> bytes) {
  // a proper prefix of the magic is a truncated file, anything else is not NPY
  const std::size_t probe = std::min(bytes.size(), sizeof kMagic);
  if (probe > 0 && std::memcmp(bytes.data(), kMagic, probe) != 0) {
    throw ParseError(ParseErrorKind::bad_magic, "npy: missing \\x93NUMPY magic");
  }
  if (probe < sizeof kMagic) {
    throw ParseError(ParseErrorKind::truncated, "npy: file ends inside magic");
  }
  if (bytes.size() < kPreamble) {
    throw ParseError(ParseErrorKind::truncated, "npy: file ends inside preamble");
  }
  if (bytes[6] != 1 || bytes[7] != 0) {
    throw ParseError(ParseErrorKind::bad_header, "npy: only format version 1.0 is supported");
  }
  const std::size_t header_len = bytes[8] | (static_cast<std::size_t>(bytes[9]) << 8);
  if (bytes.size() < kPreamble + header_len) {
    throw ParseError(ParseErrorKind::truncated, "npy: file ends inside header");
  }
  std::string_view text(reinterpret_cast<const char*>(bytes.data() + kPreamble), header_len);
  if (text.empty() || text.back() != '\n') {
    throw ParseError(ParseErrorKind::bad_header, "npy: header must end with newline");
  }
  NpyHeader h = HeaderParser(text).parse();
  h.data_offset = kPreamble + header_len;
  return h;
}

NpyHeader read_npy_header(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  std::vector<std::uint8_t> head(kPreamble);
  in.read(reinterpret_cast<char*>(head.data()), kPreamble);
  head.resize(static_cast<std::size_t>(in.gcount()));
  if (head.size() == kPreamble) {
    const std::size_t header_len = head[8] | (static_cast<std::size_t>(head[9]) << 8);
    head.resize(kPreamble + header_len);
    in.read(reinterpret_cast<char*>(head.data() + kPreamble),
            static_cast<std::streamsize>(header_len));
    head.resize(kPreamble + static_cast<std::size_t>(in.gcount()));
  }
  return read_npy_header(head);
}

NpyTensor read_npy(std::span<const std::uint8_t> bytes) {
  NpyHeader h = read_npy_header(bytes);
  const std::size_t expected = product(h.shape) * dtype_size(h.dtype);
  const std::size_t actual = bytes.size() - h.data_offset;
  if (actual != expected) {
    throw ParseError(actual < expected ? ParseErrorKind::truncated
                                       : ParseErrorKind::size_mismatch,
                     "npy: payload has " + std::to_string(actual) + " bytes, shape needs " +
                         std::to_string(expected));
  }
  return NpyTensor(std::move(h.shape), h.dtype,
                   std::vector<std::uint8_t>(bytes.begin() + static_cast<std::ptrdiff_t>(h.data_offset),
                                             bytes.end()));
}

std::vector<std::uint8_t> write_npy(const NpyTensor& tensor) {
  const std::string header = header_text(tensor);
  if (header.size() > 0xFFFF) {
    throw InvalidInput("npy: header too long for format version 1.0");
  }
  std::vector<std::uint8_t> out;
  out.reserve(kPreamble + header.size() + tensor.bytes().size());
  out.insert(out.end(), std::begin(kMagic), std::end(kMagic));
  out.push_back(1);
  out.push_back(0);
  out.push_back(static_cast<std::uint8_t>(header.size() & 0xFF));
  out.push_back(static_cast<std::uint8_t>(header.size() >> 8));
  out.insert(out.end(), header.begin(), header.end());
  out.insert(out.end(), tensor.bytes().begin(), tensor.bytes().end());
  return out;
}

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  return std::vector<std::uint8_t>(std::istreambuf_iterator<char>(in),
                                   std::istreambuf_iterator<char>());
}

NpyTensor load_npy(const std::filesystem::path& path) {
  const auto bytes = read_file_bytes(path);
  return read_npy(bytes);
}

void save_npy(const std::filesystem::path& path, const NpyTensor& tensor) {
  write_file_atomic(path, write_npy(tensor));
}

void write_file_atomic(const std::filesystem::path& path,
                       std::span<const std::uint8_t> bytes) {
  thread_local std::mt19937_64 rng{std::random_device{}()};
  auto tmp = path;
  tmp += ".tmp" + std::to_string(rng() & 0xFFFFFF);
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + tmp.string());
    out.write(reinterpret_cast<const char*>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
    if (!out) throw Error("short write to " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

void write_file_atomic(const std::filesystem::path& path, const std::string& text) {
  write_file_atomic(path, std::span(reinterpret_cast<const std::uint8_t*>(text.data()),
                                    text.size()));
}

}  // namespace sropkit
