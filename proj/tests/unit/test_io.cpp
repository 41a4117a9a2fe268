#include <gtest/gtest.h>

#include <cstring>
#include <filesystem>
#include <fstream>
#include <random>

#include "sropkit/datasets.hpp"
#include "sropkit/error.hpp"
#include "sropkit/manifest.hpp"
#include "sropkit/npy.hpp"

using namespace sropkit;
namespace fs = std::filesystem;

namespace {

std::vector<std::uint8_t> bytes_of(const std::string& s) { return {s.begin(), s.end()}; }

std::string numpy_header(const std::string& dict, std::size_t block) {
  std::string h("\x93NUMPY\x01\x00", 8);
  const std::size_t len = block - 10;
  h += static_cast<char>(len & 0xff);
  h += static_cast<char>(len >> 8);
  h += dict;
  h.append(block - h.size() - 1, ' ');
  h += '\n';
  return h;
}

void put_be32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int s = 24; s >= 0; s -= 8) out.push_back(static_cast<std::uint8_t>(v >> s));
}

struct Mnist {
  std::vector<std::uint8_t> images, labels;
};

Mnist make_mnist(std::uint32_t n) {
  Mnist m;
  put_be32(m.images, kMnistImageMagic);
  put_be32(m.images, n);
  put_be32(m.images, 28);
  put_be32(m.images, 28);
  for (std::uint32_t i = 0; i < n * 784; ++i) m.images.push_back(static_cast<std::uint8_t>(i * 7));
  put_be32(m.labels, kMnistLabelMagic);
  put_be32(m.labels, n);
  for (std::uint32_t i = 0; i < n; ++i) m.labels.push_back(static_cast<std::uint8_t>(i % 10));
  return m;
}

std::vector<std::uint8_t> make_cifar(std::size_t records) {
  std::vector<std::uint8_t> b;
  for (std::size_t r = 0; r < records; ++r) {
    b.push_back(static_cast<std::uint8_t>((r * 3) % 10));
    for (int plane = 0; plane < 3; ++plane) b.insert(b.end(), 1024, static_cast<std::uint8_t>(10 * plane + r));
  }
  return b;
}

class TempDir {
 public:
  TempDir() {
    path_ = fs::temp_directory_path() /
            ("sropkit_io_" + std::to_string(std::random_device{}()) + "_" +
             ::testing::UnitTest::GetInstance()->current_test_info()->name());
    fs::create_directories(path_);
  }
  ~TempDir() { fs::remove_all(path_); }
  const fs::path& path() const { return path_; }

 private:
  fs::path path_;
};

}  // namespace

// ---- NPY -------------------------------------------------------------------

TEST(Npy, HeaderMatchesNumpyByteForByte) {
  const std::vector<float> v{0, 1, 2, 3, 4, 5};
  const auto bytes = write_npy(NpyTensor::from_f32({2, 3}, v));
  const auto expect =
      numpy_header("{'descr': '<f4', 'fortran_order': False, 'shape': (2, 3), }", 128);
  ASSERT_EQ(bytes.size(), 128u + 24u);
  EXPECT_EQ(std::string(bytes.begin(), bytes.begin() + 128), expect);
  float back[6];
  std::memcpy(back, bytes.data() + 128, 24);
  for (int i = 0; i < 6; ++i) EXPECT_EQ(back[i], static_cast<float>(i));

  const auto one_d = write_npy(NpyTensor::from_f64({2}, std::vector<double>{1.5, -2.0}));
  EXPECT_EQ(std::string(one_d.begin(), one_d.begin() + 128),
            numpy_header("{'descr': '<f8', 'fortran_order': False, 'shape': (2,), }", 128));
  const auto scalar = write_npy(NpyTensor::from_f32({}, std::vector<float>{3.0f}));
  EXPECT_EQ(std::string(scalar.begin(), scalar.begin() + 128),
            numpy_header("{'descr': '<f4', 'fortran_order': False, 'shape': (), }", 128));
  const auto empty = write_npy(NpyTensor::from_u8({0}, std::vector<std::uint8_t>{}));
  EXPECT_EQ(std::string(empty.begin(), empty.end()),
            numpy_header("{'descr': '|u1', 'fortran_order': False, 'shape': (0,), }", 128));
}

TEST(Npy, ReadsNumpyWrittenFile) {
  auto file = bytes_of(numpy_header("{'descr': '<f8', 'fortran_order': False, 'shape': (2,), }", 128));
  const double vals[2] = {1.5, -2.0};
  file.insert(file.end(), reinterpret_cast<const std::uint8_t*>(vals),
              reinterpret_cast<const std::uint8_t*>(vals) + 16);
  const auto t = read_npy(file);
  EXPECT_EQ(t.shape(), (std::vector<std::size_t>{2}));
  EXPECT_EQ(t.dtype(), NpyDtype::f64_le);
  EXPECT_EQ(t.to_f64(), (std::vector<double>{1.5, -2.0}));
  EXPECT_EQ(write_npy(t), file);
}

TEST(Npy, ToleratesKeyOrderAndSpacing) {
  auto file = bytes_of(numpy_header("{'shape':(3,),'fortran_order':False,'descr':'|u1'}", 64));
  file.insert(file.end(), {7, 8, 9});
  const auto t = read_npy(file);
  EXPECT_EQ(t.dtype(), NpyDtype::u8);
  EXPECT_EQ(t.to_f64(), (std::vector<double>{7, 8, 9}));
}

TEST(Npy, DistinctErrors) {
  auto good = write_npy(NpyTensor::from_f32({2, 2}, std::vector<float>{1, 2, 3, 4}));
  auto expect_kind = [](std::vector<std::uint8_t> b, ParseErrorKind kind) {
    try {
      read_npy(b);
      ADD_FAILURE() << "no error for kind " << to_string(kind);
    } catch (const ParseError& e) {
      EXPECT_EQ(e.kind(), kind) << e.what();
    }
  };
  auto bad_magic = good;
  bad_magic[0] = 0x92;
  expect_kind(bad_magic, ParseErrorKind::bad_magic);

  auto big_endian = bytes_of(numpy_header("{'descr': '>f4', 'fortran_order': False, 'shape': (1,), }", 128));
  big_endian.insert(big_endian.end(), 4, 0);
  expect_kind(big_endian, ParseErrorKind::unsupported_dtype);
  auto int_dtype = bytes_of(numpy_header("{'descr': '<i4', 'fortran_order': False, 'shape': (1,), }", 128));
  int_dtype.insert(int_dtype.end(), 4, 0);
  expect_kind(int_dtype, ParseErrorKind::unsupported_dtype);

  auto fortran = bytes_of(numpy_header("{'descr': '<f4', 'fortran_order': True, 'shape': (1,), }", 128));
  fortran.insert(fortran.end(), 4, 0);
  expect_kind(fortran, ParseErrorKind::bad_header);

  auto extra = good;
  extra.push_back(0);
  expect_kind(extra, ParseErrorKind::size_mismatch);
  auto short_payload = good;
  short_payload.pop_back();
  expect_kind(short_payload, ParseErrorKind::truncated);
  expect_kind(std::vector<std::uint8_t>(good.begin(), good.begin() + 5), ParseErrorKind::truncated);

  auto v2 = good;
  v2[6] = 2;
  expect_kind(v2, ParseErrorKind::bad_header);
}

TEST(Npy, TensorRejectsWrongByteCount) {
  EXPECT_THROW(NpyTensor({2, 2}, NpyDtype::f32_le, std::vector<std::uint8_t>(15)), ParseError);
}

TEST(Npy, RoundTripRandomShapes) {
  std::mt19937_64 rng(1);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t rank = rng() % 5;
    std::vector<std::size_t> shape;
    std::size_t count = 1;
    for (std::size_t d = 0; d < rank; ++d) {
      shape.push_back(rng() % 6);
      count *= shape.back();
    }
    const auto dtype = static_cast<NpyDtype>(rng() % 3);
    std::vector<std::uint8_t> payload(count * dtype_size(dtype));
    for (auto& b : payload) b = static_cast<std::uint8_t>(rng());
    const NpyTensor t(shape, dtype, payload);
    const auto bytes = write_npy(t);
    EXPECT_EQ((bytes.size() - payload.size()) % 64, 0u);
    const auto back = read_npy(bytes);
    EXPECT_EQ(back, t);
    EXPECT_EQ(write_npy(back), bytes);
  }
}

TEST(Npy, FileHelpersAndAtomicWrite) {
  TempDir dir;
  const auto path = dir.path() / "a.npy";
  const auto t = NpyTensor::from_f32({3}, std::vector<float>{1, 2, 3});
  save_npy(path, t);
  EXPECT_EQ(load_npy(path), t);
  const auto header = read_npy_header(path);
  EXPECT_EQ(header.shape, (std::vector<std::size_t>{3}));
  EXPECT_EQ(header.data_offset, 128u);
  std::size_t files = 0;
  for (const auto& e : fs::directory_iterator(dir.path())) {
    (void)e;
    ++files;
  }
  EXPECT_EQ(files, 1u);  // no temp file left behind
  EXPECT_THROW(load_npy(dir.path() / "missing.npy"), Error);
}

// ---- MNIST -----------------------------------------------------------------

TEST(Mnist, ParsesHeaderAndPixels) {
  const auto m = make_mnist(5);
  const auto set = read_mnist_idx(m.images, m.labels);
  EXPECT_EQ(set.count, 5u);
  EXPECT_EQ(set.rows, 28u);
  EXPECT_EQ(set.cols, 28u);
  EXPECT_EQ(set.channels, 1u);
  EXPECT_EQ(set.pixels.size(), 5u * 784u);
  EXPECT_EQ(set.labels, (std::vector<std::uint8_t>{0, 1, 2, 3, 4}));
  EXPECT_EQ(set.image(1)[0], static_cast<std::uint8_t>(784 * 7));
  const auto f = set.image_f64(0);
  EXPECT_DOUBLE_EQ(f.pixels[1], 7.0 / 255.0);
}

TEST(Mnist, RejectsEveryTruncation) {
  const auto m = make_mnist(3);
  for (std::size_t cut = 0; cut < m.images.size(); ++cut) {
    const std::vector<std::uint8_t> part(m.images.begin(), m.images.begin() + cut);
    EXPECT_THROW(read_mnist_idx(part, m.labels), ParseError) << cut;
  }
  for (std::size_t cut = 0; cut < m.labels.size(); ++cut) {
    const std::vector<std::uint8_t> part(m.labels.begin(), m.labels.begin() + cut);
    EXPECT_THROW(read_mnist_idx(m.images, part), ParseError) << cut;
  }
}

TEST(Mnist, RejectsBadMagicLabelsAndMismatch) {
  auto m = make_mnist(2);
  EXPECT_THROW(read_mnist_idx(m.labels, m.images), ParseError);
  auto bad_label = m;
  bad_label.labels.back() = 10;
  EXPECT_THROW(read_mnist_idx(bad_label.images, bad_label.labels), ParseError);
  const auto other = make_mnist(3);
  EXPECT_THROW(read_mnist_idx(m.images, other.labels), ParseError);
  auto trailing = m;
  trailing.images.push_back(0);
  EXPECT_THROW(read_mnist_idx(trailing.images, trailing.labels), ParseError);
}

// ---- CIFAR-10 ----------------------------------------------------------------

TEST(Cifar, ParsesPlanesInRgbOrder) {
  const auto b = make_cifar(4);
  const auto set = read_cifar10_batch(b);
  EXPECT_EQ(set.count, 4u);
  EXPECT_EQ(set.channels, 3u);
  EXPECT_EQ(set.rows, 32u);
  EXPECT_EQ(set.labels, (std::vector<std::uint8_t>{0, 3, 6, 9}));
  const auto img = set.image(2);
  EXPECT_EQ(img[0], 2);
  EXPECT_EQ(img[1024], 12);
  EXPECT_EQ(img[2048], 22);
  const auto frogs = filter_by_label(set, kCifarFrogLabel);
  EXPECT_EQ(frogs.count, 1u);
  EXPECT_EQ(frogs.image(0)[0], 2);
}

TEST(Cifar, RejectsEveryTruncation) {
  const auto b = make_cifar(2);
  for (std::size_t cut = 0; cut < b.size(); ++cut) {
    if (cut == kCifarRecordBytes) continue;  // one whole record is a valid batch
    EXPECT_THROW(read_cifar10_batch(std::span(b.data(), cut)), ParseError) << cut;
  }
  auto bad = b;
  bad[0] = 11;
  EXPECT_THROW(read_cifar10_batch(bad), ParseError);
}

// ---- NPY images --------------------------------------------------------------

TEST(ImageFromNpy, Layouts) {
  const std::vector<std::uint8_t> hwc{255, 0, 0, 0, 255, 0, 0, 0, 255, 51, 51, 51};
  const auto a = image_from_npy(NpyTensor::from_u8({2, 2, 3}, hwc));
  EXPECT_EQ(a.channels, 3u);
  EXPECT_EQ(a.plane(0)[0], 1.0);
  EXPECT_EQ(a.plane(1)[1], 1.0);
  EXPECT_EQ(a.plane(2)[2], 1.0);
  EXPECT_DOUBLE_EQ(a.plane(0)[3], 0.2);

  const std::vector<float> chw{1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12};
  const auto b = image_from_npy(NpyTensor::from_f32({3, 2, 2}, chw));
  EXPECT_EQ(b.plane(1)[0], 5.0);
  const auto g = image_from_npy(NpyTensor::from_f32({2, 2}, std::vector<float>{1, 2, 3, 4}));
  EXPECT_EQ(g.channels, 1u);
  EXPECT_THROW(image_from_npy(NpyTensor::from_f32({4}, std::vector<float>(4))), InvalidInput);
}

TEST(ImageDir, LoadsSortedNpyFiles) {
  TempDir dir;
  save_npy(dir.path() / "b.npy", NpyTensor::from_f32({3, 3}, std::vector<float>(9, 2.0f)));
  save_npy(dir.path() / "a.npy", NpyTensor::from_f32({3, 3}, std::vector<float>(9, 1.0f)));
  std::ofstream(dir.path() / "notes.txt") << "skip me";
  const auto images = load_image_dir(dir.path());
  ASSERT_EQ(images.size(), 2u);
  EXPECT_EQ(images[0].pixels[0], 1.0);
  EXPECT_EQ(images[1].pixels[0], 2.0);
  EXPECT_THROW(load_image_dir(dir.path() / "none"), InvalidInput);
}

// ---- manifest ----------------------------------------------------------------

TEST(Manifest, RoundTripLossless) {
  TempDir dir;
  save_npy(dir.path() / "conv0.npy",
           NpyTensor::from_f32({2, 3, 3}, std::vector<float>(18, 1.0f)));
  RunManifest m;
  m.model_name = "resnet18";
  m.weights_origin = WeightsOrigin::pretrained;
  m.input_description = "two images";
  m.seed = 42;
  m.layers.push_back({"conv0", "conv0.npy", {2, 3, 3}});
  write_manifest(m, dir.path() / "manifest.json");
  const auto back = read_manifest(dir.path() / "manifest.json");
  EXPECT_EQ(back, m);
  EXPECT_EQ(parse_manifest(manifest_to_json(m)), m);
}

TEST(Manifest, UnknownFieldsIgnoredRequiredFieldsEnforced) {
  const std::string ok = R"({"schema_version": 1, "model_name": "m", "weights_origin": "randomized",
    "extra": [1, 2], "layers": [{"name": "a", "file": "a.npy", "shape": [1, 3, 3], "note": "x"}]})";
  EXPECT_EQ(parse_manifest(ok).layers.size(), 1u);
  EXPECT_THROW(parse_manifest(R"({"schema_version": 1, "weights_origin": "randomized", "layers": []})"),
               ValidationError);
  EXPECT_THROW(parse_manifest(R"({"model_name": "m", "weights_origin": "randomized", "layers": []})"),
               ValidationError);
  EXPECT_THROW(parse_manifest(R"({"schema_version": 1, "model_name": "m", "weights_origin": "trained", "layers": []})"),
               ValidationError);
  EXPECT_THROW(parse_manifest("{not json"), ValidationError);
  const std::string dup = R"({"schema_version": 1, "model_name": "m", "weights_origin": "randomized",
    "layers": [{"name": "a", "file": "a.npy", "shape": [1]}, {"name": "a", "file": "b.npy", "shape": [1]}]})";
  EXPECT_THROW(parse_manifest(dup), ValidationError);
}

TEST(Manifest, DanglingFileAndShapeMismatch) {
  TempDir dir;
  RunManifest m;
  m.model_name = "m";
  m.layers.push_back({"a", "a.npy", {1, 3, 3}});
  write_manifest(m, dir.path() / "manifest.json");
  EXPECT_THROW(read_manifest(dir.path() / "manifest.json"), ValidationError);
  save_npy(dir.path() / "a.npy", NpyTensor::from_f32({1, 4, 4}, std::vector<float>(16)));
  EXPECT_THROW(read_manifest(dir.path() / "manifest.json"), ValidationError);
  save_npy(dir.path() / "a.npy", NpyTensor::from_f32({1, 3, 3}, std::vector<float>(9)));
  EXPECT_NO_THROW(read_manifest(dir.path() / "manifest.json"));
}
