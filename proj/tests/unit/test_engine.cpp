#include <gtest/gtest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <random>

#include "sropkit/architecture.hpp"
#include "sropkit/engine.hpp"
#include "sropkit/error.hpp"
#include "sropkit/manifest.hpp"
#include "sropkit/profile.hpp"

using namespace sropkit;
namespace fs = std::filesystem;

namespace {

fs::path config(const std::string& name) {
  return fs::path(SROPKIT_CONFIG_DIR) / (name + ".json");
}

std::vector<std::size_t> tap_sizes(const ArchitectureSpec& spec) {
  std::vector<std::size_t> out;
  for (const auto& t : spec.taps) out.push_back(spec.shape_of(t).size);
  return out;
}

Activation random_activation(std::size_t c, std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<float> g;
  Activation a(c, n);
  for (float& v : a.data) v = g(rng);
  return a;
}

MultiImage random_rgb(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  MultiImage img{3, n, n, std::vector<double>(3 * n * n)};
  for (double& v : img.pixels) v = u(rng);
  return img;
}

LayerSpec layer(const std::string& name, LayerOp op, LayerParams p = {}) {
  return LayerSpec{name, op, std::move(p)};
}

const char* kSmallNet = R"({
  "name": "small", "input": {"channels": 3, "size": 32},
  "layers": [
    {"name": "conv0.conv", "op": "conv", "params": {"kernel": 3, "padding": 1, "channels_out": 8}},
    {"name": "conv0.bn", "op": "batchnorm"},
    {"name": "conv0", "op": "relu"},
    {"name": "pool1", "op": "maxpool", "params": {"kernel": 2}},
    {"name": "blk.conv", "op": "conv", "params": {"kernel": 3, "padding": 1, "channels_out": 8}},
    {"name": "blk.add", "op": "add", "params": {"inputs": ["blk.conv", "pool1"]}},
    {"name": "blk", "op": "relu"},
    {"name": "cat", "op": "concat", "params": {"inputs": ["blk", "pool1"]}},
    {"name": "pool2", "op": "blurpool", "params": {"max_kernel": 2}},
    {"name": "trans", "op": "avgpool", "params": {"kernel": 2}}
  ],
  "taps": ["conv0", "pool1", "blk", "cat", "pool2", "trans"]
})";

}  // namespace

// ---- shipped configs ------------------------------------------------------------

TEST(Configs, ResNet18Ladder) {
  const auto spec = load_architecture(config("resnet18"));
  EXPECT_EQ(tap_sizes(spec),
            (std::vector<std::size_t>{112, 56, 56, 56, 28, 28, 14, 14, 7, 7}));
  EXPECT_EQ(spec.taps.front(), "conv0");
  EXPECT_EQ(spec.taps[1], "pool1");
  EXPECT_EQ(spec.taps[2], "resblk1.0");
  EXPECT_EQ(spec.taps.back(), "resblk4.1");
}

TEST(Configs, AllBackbonesReproduceTheirLadders) {
  const std::map<std::string, std::vector<std::size_t>> pools{
      {"alexnet", {55, 27, 13, 6}},
      {"vgg16", {112, 56, 28, 14, 7}},
      {"vgg16_bn", {112, 56, 28, 14, 7}},
      {"resnet18", {112, 56, 28, 14, 7}},
      {"resnet34", {112, 56, 28, 14, 7}},
      {"densenet121", {112, 56, 28, 14, 7}},
      {"densenet169", {112, 56, 28, 14, 7}},
  };
  const std::map<std::string, std::vector<std::string>> downscaling{
      {"alexnet", {"conv0", "pool1", "pool2", "pool3"}},
      {"vgg16", {"pool1", "pool2", "pool3", "pool4", "pool5"}},
      {"vgg16_bn", {"pool1", "pool2", "pool3", "pool4", "pool5"}},
      {"resnet18", {"conv0", "pool1", "resblk2.0", "resblk3.0", "resblk4.0"}},
      {"resnet34", {"conv0", "pool1", "resblk2.0", "resblk3.0", "resblk4.0"}},
      {"densenet121", {"conv0", "pool1", "transblk1", "transblk2", "transblk3"}},
      {"densenet169", {"conv0", "pool1", "transblk1", "transblk2", "transblk3"}},
  };
  for (const auto& [name, sizes] : pools) {
    for (const std::string suffix : {"", "_aa"}) {
      const auto spec = load_architecture(config(name + suffix));
      const auto& names = downscaling.at(name);
      for (std::size_t i = 0; i < names.size(); ++i) {
        EXPECT_EQ(spec.shape_of(names[i]).size, sizes[i]) << name << suffix << " " << names[i];
      }
      for (const auto& t : spec.taps) EXPECT_GE(spec.shape_of(t).size, 3u);
    }
  }
}

TEST(Configs, AntiAliasedVariantsUseBlurPool) {
  const auto plain = load_architecture(config("resnet18"));
  const auto aa = load_architecture(config("resnet18_aa"));
  EXPECT_EQ(plain.taps, aa.taps);
  std::size_t blur = 0, maxpool = 0, strided = 0;
  for (const auto& l : aa.layers) {
    blur += l.op == LayerOp::blurpool;
    maxpool += l.op == LayerOp::maxpool;
    strided += l.op == LayerOp::conv && l.params.stride > 1;
  }
  EXPECT_EQ(maxpool, 0u);
  EXPECT_EQ(strided, 0u);
  EXPECT_EQ(blur, 1u + 1u + 3u * 2u);  // stem conv, stem pool, three stages x (conv + shortcut)
  EXPECT_EQ(aa.layers[aa.index_of("pool1").value()].op, LayerOp::blurpool);
}

TEST(Configs, VggBnDiffersOnlyByBatchNorm) {
  auto strip = [](const ArchitectureSpec& s) {
    std::vector<std::string> out;
    for (const auto& l : s.layers) {
      if (l.op == LayerOp::batchnorm) continue;
      out.push_back(l.name + ":" + to_string(l.op) + ":" + std::to_string(l.params.kernel) + ":" +
                    std::to_string(l.params.channels_out));
    }
    return out;
  };
  const auto a = load_architecture(config("vgg16"));
  const auto b = load_architecture(config("vgg16_bn"));
  EXPECT_EQ(strip(a), strip(b));
  EXPECT_EQ(a.taps, b.taps);
  std::size_t bn = 0;
  for (const auto& l : b.layers) bn += l.op == LayerOp::batchnorm;
  EXPECT_EQ(bn, 13u);
}

// ---- validation -------------------------------------------------------------------

TEST(Architecture, JsonRoundTrip) {
  const auto spec = build_from_config(kSmallNet);
  const auto again = build_from_config(architecture_to_json(spec));
  EXPECT_EQ(again.taps, spec.taps);
  EXPECT_EQ(again.shapes, spec.shapes);
  EXPECT_EQ(spec.shape_of("cat"), (TensorShape{16, 16}));
  EXPECT_EQ(spec.shape_of("pool2"), (TensorShape{16, 8}));
  EXPECT_EQ(spec.shape_of("trans"), (TensorShape{16, 4}));
}

TEST(Architecture, DefaultTapsAreAllMapsOfAtLeastThree) {
  const auto spec = build_from_config(R"({"name": "t", "input": {"channels": 1, "size": 8},
    "layers": [{"name": "a", "op": "relu"}, {"name": "p", "op": "maxpool", "params": {"kernel": 2}},
               {"name": "q", "op": "maxpool", "params": {"kernel": 2}}]})");
  EXPECT_EQ(spec.taps, (std::vector<std::string>{"a", "p"}));
}

TEST(Architecture, ValidationErrors) {
  auto bad = [](const std::string& layers, const std::string& taps = "[]") {
    return R"({"name": "t", "input": {"channels": 2, "size": 16}, "layers": )" + layers +
           R"(, "taps": )" + taps + "}";
  };
  EXPECT_THROW(build_from_config(bad(R"([{"name": "a", "op": "softmax"}])")), ValidationError);
  EXPECT_THROW(build_from_config(bad(R"([{"name": "a", "op": "conv", "params": {"kernel": 4, "channels_out": 2}}])")),
               ValidationError);
  EXPECT_THROW(build_from_config(bad(R"([{"name": "a", "op": "conv", "params": {"kernel": 3, "stride": 3, "channels_out": 2}}])")),
               ValidationError);
  EXPECT_THROW(build_from_config(bad(R"([{"name": "a", "op": "maxpool", "params": {"kernel": 5}}])")),
               ValidationError);
  EXPECT_THROW(build_from_config(bad(R"([{"name": "a", "op": "relu"}, {"name": "a", "op": "relu"}])")),
               ValidationError);
  EXPECT_THROW(build_from_config(bad(R"([{"name": "a", "op": "relu"}, {"name": "b", "op": "add", "params": {"inputs": ["a", "ghost"]}}])")),
               ValidationError);
  // a conv that changes channel count cannot be added to its own input
  EXPECT_THROW(build_from_config(bad(R"([{"name": "a", "op": "conv", "params": {"kernel": 3, "padding": 1, "channels_out": 4}},
                                          {"name": "b", "op": "add", "params": {"inputs": ["a", "input"]}}])")),
               ValidationError);
  EXPECT_THROW(build_from_config(bad(R"([{"name": "a", "op": "maxpool", "params": {"kernel": 2}},
                                          {"name": "b", "op": "concat", "params": {"inputs": ["a", "input"]}}])")),
               ValidationError);
  EXPECT_THROW(build_from_config(bad(R"([{"name": "a", "op": "relu"}])", R"(["nope"])")), ValidationError);
  EXPECT_THROW(build_from_config(bad(R"([{"name": "a", "op": "avgpool_global"}])", R"(["a"])")), ValidationError);
  EXPECT_THROW(build_from_config("[1, 2"), ValidationError);
  EXPECT_THROW(build_from_config(R"({"layers": []})"), ValidationError);
}

// ---- layer semantics ------------------------------------------------------------

TEST(ApplyLayer, IdentityConvKeepsInput) {
  for (std::size_t k : {1u, 3u, 5u, 7u}) {
    const auto x = random_activation(3, 9, k);
    LayerParams p;
    p.kernel = k;
    p.padding = k / 2;
    p.channels_out = 3;
    const auto w = identity_weights(3, k);
    const auto y = apply_layer(x, layer("c", LayerOp::conv, p), &w);
    EXPECT_EQ(y.data, x.data) << k;
  }
}

TEST(ApplyLayer, ConvMatchesDirectCorrelation) {
  const auto x = random_activation(2, 7, 3);
  LayerParams p;
  p.kernel = 3;
  p.stride = 2;
  p.padding = 1;
  p.channels_out = 3;
  const auto w = he_uniform_weights(2, 3, 3, 9, "c");
  const auto y = apply_layer(x, layer("c", LayerOp::conv, p), &w);
  ASSERT_EQ(y.size, 4u);
  for (std::size_t o = 0; o < 3; ++o) {
    for (std::size_t oy = 0; oy < 4; ++oy) {
      for (std::size_t ox = 0; ox < 4; ++ox) {
        double acc = 0;
        for (std::size_t c = 0; c < 2; ++c) {
          for (std::size_t ky = 0; ky < 3; ++ky) {
            for (std::size_t kx = 0; kx < 3; ++kx) {
              const long iy = static_cast<long>(2 * oy + ky) - 1;
              const long ix = static_cast<long>(2 * ox + kx) - 1;
              if (iy < 0 || ix < 0 || iy >= 7 || ix >= 7) continue;
              acc += w.values[((o * 2 + c) * 3 + ky) * 3 + kx] *
                     x.data[(c * 7 + static_cast<std::size_t>(iy)) * 7 + static_cast<std::size_t>(ix)];
            }
          }
        }
        EXPECT_NEAR(y.data[(o * 4 + oy) * 4 + ox], acc, 1e-5);
      }
    }
  }
}

TEST(ApplyLayer, MaxPoolExample) {
  Activation x(1, 4);
  x.data = {1, 2, 5, 6, 3, 4, 7, 8, 9, 10, 13, 14, 11, 12, 15, 16};
  LayerParams p;
  p.kernel = 2;
  p.stride = 2;
  const auto y = apply_layer(x, layer("p", LayerOp::maxpool, p));
  EXPECT_EQ(y.size, 2u);
  EXPECT_EQ(y.data, (std::vector<float>{4, 8, 12, 16}));
}

TEST(ApplyLayer, PaddedMaxPoolNeverPicksPadding) {
  Activation x(1, 5, -3.0f);
  LayerParams p;
  p.kernel = 3;
  p.stride = 2;
  p.padding = 1;
  const auto y = apply_layer(x, layer("p", LayerOp::maxpool, p));
  EXPECT_EQ(y.size, 3u);
  for (float v : y.data) EXPECT_EQ(v, -3.0f);
}

TEST(ApplyLayer, BlurPoolOnConstantIsConstant) {
  for (std::size_t n : {4u, 7u, 224u}) {
    for (std::size_t mk : {0u, 2u, 3u}) {
      const Activation x(2, n, 0.625f);
      LayerParams p;
      p.stride = 2;
      p.max_kernel = mk;
      p.max_padding = mk == 3 ? 1 : 0;
      const auto y = apply_layer(x, layer("b", LayerOp::blurpool, p));
      const std::size_t dense = mk == 0 ? n : n + 2 * p.max_padding - mk + 1;
      EXPECT_EQ(y.size, (dense + 1) / 2);
      for (float v : y.data) EXPECT_EQ(v, 0.625f);
    }
  }
}

TEST(ApplyLayer, BlurKernelIsBinomial) {
  Activation x(1, 8, 0.0f);
  x.data[3 * 8 + 4] = 16.0f;  // odd row, even column
  LayerParams p;
  p.stride = 2;
  const auto y = apply_layer(x, layer("b", LayerOp::blurpool, p));
  // [1 2 1]/4 taps centred on even samples: row 3 feeds outputs 1 and 2
  // with weight 1/4 each, column 4 lands on output 2 with weight 1/2.
  EXPECT_FLOAT_EQ(y.data[1 * 4 + 2], 2.0f);
  EXPECT_FLOAT_EQ(y.data[2 * 4 + 2], 2.0f);
  double total = 0;
  for (float v : y.data) total += v;
  EXPECT_FLOAT_EQ(static_cast<float>(total), 4.0f);
}

TEST(ApplyLayer, ReluBatchNormAvgPool) {
  Activation x(1, 4);
  x.data = {-1, 2, -3, 4, 5, -6, 7, -8, 1, 1, 1, 1, 2, 2, 2, 2};
  const auto r = apply_layer(x, layer("r", LayerOp::relu));
  EXPECT_EQ(r.data, (std::vector<float>{0, 2, 0, 4, 5, 0, 7, 0, 1, 1, 1, 1, 2, 2, 2, 2}));
  EXPECT_EQ(apply_layer(x, layer("b", LayerOp::batchnorm)).data, x.data);
  LayerParams p;
  p.kernel = 2;
  p.stride = 2;
  const auto a = apply_layer(x, layer("a", LayerOp::avgpool, p));
  EXPECT_EQ(a.data, (std::vector<float>{0.0f, 0.0f, 1.5f, 1.5f}));
  const auto g = apply_layer(x, layer("g", LayerOp::avgpool_global));
  EXPECT_EQ(g.size, 1u);
  EXPECT_FLOAT_EQ(g.data[0], 0.75f);
}

TEST(ApplyLayer, AddAndConcat) {
  const auto a = random_activation(2, 5, 1);
  const auto b = random_activation(2, 5, 2);
  const Activation* ops[] = {&a, &b};
  const auto s = apply_layer(ops, layer("s", LayerOp::add));
  for (std::size_t i = 0; i < a.data.size(); ++i) EXPECT_EQ(s.data[i], a.data[i] + b.data[i]);
  const auto c = apply_layer(ops, layer("c", LayerOp::concat));
  EXPECT_EQ(c.channels, 4u);
  EXPECT_TRUE(std::equal(b.data.begin(), b.data.end(), c.data.begin() + 50));
  const auto small = random_activation(2, 4, 3);
  const Activation* bad[] = {&a, &small};
  EXPECT_THROW(apply_layer(bad, layer("s", LayerOp::add)), InvalidInput);
  EXPECT_THROW(apply_layer(bad, layer("c", LayerOp::concat)), InvalidInput);
}

TEST(ApplyLayer, MaxPoolOfConstantIsConstant) {
  const Activation x(3, 9, 2.5f);
  LayerParams p;
  p.kernel = 3;
  p.stride = 2;
  p.padding = 1;
  for (float v : apply_layer(x, layer("p", LayerOp::maxpool, p)).data) EXPECT_EQ(v, 2.5f);
}

TEST(ApplyLayer, AntiAliasedPoolLowersMeanSrop) {
  ProfileOptions o;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const auto x = random_activation(16, 32, seed);
    LayerParams mp;
    mp.kernel = 2;
    mp.stride = 2;
    LayerParams bp;
    bp.stride = 2;
    bp.max_kernel = 2;
    const auto plain = apply_layer(x, layer("p", LayerOp::maxpool, mp));
    const auto aa = apply_layer(x, layer("p", LayerOp::blurpool, bp));
    ASSERT_EQ(plain.size, aa.size);
    double mp_mean = 0, aa_mean = 0;
    for (auto v : map_srops(plain, 16, o)) mp_mean += v.value();
    for (auto v : map_srops(aa, 16, o)) aa_mean += v.value();
    EXPECT_LE(aa_mean, mp_mean) << seed;
  }
}

// ---- weights ----------------------------------------------------------------------

TEST(Weights, HeUniformBoundsAndDeterminism) {
  const auto w = he_uniform_weights(16, 8, 3, 123, "conv1");
  ASSERT_EQ(w.values.size(), 16u * 8u * 9u);
  const double bound = std::sqrt(6.0 / (16 * 9));
  double mean = 0, sq = 0;
  for (float v : w.values) {
    EXPECT_LE(std::abs(v), bound);
    mean += v;
    sq += v * v;
  }
  mean /= w.values.size();
  sq /= w.values.size();
  EXPECT_NEAR(mean, 0.0, 0.05 * bound);
  EXPECT_NEAR(sq, bound * bound / 3.0, 0.1 * bound * bound / 3.0);
  EXPECT_EQ(he_uniform_weights(16, 8, 3, 123, "conv1").values, w.values);
  EXPECT_NE(he_uniform_weights(16, 8, 3, 124, "conv1").values, w.values);
  EXPECT_NE(he_uniform_weights(16, 8, 3, 123, "conv2").values, w.values);
}

// ---- forward and profiles ------------------------------------------------------------

TEST(Forward, CapturesTapsAndIsDeterministic) {
  const auto spec = build_from_config(kSmallNet);
  const RandomizedNetwork a(spec, 5), b(spec, 5), c(spec, 6);
  const auto x = to_activation(random_rgb(32, 1));
  const auto ra = a.forward(x, spec.taps);
  const auto rb = b.forward(x, spec.taps);
  const auto rc = c.forward(x, spec.taps);
  ASSERT_EQ(ra.size(), spec.taps.size());
  for (const auto& t : spec.taps) {
    EXPECT_EQ(ra.at(t).data, rb.at(t).data) << t;
    EXPECT_EQ(ra.at(t).shape(), spec.shape_of(t)) << t;
  }
  EXPECT_NE(ra.at("conv0").data, rc.at("conv0").data);
  EXPECT_THROW(a.forward(to_activation(random_rgb(16, 1)), spec.taps), InvalidInput);
}

TEST(RunProfile, ThreadCountDoesNotChangeResults) {
  const auto spec = build_from_config(kSmallNet);
  std::vector<MultiImage> inputs;
  for (int i = 0; i < 5; ++i) inputs.push_back(random_rgb(32, 10 + i));
  setenv("SROPKIT_THREADS", "1", 1);
  const auto one = run_profile(spec, inputs, 3);
  setenv("SROPKIT_THREADS", "3", 1);
  const auto three = run_profile(spec, inputs, 3);
  unsetenv("SROPKIT_THREADS");
  ASSERT_EQ(one.size(), spec.taps.size());
  for (std::size_t i = 0; i < one.size(); ++i) {
    EXPECT_EQ(one[i].layer_name, spec.taps[i]);
    EXPECT_EQ(one[i].kernel_srops, three[i].kernel_srops);
    EXPECT_EQ(one[i].mean, three[i].mean);
    EXPECT_GT(one[i].mean, 0.0);
    EXPECT_LE(one[i].mean, 1.0);
  }
  EXPECT_EQ(one[0].kernel_srops.size() + one[0].skipped_channels, 5u * 8u);
}

TEST(RunProfile, ConstantInputBeforeFirstConvIsZero) {
  const auto spec = build_from_config(R"({"name": "t", "input": {"channels": 3, "size": 16},
    "layers": [{"name": "pool1", "op": "maxpool", "params": {"kernel": 2}},
               {"name": "pool2", "op": "blurpool", "params": {"max_kernel": 2}}]})");
  const MultiImage flat{3, 16, 16, std::vector<double>(3 * 256, 0.3)};
  for (const auto& r : run_profile(spec, std::vector<MultiImage>{flat}, 1)) {
    EXPECT_EQ(r.mean, 0.0) << r.layer_name;
    EXPECT_EQ(r.kernel_srops.size(), 3u);
  }
}

TEST(RunProfile, RejectsWrongInputSize) {
  const auto spec = build_from_config(kSmallNet);
  EXPECT_THROW(run_profile(spec, std::vector<MultiImage>{random_rgb(30, 1)}, 1), InvalidInput);
  EXPECT_THROW(run_profile(spec, std::vector<MultiImage>{}, 1), InvalidInput);
}

TEST(BenchmarkDownscale, LadderAndHalving) {
  std::vector<MultiImage> inputs;
  for (int i = 0; i < 3; ++i) inputs.push_back(random_rgb(224, i));
  const auto r = benchmark_downscale(inputs);
  ASSERT_EQ(r.size(), 6u);
  const std::vector<std::size_t> sizes{224, 112, 56, 28, 14, 7};
  for (std::size_t i = 0; i < 6; ++i) {
    EXPECT_EQ(r[i].resolution, sizes[i]);
    EXPECT_EQ(r[i].layer_name, "ds" + std::to_string(sizes[i]));
    EXPECT_EQ(r[i].kernel_srops.size(), 9u);
  }
  // input-band normalization: a map can reach at most m(n) / m(224)
  for (std::size_t i = 1; i < 6; ++i) {
    EXPECT_LE(r[i].mean, static_cast<double>(radial_bin_count(sizes[i])) / 156.0 + 1e-12);
  }
  ProfileOptions per_map;
  per_map.band = BandReference::per_map;
  per_map.luminance = true;
  const auto p = benchmark_downscale(inputs, per_map);
  EXPECT_EQ(p[0].kernel_srops.size(), 3u);
}

TEST(ExportActivations, ProfileOfDumpMatchesDirectProfile) {
  const auto spec = build_from_config(kSmallNet);
  std::vector<MultiImage> inputs;
  for (int i = 0; i < 3; ++i) inputs.push_back(random_rgb(32, 40 + i));
  const auto dir = fs::temp_directory_path() / ("sropkit_export_" + std::to_string(std::random_device{}()));
  const auto manifest = export_activations(spec, inputs, 9, dir);
  const auto loaded = read_manifest(dir / "manifest.json");
  EXPECT_EQ(loaded, manifest);
  EXPECT_EQ(loaded.layers.size(), spec.taps.size());
  const auto direct = run_profile(spec, inputs, 9);
  const auto from_dump = profile_manifest(loaded, dir, {}, 32);
  ASSERT_EQ(direct.size(), from_dump.size());
  for (std::size_t i = 0; i < direct.size(); ++i) {
    EXPECT_EQ(direct[i].layer_name, from_dump[i].layer_name);
    EXPECT_EQ(direct[i].kernel_srops, from_dump[i].kernel_srops);
  }
  fs::remove_all(dir);
}
