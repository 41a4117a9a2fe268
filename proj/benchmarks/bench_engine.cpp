#include <benchmark/benchmark.h>

#include <random>

#include "sropkit/architecture.hpp"
#include "sropkit/engine.hpp"
#include "sropkit/profile.hpp"

using namespace sropkit;

namespace {

MultiImage random_rgb(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  MultiImage img;
  img.channels = 3;
  img.rows = img.cols = n;
  img.pixels.resize(3 * n * n);
  for (double& v : img.pixels) v = u(rng);
  return img;
}

void BM_Conv3x3(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto c = static_cast<std::size_t>(state.range(1));
  Activation in;
  in.channels = c;
  in.size = n;
  in.data.assign(c * n * n, 0.5f);
  LayerSpec conv;
  conv.name = "conv";
  conv.op = LayerOp::conv;
  conv.params.kernel = 3;
  conv.params.padding = 1;
  conv.params.channels_out = c;
  const auto w = he_uniform_weights(c, c, 3, 1, "conv");
  for (auto _ : state) benchmark::DoNotOptimize(apply_layer(in, conv, &w));
}
BENCHMARK(BM_Conv3x3)->Args({56, 64})->Args({28, 128})->Args({14, 256})->Unit(benchmark::kMillisecond);

void BM_BenchmarkDownscale(benchmark::State& state) {
  const std::vector<MultiImage> images{random_rgb(224, 4)};
  for (auto _ : state) benchmark::DoNotOptimize(benchmark_downscale(images));
}
BENCHMARK(BM_BenchmarkDownscale)->Unit(benchmark::kMillisecond);

void BM_RandnetResnet18(benchmark::State& state) {
  const auto spec = load_architecture(std::string(SROPKIT_CONFIG_DIR) + "/resnet18.json");
  const std::vector<MultiImage> images{random_rgb(224, 5)};
  for (auto _ : state) benchmark::DoNotOptimize(run_profile(spec, images, 1));
}
BENCHMARK(BM_RandnetResnet18)->Unit(benchmark::kMillisecond)->Iterations(1);

}  // namespace
