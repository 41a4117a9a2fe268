#include <benchmark/benchmark.h>

#include <random>

#include "sropkit/fft.hpp"
#include "sropkit/spectral.hpp"

using namespace sropkit;

namespace {

std::vector<double> noise(std::size_t count, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  std::vector<double> v(count);
  for (double& x : v) x = g(rng);
  return v;
}

void BM_DftReal(benchmark::State& state) {
  const auto x = noise(static_cast<std::size_t>(state.range(0)), 1);
  for (auto _ : state) benchmark::DoNotOptimize(dft_real(x));
}
BENCHMARK(BM_DftReal)->Arg(7)->Arg(56)->Arg(224)->Arg(1009)->Arg(4096);

void BM_Dft2Real(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto x = noise(n * n, 2);
  for (auto _ : state) benchmark::DoNotOptimize(dft2_real(x, n, n));
}
BENCHMARK(BM_Dft2Real)->Arg(7)->Arg(28)->Arg(56)->Arg(112)->Arg(224);

void BM_Srop2d(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const Image img(n, n, noise(n * n, 3));
  for (auto _ : state) benchmark::DoNotOptimize(srop_2d(img));
}
BENCHMARK(BM_Srop2d)->Arg(14)->Arg(55)->Arg(112)->Arg(224);

}  // namespace
BENCHMARK_MAIN();
