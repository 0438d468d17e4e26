#include <benchmark/benchmark.h>

#include <random>

#include "psgdct/spectral.h"

namespace {

using psgdct::RealMatrix;

RealMatrix random_matrix(std::size_t h, std::size_t w) {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> g(0.0, 1.0);
  RealMatrix m(h, w);
  for (double& v : m.values()) v = g(rng);
  return m;
}

void BM_Dct2dForward(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const RealMatrix m = random_matrix(n, n);
  for (auto _ : state) benchmark::DoNotOptimize(psgdct::spectral::dct2d_forward(m));
}
BENCHMARK(BM_Dct2dForward)->RangeMultiplier(2)->Range(4, 64);

void BM_Dct2dRoundTrip(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const RealMatrix m = random_matrix(n, n);
  for (auto _ : state) {
    benchmark::DoNotOptimize(psgdct::spectral::dct2d_inverse(psgdct::spectral::dct2d_forward(m)));
  }
}
BENCHMARK(BM_Dct2dRoundTrip)->Arg(12)->Arg(20)->Arg(32);

void BM_SoftThreshold(benchmark::State& state) {
  const RealMatrix m = random_matrix(64, 64);
  for (auto _ : state) benchmark::DoNotOptimize(psgdct::spectral::threshold(m, 0.5, psgdct::ThresholdMode::kSoft));
}
BENCHMARK(BM_SoftThreshold);

}  // namespace
