#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "psgdct/model.h"

namespace {

using namespace psgdct;

// Default backbone on a 20 x 12 feature image (2 h of 10-minute windows).
ModelConfig bench_config(std::optional<std::size_t> depth) {
  ModelConfig cfg;
  cfg.dct_depth = depth;
  cfg.input_height = 20;
  cfg.input_width = 12;
  return cfg;
}

Tensor bench_input(const Model& m) {
  std::mt19937_64 rng(2);
  std::normal_distribution<double> g(0.0, 1.0);
  Tensor t(m.input_shape());
  for (double& v : t.values()) v = g(rng);
  return t;
}

std::optional<std::size_t> depth_arg(std::int64_t v) {
  return v == 0 ? std::nullopt : std::optional<std::size_t>(static_cast<std::size_t>(v));
}

void BM_ModelForward(benchmark::State& state) {
  const Model m(bench_config(depth_arg(state.range(0))));
  const Tensor x = bench_input(m);
  const std::vector<double> statics(6, 0.1);
  for (auto _ : state) benchmark::DoNotOptimize(m.logit(x, statics));
}
BENCHMARK(BM_ModelForward)->Arg(0)->Arg(3)->Arg(6);

void BM_ModelForwardBackward(benchmark::State& state) {
  const Model m(bench_config(depth_arg(state.range(0))));
  const Tensor x = bench_input(m);
  const std::vector<double> statics(6, 0.1);
  std::vector<double> grads(m.layout().total);
  Trace trace;
  for (auto _ : state) {
    const double z = m.logit(x, statics, &trace);
    m.backward(trace, weighted_bce(z, 1, 1.0).grad_logit, grads);
    benchmark::ClobberMemory();
  }
}
BENCHMARK(BM_ModelForwardBackward)->Arg(0)->Arg(3)->Arg(6);

}  // namespace
