// Serial reference kernels against the OpenMP versions, plus the two
// hot paths built on them.
#include <benchmark/benchmark.h>

#include "rlab/kernels.hpp"
#include "rlab/model.hpp"
#include "rlab/rng.hpp"
#include "rlab/sampler.hpp"
#include "rlab/schedule.hpp"

namespace {

rlab::DenseArray random(int rows, int cols, std::uint64_t seed) {
  rlab::SeededRng rng(seed);
  return rlab::gaussian(rng, rlab::Shape{rows, cols});
}

void BM_matmul_reference(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const auto a = random(n, n, 1), b = random(n, n, 2);
  for (auto _ : state) benchmark::DoNotOptimize(rlab::reference::matmul(a, b));
}

void BM_matmul_parallel(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const auto a = random(n, n, 1), b = random(n, n, 2);
  for (auto _ : state) benchmark::DoNotOptimize(rlab::matmul(a, b));
}

void BM_softmax_reference(benchmark::State& state) {
  const auto x = random(64, static_cast<int>(state.range(0)), 3);
  for (auto _ : state) benchmark::DoNotOptimize(rlab::reference::softmax_rows(x));
}

void BM_softmax_parallel(benchmark::State& state) {
  const auto x = random(64, static_cast<int>(state.range(0)), 3);
  for (auto _ : state) benchmark::DoNotOptimize(rlab::softmax_rows(x));
}

BENCHMARK(BM_matmul_reference)->Arg(32)->Arg(64)->Arg(128);
BENCHMARK(BM_matmul_parallel)->Arg(32)->Arg(64)->Arg(128);
BENCHMARK(BM_softmax_reference)->Arg(2)->Arg(64)->Arg(256);
BENCHMARK(BM_softmax_parallel)->Arg(2)->Arg(64)->Arg(256);

void BM_predict_noise(benchmark::State& state) {
  const rlab::ModelDims dims;
  const auto w = rlab::init_weights(dims, 0);
  const auto x = rlab::initial_noise(dims, 0);
  const auto prompt = rlab::PromptSpec::parse("circle-red");
  for (auto _ : state) benchmark::DoNotOptimize(rlab::predict_noise(w, x, 500, prompt));
}
BENCHMARK(BM_predict_noise);

void BM_sample_20_steps(benchmark::State& state) {
  const rlab::ModelDims dims;
  const auto w = rlab::init_weights(dims, 0);
  const auto schedule = rlab::make_schedule(dims.timesteps);
  const rlab::SamplerConfig config;
  const auto prompt = rlab::PromptSpec::parse("circle-red");
  for (auto _ : state) benchmark::DoNotOptimize(rlab::sample_reference(w, schedule, config, prompt));
}
BENCHMARK(BM_sample_20_steps)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
