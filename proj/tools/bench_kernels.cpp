// SPDX-License-Identifier: Apache-2.0
//
// Serial reference vs OpenMP kernels. Build with -DSHADOWPOSE_NATIVE=ON and
// run ./bench_kernels --benchmark_counters_tabular=true.

#include <benchmark/benchmark.h>

#include <vector>

#include "shadowpose/common.hpp"
#include "shadowpose/kernels.hpp"

namespace K = shadowpose::kernels;

namespace {

std::vector<double> random_plane(int h, int w, std::uint64_t seed) {
  shadowpose::Rng rng(seed);
  std::vector<double> p(static_cast<std::size_t>(h) * w);
  for (auto& v : p) v = rng.uniform01();
  return p;
}

void bm_box_mean_serial(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const auto in = random_plane(n, n, 1);
  std::vector<double> out(in.size());
  for (auto _ : state) {
    K::serial::box_mean(in.data(), out.data(), n, n, 11);
    benchmark::DoNotOptimize(out.data());
  }
}

void bm_box_mean_omp(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const auto in = random_plane(n, n, 1);
  std::vector<double> out(in.size());
  for (auto _ : state) {
    K::box_mean(in.data(), out.data(), n, n, 11);
    benchmark::DoNotOptimize(out.data());
  }
}

void bm_sobel_serial(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const auto in = random_plane(n, n, 2);
  std::vector<double> gx(in.size()), gy(in.size());
  for (auto _ : state) {
    K::serial::sobel_gradients(in.data(), gx.data(), gy.data(), n, n);
    benchmark::DoNotOptimize(gx.data());
  }
}

void bm_sobel_omp(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const auto in = random_plane(n, n, 2);
  std::vector<double> gx(in.size()), gy(in.size());
  for (auto _ : state) {
    K::sobel_gradients(in.data(), gx.data(), gy.data(), n, n);
    benchmark::DoNotOptimize(gx.data());
  }
}

void conv_inputs(int n, int ci, int co, std::vector<double>& in,
                 std::vector<double>& wgt, std::vector<double>& bias,
                 std::vector<double>& out) {
  shadowpose::Rng rng(3);
  in.resize(static_cast<std::size_t>(ci) * n * n);
  wgt.resize(static_cast<std::size_t>(co) * ci * 9);
  bias.resize(static_cast<std::size_t>(co));
  out.resize(static_cast<std::size_t>(co) * n * n);
  for (auto& v : in) v = rng.uniform(-1, 1);
  for (auto& v : wgt) v = rng.uniform(-1, 1);
  for (auto& v : bias) v = rng.uniform(-1, 1);
}

void bm_conv3x3_serial(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  std::vector<double> in, wgt, bias, out;
  conv_inputs(n, 32, 32, in, wgt, bias, out);
  for (auto _ : state) {
    K::serial::conv3x3_forward(in.data(), 32, n, n, wgt.data(), bias.data(), 32,
                               out.data());
    benchmark::DoNotOptimize(out.data());
  }
  state.counters["GFLOP/s"] = benchmark::Counter(
      2.0 * 9 * 32 * 32 * n * n, benchmark::Counter::kIsIterationInvariantRate,
      benchmark::Counter::OneK::kIs1000);
}

void bm_conv3x3_omp(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  std::vector<double> in, wgt, bias, out;
  conv_inputs(n, 32, 32, in, wgt, bias, out);
  for (auto _ : state) {
    K::conv3x3_forward(in.data(), 32, n, n, wgt.data(), bias.data(), 32, out.data());
    benchmark::DoNotOptimize(out.data());
  }
  state.counters["GFLOP/s"] = benchmark::Counter(
      2.0 * 9 * 32 * 32 * n * n, benchmark::Counter::kIsIterationInvariantRate,
      benchmark::Counter::OneK::kIs1000);
}

void bm_gaussian_serial(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const auto in = random_plane(n, n, 4);
  std::vector<double> out(in.size());
  for (auto _ : state) {
    K::serial::gaussian_blur(in.data(), out.data(), n, n, 2.0);
    benchmark::DoNotOptimize(out.data());
  }
}

void bm_gaussian_omp(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const auto in = random_plane(n, n, 4);
  std::vector<double> out(in.size());
  for (auto _ : state) {
    K::gaussian_blur(in.data(), out.data(), n, n, 2.0);
    benchmark::DoNotOptimize(out.data());
  }
}

}  // namespace

BENCHMARK(bm_box_mean_serial)->Arg(256)->Arg(512)->Unit(benchmark::kMillisecond);
BENCHMARK(bm_box_mean_omp)->Arg(256)->Arg(512)->Unit(benchmark::kMillisecond);
BENCHMARK(bm_sobel_serial)->Arg(256)->Arg(512)->Unit(benchmark::kMillisecond);
BENCHMARK(bm_sobel_omp)->Arg(256)->Arg(512)->Unit(benchmark::kMillisecond);
BENCHMARK(bm_conv3x3_serial)->Arg(64)->Arg(128)->Unit(benchmark::kMillisecond);
BENCHMARK(bm_conv3x3_omp)->Arg(64)->Arg(128)->Unit(benchmark::kMillisecond);
BENCHMARK(bm_gaussian_serial)->Arg(256)->Arg(512)->Unit(benchmark::kMillisecond);
BENCHMARK(bm_gaussian_omp)->Arg(256)->Arg(512)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
