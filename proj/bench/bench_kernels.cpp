// Serial vs OpenMP kernels. Each benchmark takes a problem size argument; the
// serial and parallel variants of a kernel run on identical inputs.

#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "tdcif/decomp.hpp"
#include "tdcif/kernels.hpp"

namespace {

namespace ks = tdcif::kernels::serial;
namespace kp = tdcif::kernels::parallel;

std::vector<double> random_values(std::size_t n, unsigned seed) {
  std::mt19937_64 g(seed);
  std::normal_distribution<double> d(0.0, 1.0);
  std::vector<double> v(n);
  for (double& x : v) x = d(g);
  return v;
}

template <bool Parallel>
void BM_Gemm(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto a = random_values(n * n, 1), b = random_values(n * n, 2);
  std::vector<double> c(n * n);
  for (auto _ : state) {
    if constexpr (Parallel)
      kp::gemm(n, n, n, a, b, c);
    else
      ks::gemm(n, n, n, a, b, c);
    benchmark::DoNotOptimize(c.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(2 * n * n * n));
}

template <bool Parallel>
void BM_ModeProduct(benchmark::State& state) {
  // middle mode of an n x n x n tensor times an (n/2) x n matrix
  const auto n = static_cast<std::size_t>(state.range(0));
  const std::size_t out = n / 2;
  const auto a = random_values(out * n, 3), x = random_values(n * n * n, 4);
  std::vector<double> y(n * out * n);
  for (auto _ : state) {
    if constexpr (Parallel)
      kp::mode_product(n, n, n, out, a, x, y);
    else
      ks::mode_product(n, n, n, out, a, x, y);
    benchmark::DoNotOptimize(y.data());
  }
}

template <bool Parallel>
void BM_Mttkrp(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const std::size_t r = 8;
  const auto x = random_values(n * n * n, 5);
  const auto f0 = random_values(n * r, 6), f1 = random_values(n * r, 7), f2 = random_values(n * r, 8);
  std::vector<double> out(n * r);
  for (auto _ : state) {
    for (std::size_t mode = 0; mode < 3; ++mode) {
      if constexpr (Parallel)
        kp::mttkrp3(n, n, n, x, mode, r, f0, f1, f2, out);
      else
        ks::mttkrp3(n, n, n, x, mode, r, f0, f1, f2, out);
      benchmark::DoNotOptimize(out.data());
    }
  }
}

template <bool Parallel>
void BM_KhatriRao(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const std::size_t cols = 16;
  const auto a = random_values(n * cols, 9), b = random_values(n * cols, 10);
  std::vector<double> out(n * n * cols);
  for (auto _ : state) {
    if constexpr (Parallel)
      kp::khatri_rao(n, n, cols, a, b, out);
    else
      ks::khatri_rao(n, n, cols, a, b, out);
    benchmark::DoNotOptimize(out.data());
  }
}

template <bool Parallel>
void BM_SliceMix(benchmark::State& state) {
  // 112 x 92 face-sized slices, n observations, 4 common features
  const std::size_t op = 112 * 92, nk = 4;
  const auto q = static_cast<std::size_t>(state.range(0));
  const auto slices = random_values(op * nk, 11), mix = random_values(q * nk, 12);
  std::vector<double> out(op * q);
  for (auto _ : state) {
    if constexpr (Parallel)
      kp::slice_mix(op, q, nk, slices, mix, out);
    else
      ks::slice_mix(op, q, nk, slices, mix, out);
    benchmark::DoNotOptimize(out.data());
  }
}

template <bool Parallel>
void BM_PairwiseDistances(benchmark::State& state) {
  // face-sized feature vectors, n test against 4n training samples
  const std::size_t d = 112 * 92;
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto t = random_values(d * n, 13), r = random_values(d * 4 * n, 14);
  std::vector<double> out(n * 4 * n);
  for (auto _ : state) {
    if constexpr (Parallel)
      kp::pairwise_sq_dist(d, n, 4 * n, t, r, out);
    else
      ks::pairwise_sq_dist(d, n, 4 * n, t, r, out);
    benchmark::DoNotOptimize(out.data());
  }
}

// End to end: a fixed number of LL1 sweeps on a random group tensor.
void BM_Ll1Sweeps(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto values = random_values(n * n * 40, 15);
  const tdcif::DenseTensor t({n, n, 40}, values);
  tdcif::DecompConfig cfg;
  cfg.max_sweeps = 10;
  const std::vector<std::size_t> ranks = {2, 2};
  for (auto _ : state) benchmark::DoNotOptimize(tdcif::ll1_nn(t, ranks, cfg));
}

BENCHMARK(BM_Gemm<false>)->Name("gemm/serial")->Arg(64)->Arg(256);
BENCHMARK(BM_Gemm<true>)->Name("gemm/parallel")->Arg(64)->Arg(256)->UseRealTime();
BENCHMARK(BM_ModeProduct<false>)->Name("mode_product/serial")->Arg(32)->Arg(96);
BENCHMARK(BM_ModeProduct<true>)->Name("mode_product/parallel")->Arg(32)->Arg(96)->UseRealTime();
BENCHMARK(BM_Mttkrp<false>)->Name("mttkrp3/serial")->Arg(32)->Arg(96);
BENCHMARK(BM_Mttkrp<true>)->Name("mttkrp3/parallel")->Arg(32)->Arg(96)->UseRealTime();
BENCHMARK(BM_KhatriRao<false>)->Name("khatri_rao/serial")->Arg(64)->Arg(256);
BENCHMARK(BM_KhatriRao<true>)->Name("khatri_rao/parallel")->Arg(64)->Arg(256)->UseRealTime();
BENCHMARK(BM_SliceMix<false>)->Name("slice_mix/serial")->Arg(10)->Arg(40);
BENCHMARK(BM_SliceMix<true>)->Name("slice_mix/parallel")->Arg(10)->Arg(40)->UseRealTime();
BENCHMARK(BM_PairwiseDistances<false>)->Name("pairwise_sq_dist/serial")->Arg(16)->Arg(64);
BENCHMARK(BM_PairwiseDistances<true>)->Name("pairwise_sq_dist/parallel")->Arg(16)->Arg(64)->UseRealTime();
BENCHMARK(BM_Ll1Sweeps)->Name("ll1_nn/10_sweeps")->Arg(32)->Arg(64)->UseRealTime()->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
