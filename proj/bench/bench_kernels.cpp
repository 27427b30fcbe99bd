// Serial reference kernels against the OpenMP production kernels, plus the
// replica loop at several thread counts.

#include <benchmark/benchmark.h>
#include <omp.h>

#include <random>
#include <vector>

#include "sklab/configurations.hpp"
#include "sklab/free_energy.hpp"
#include "sklab/kernels.hpp"
#include "sklab/mixture.hpp"

namespace {

std::vector<double> random_vector(int n, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> v(std::size_t{1} << n);
  for (double& x : v) x = u(rng);
  return v;
}

void BM_WalshHadamardSerial(benchmark::State& state) {
  const auto base = random_vector(static_cast<int>(state.range(0)), 1);
  for (auto _ : state) {
    auto v = base;
    sklab::kernels::serial::walsh_hadamard(v);
    benchmark::DoNotOptimize(v.data());
  }
}

void BM_WalshHadamardParallel(benchmark::State& state) {
  const auto base = random_vector(static_cast<int>(state.range(0)), 1);
  for (auto _ : state) {
    auto v = base;
    sklab::kernels::walsh_hadamard(v);
    benchmark::DoNotOptimize(v.data());
  }
}

void BM_HammingProfileSerial(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const auto a = random_vector(n, 2), b = random_vector(n, 3);
  for (auto _ : state) benchmark::DoNotOptimize(sklab::kernels::serial::hamming_profile(a, b, n));
}

void BM_HammingProfileParallel(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const auto a = random_vector(n, 2), b = random_vector(n, 3);
  for (auto _ : state) benchmark::DoNotOptimize(sklab::kernels::hamming_profile(a, b, n));
}

void BM_HammingProfileLayered(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const auto a = random_vector(n, 2), b = random_vector(n, 3);
  for (auto _ : state) benchmark::DoNotOptimize(sklab::kernels::hamming_profile_layered(a, b, n));
}

void BM_ReplicaLoop(benchmark::State& state) {
  const int threads = static_cast<int>(state.range(0));
  const auto spec = sklab::MixtureSpec::pure(2);
  const auto c = sklab::nearest_admissible(8, 0.0);
  const int saved = omp_get_max_threads();
  omp_set_num_threads(threads);
  for (auto _ : state) benchmark::DoNotOptimize(sklab::estimate_F(spec, 8, c, 64, 7).mean);
  omp_set_num_threads(saved);
}

}  // namespace

BENCHMARK(BM_WalshHadamardSerial)->DenseRange(6, 12, 2);
BENCHMARK(BM_WalshHadamardParallel)->DenseRange(6, 20, 2);
BENCHMARK(BM_HammingProfileSerial)->DenseRange(6, 10, 2);
BENCHMARK(BM_HammingProfileParallel)->DenseRange(6, 12, 2);
BENCHMARK(BM_HammingProfileLayered)->DenseRange(6, 12, 2);
BENCHMARK(BM_ReplicaLoop)->Arg(1)->Arg(2)->Arg(4);

BENCHMARK_MAIN();
