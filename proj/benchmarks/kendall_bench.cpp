#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "qe/metrics.hpp"

namespace {

std::vector<double> draws(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> pool(2, 10);
  std::vector<double> v(n);
  for (auto& x : v) x = pool(rng) * 0.5;
  return v;
}

void BM_KendallTauB(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto x = draws(n, 1);
  const auto y = draws(n, 2);
  for (auto _ : state) benchmark::DoNotOptimize(qe::kendall_tau(x, y));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_KendallTauB)->Arg(825)->Arg(1280)->Arg(15750)->Arg(100000)->Complexity(benchmark::oNLogN);

void BM_RandomBaseline(benchmark::State& state) {
  const auto rubric = qe::Rubric::numeric(1, 5, 0.5);
  for (auto _ : state) benchmark::DoNotOptimize(qe::random_baseline(825, rubric, 7));
}
BENCHMARK(BM_RandomBaseline);

}  // namespace
