// Microbenchmarks for the hot paths: threshold rows at production scale,
// region tables, the greedy solver, the tree adversary and the confidence
// bound. Run with --benchmark_filter=... to narrow.

#include <benchmark/benchmark.h>

#include <cstdint>
#include <random>
#include <vector>

#include "l0cert/eval.hpp"
#include "l0cert/regions.hpp"
#include "l0cert/solver.hpp"
#include "l0cert/threshold.hpp"
#include "l0cert/tree.hpp"

namespace {

using namespace l0cert;

constexpr NoiseParams kMnistScale{784, 1, 80};

void BM_region_table(benchmark::State& state) {
  const int r = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(build_region_table(kMnistScale, r));
}
BENCHMARK(BM_region_table)->Arg(1)->Arg(4)->Arg(10);

void BM_threshold_row(benchmark::State& state) {
  const int r = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(threshold_bigint(kMnistScale, r, 20));
}
BENCHMARK(BM_threshold_row)->Arg(1)->Arg(4)->Arg(10);

void BM_rho(benchmark::State& state) {
  const auto pairs = mass_pairs(build_region_table(kMnistScale, static_cast<int>(state.range(0))));
  const Rational p(9, 10);
  for (auto _ : state) benchmark::DoNotOptimize(rho(pairs, p));
}
BENCHMARK(BM_rho)->Arg(4)->Arg(10);

Tree bench_tree(int d, int max_depth, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  Dataset data;
  data.d = d;
  for (int i = 0; i < 400; ++i) {
    std::vector<std::uint8_t> x(static_cast<std::size_t>(d));
    for (auto& b : x) b = static_cast<std::uint8_t>(rng() % 2);
    data.y.push_back(((x[0] ^ x[3]) | x[5]) != 0);
    data.x.push_back(std::move(x));
  }
  return train(data, {d, 1, 80}, max_depth);
}

void BM_train(benchmark::State& state) {
  std::mt19937_64 rng(7);
  Dataset data;
  data.d = 20;
  for (int i = 0; i < 500; ++i) {
    std::vector<std::uint8_t> x(20);
    for (auto& b : x) b = static_cast<std::uint8_t>(rng() % 2);
    data.y.push_back(((x[0] & x[1]) | x[2]) != 0);
    data.x.push_back(std::move(x));
  }
  for (auto _ : state) benchmark::DoNotOptimize(train(data, {20, 1, 80}, 4));
}
BENCHMARK(BM_train);

void BM_dp_adversary(benchmark::State& state) {
  const Tree tree = bench_tree(40, 5, 11);
  std::vector<std::uint8_t> x(40, 0);
  for (int i = 0; i < 40; i += 3) x[static_cast<std::size_t>(i)] = 1;
  const int r = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(dp_adversary(tree, x, r));
}
BENCHMARK(BM_dp_adversary)->Arg(3)->Arg(8);

void BM_clopper_pearson(benchmark::State& state) {
  for (auto _ : state)
    benchmark::DoNotOptimize(clopper_pearson_lower(99990, 100000, 0.999));
}
BENCHMARK(BM_clopper_pearson);

}  // namespace

BENCHMARK_MAIN();
