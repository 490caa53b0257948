#include <benchmark/benchmark.h>

#include "cannonball/equidist.hpp"
#include "cannonball/exactseq.hpp"
#include "cannonball/moments.hpp"

namespace {

void BM_CompactTerm(benchmark::State& state) {
  std::uint64_t n = static_cast<std::uint64_t>(state.range(0));
  for (auto _ : state) {
    benchmark::DoNotOptimize(cannonball::compact_term(n++));
  }
}
BENCHMARK(BM_CompactTerm)->Arg(1000)->Arg(100000000)->Arg(1000000000000);

void BM_BigTerm(benchmark::State& state) {
  std::uint64_t n = static_cast<std::uint64_t>(state.range(0));
  for (auto _ : state) {
    benchmark::DoNotOptimize(cannonball::term(n++, 0));
  }
}
BENCHMARK(BM_BigTerm)->Arg(100000000);

void BM_FracSqrt(benchmark::State& state) {
  const auto bits = static_cast<unsigned>(state.range(0));
  std::uint64_t n = 1000000;
  for (auto _ : state) {
    benchmark::DoNotOptimize(cannonball::frac_sqrt_u128(n++, bits));
  }
}
BENCHMARK(BM_FracSqrt)->Arg(64)->Arg(96);

void BM_MomentSum(benchmark::State& state) {
  const auto k = static_cast<unsigned>(state.range(0));
  for (auto _ : state) {
    benchmark::DoNotOptimize(cannonball::moment_sum(1, 100000, k));
  }
  state.SetItemsProcessed(state.iterations() * 100000);
}
BENCHMARK(BM_MomentSum)->Arg(1)->Arg(3)->Unit(benchmark::kMillisecond);

void BM_Sandwich(benchmark::State& state) {
  for (auto _ : state) {
    benchmark::DoNotOptimize(cannonball::sandwich(100000, 2, 100));
  }
}
BENCHMARK(BM_Sandwich)->Unit(benchmark::kMillisecond);

void BM_ExpSum(benchmark::State& state) {
  for (auto _ : state) {
    benchmark::DoNotOptimize(cannonball::exp_sum(1, 100000, 7));
  }
}
BENCHMARK(BM_ExpSum)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
