#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "bnuq/catalog.hpp"
#include "bnuq/kernels.hpp"
#include "bnuq/model.hpp"

namespace {

std::vector<double> normal_values(std::size_t n) {
  std::mt19937_64 rng(7);
  std::normal_distribution<double> d;
  std::vector<double> v(n);
  for (auto& x : v) x = d(rng);
  return v;
}

void BM_TiltedSumsReference(benchmark::State& state) {
  const auto v = normal_values(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(bnuq::tilted_sums_reference(v, 0.7));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_TiltedSumsSerial(benchmark::State& state) {
  const auto v = normal_values(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(bnuq::tilted_sums(v, 0.7, bnuq::Exec::serial));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_TiltedSumsParallel(benchmark::State& state) {
  const auto v = normal_values(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(bnuq::tilted_sums(v, 0.7, bnuq::Exec::parallel));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_SampleOrr(benchmark::State& state, bnuq::Exec exec) {
  const auto orr = bnuq::build_orr_network();
  const auto n = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(bnuq::sample(orr.model, n, 1, exec));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

}  // namespace

BENCHMARK(BM_TiltedSumsReference)->Arg(1 << 16)->Arg(1 << 20);
BENCHMARK(BM_TiltedSumsSerial)->Arg(1 << 16)->Arg(1 << 20);
BENCHMARK(BM_TiltedSumsParallel)->Arg(1 << 16)->Arg(1 << 20);
BENCHMARK_CAPTURE(BM_SampleOrr, serial, bnuq::Exec::serial)->Arg(1 << 16);
BENCHMARK_CAPTURE(BM_SampleOrr, parallel, bnuq::Exec::parallel)->Arg(1 << 16);

BENCHMARK_MAIN();
