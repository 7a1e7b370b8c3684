#include <benchmark/benchmark.h>

#include <cstdint>

#include "gshape/infometrics.hpp"

namespace {

using namespace gshape;

constexpr std::size_t kSamples = 65536;

void BM_MiMc(benchmark::State& state) {
  const auto order = static_cast<std::size_t>(state.range(0));
  const auto c = square_qam(order);
  const auto pmf = Pmf::uniform(order);
  EstimatorOptions opts;
  opts.workers = 1;
  std::uint64_t seed = 0;
  for (auto _ : state) benchmark::DoNotOptimize(mi_mc(c, pmf, {0.05, 1.0}, kSamples, ++seed, opts));
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * kSamples));
}
BENCHMARK(BM_MiMc)->Arg(16)->Arg(64)->Arg(256)->Unit(benchmark::kMillisecond);

void BM_GmiMc(benchmark::State& state) {
  const auto c = square_qam(static_cast<std::size_t>(state.range(0)));
  EstimatorOptions opts;
  opts.workers = 1;
  opts.demapper = state.range(1) ? Demapper::kMaxLog : Demapper::kLogSumExp;
  std::uint64_t seed = 0;
  for (auto _ : state) benchmark::DoNotOptimize(gmi_mc(c, {0.05, 1.0}, kSamples, ++seed, opts));
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * kSamples));
}
BENCHMARK(BM_GmiMc)->Args({64, 0})->Args({64, 1})->Args({256, 0})->Unit(benchmark::kMillisecond);

void BM_Quadrature(benchmark::State& state) {
  const auto c = square_qam(16);
  const auto pmf = Pmf::uniform(16);
  const int nodes = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(mi_quadrature_oracle(c, pmf, {0.1, 1.0}, nodes));
}
BENCHMARK(BM_Quadrature)->Arg(40)->Arg(64)->Unit(benchmark::kMillisecond);

}  // namespace
