#include <benchmark/benchmark.h>

#include <map>

#include "betadim/bary.hpp"
#include "betadim/beta_shift.hpp"
#include "betadim/constructions.hpp"
#include "betadim/kernels.hpp"

using namespace betadim;

namespace {

DigitWord constructed(std::int64_t digits) {
  ConstructionSpec spec{4, Rational(1, 2), FillPolicy::random(1), 6, digits};
  return generate_bary(spec, 10).digits;
}

const DigitWord& word(std::int64_t n) {
  static std::map<std::int64_t, DigitWord> cache;
  auto it = cache.find(n);
  if (it == cache.end()) it = cache.emplace(n, constructed(n)).first;
  return it->second;
}

const DigitWord kRunDigits{0, 9};

template <auto Scan>
void BM_scan(benchmark::State& state) {
  const DigitWord& w = word(state.range(0));
  const auto mode = state.range(1) ? kernels::ScanMode::Records : kernels::ScanMode::All;
  for (auto _ : state) benchmark::DoNotOptimize(Scan(w, kRunDigits, mode));
  state.SetBytesProcessed(static_cast<std::int64_t>(state.iterations()) * state.range(0));
}

template <auto Fill>
void BM_fill(benchmark::State& state) {
  DigitWord out(static_cast<std::size_t>(state.range(0)));
  const DigitWord alphabet{0, 1, 2, 3, 4, 5, 6, 7, 8, 9};
  for (auto _ : state) {
    Fill(out, alphabet, 42);
    benchmark::ClobberMemory();
  }
  state.SetBytesProcessed(static_cast<std::int64_t>(state.iterations()) * state.range(0));
}

template <auto Count>
void BM_count(benchmark::State& state) {
  const BetaSystem beta = BetaSystem::parse("root:1,1,1");
  const DigitWord bound = expansion_of_one_star(beta, 32);
  for (auto _ : state) benchmark::DoNotOptimize(Count(bound, beta.alphabet_top(), static_cast<std::size_t>(state.range(0))));
}

void BM_run_decomposition(benchmark::State& state) {
  const DigitWord& w = word(state.range(0));
  RunOptions ro;
  ro.records_only = true;
  ro.parallel = state.range(1) != 0;
  for (auto _ : state) benchmark::DoNotOptimize(run_decomposition(w, 10, ro));
  state.SetBytesProcessed(static_cast<std::int64_t>(state.iterations()) * state.range(0));
}

}  // namespace

BENCHMARK(BM_scan<kernels::scan_runs_serial>)->Name("scan_runs/serial")->ArgsProduct({{1 << 20, 1 << 24}, {0, 1}})->Unit(benchmark::kMillisecond);
BENCHMARK(BM_scan<kernels::scan_runs_parallel>)->Name("scan_runs/parallel")->ArgsProduct({{1 << 20, 1 << 24}, {0, 1}})->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_fill<kernels::random_fill_serial>)->Name("random_fill/serial")->Arg(1 << 24)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_fill<kernels::random_fill_parallel>)->Name("random_fill/parallel")->Arg(1 << 24)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_count<kernels::count_bounded_words_serial>)->Name("count_bounded/serial")->DenseRange(14, 18, 2)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_count<kernels::count_bounded_words_parallel>)->Name("count_bounded/parallel")->DenseRange(14, 18, 2)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_run_decomposition)->Name("run_decomposition/records")->ArgsProduct({{1 << 24}, {0, 1}})->Unit(benchmark::kMillisecond)->UseRealTime();

BENCHMARK_MAIN();
