#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "vibedaq/spectra/spectra.hpp"

namespace {

using namespace vibedaq;

std::vector<double> noise(std::size_t n) {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> d(0.0, 1.0);
  std::vector<double> x(n);
  for (auto& v : x) v = d(rng);
  return x;
}

void BM_WelchPsd(benchmark::State& state) {
  const auto x = noise(static_cast<std::size_t>(state.range(0)) * 208);
  for (auto _ : state) benchmark::DoNotOptimize(spectra::welch_psd(x, 208.0, {2048, 0.5}));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(x.size()));
}
BENCHMARK(BM_WelchPsd)->Arg(60)->Arg(120)->Unit(benchmark::kMillisecond);

void BM_MeanCi(benchmark::State& state) {
  std::vector<spectra::Spectrum> runs;
  for (int r = 0; r < state.range(0); ++r) {
    runs.push_back(spectra::npsd(spectra::welch_psd(noise(208 * 60), 208.0)));
  }
  for (auto _ : state) benchmark::DoNotOptimize(spectra::mean_ci(runs));
}
BENCHMARK(BM_MeanCi)->Arg(2)->Arg(6);

void BM_FindPeaks(benchmark::State& state) {
  const auto s = spectra::welch_psd(noise(208 * 60), 208.0);
  for (auto _ : state) benchmark::DoNotOptimize(spectra::find_peaks(s, 5, 3.0));
}
BENCHMARK(BM_FindPeaks);

}  // namespace
