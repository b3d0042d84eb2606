#include <benchmark/benchmark.h>

#include <vector>

#include "vibedaq/sensorbus/scenario.hpp"

namespace {

using namespace vibedaq;

// One tick advances every mode and renders all sensors.
void BM_ScenarioTick(benchmark::State& state) {
  std::vector<std::uint8_t> mux;
  for (int i = 0; i < state.range(0); ++i) mux.push_back(static_cast<std::uint8_t>(i));
  bus::ScenarioEngine engine(bus::tvt_preset(), 208.0, mux, 1);
  for (auto _ : state) {
    engine.advance();
    benchmark::DoNotOptimize(engine.sample_g(0));
  }
}
BENCHMARK(BM_ScenarioTick)->Arg(3)->Arg(8);

}  // namespace
