#include <benchmark/benchmark.h>

#include "ecoevo/engine.hpp"
#include "ecoevo/neural.hpp"
#include "ecoevo/world.hpp"

namespace {

using namespace ecoevo;

void BM_Forward(benchmark::State& state) {
  RngStream rng(1, StreamPurpose::kInitWeights, 0, 0);
  const NetworkParams params = NetworkParams::random(rng, 0.1);
  Observation obs{};
  for (std::size_t i = 0; i < obs.size(); i += 5 * kObsChannels) obs[i] = 1.0f;
  RecurrentState rs;
  for (auto _ : state) {
    const ForwardResult r = forward(params, obs, 2, true, rs);
    rs = r.state;
    benchmark::DoNotOptimize(r);
  }
}
BENCHMARK(BM_Forward);

void BM_Regrowth(benchmark::State& state) {
  WorldState world = make_world(200, 400, 200.0);
  RngStream rng(3, StreamPurpose::kInitResources, 0, 0);
  for (auto& c : world.resources) c = rng.uniform() < 0.2 ? 1 : 0;
  std::uint64_t step = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(step_regrowth(world, RegrowthConfig{}, 3, step++));
  }
}
BENCHMARK(BM_Regrowth);

// Full-scale step with a saturated population; reproduction is off so the
// agent count stays near the cap across iterations.
void BM_StepFullScale(benchmark::State& state) {
  SimConfig cfg;
  cfg.start_population = static_cast<int>(state.range(0));
  cfg.reproduction_enabled = false;
  cfg.boundary_mode = BoundaryMode::kBlocked;
  cfg.seed = 11;
  Simulation sim(cfg);
  for (auto _ : state) {
    benchmark::DoNotOptimize(sim.step());
  }
  state.counters["agents"] = sim.population().alive_count;
  state.counters["steps_per_s"] =
      benchmark::Counter(static_cast<double>(state.iterations()),
                         benchmark::Counter::kIsRate);
}
BENCHMARK(BM_StepFullScale)->Arg(330)->Arg(1000)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
