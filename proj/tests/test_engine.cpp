#include <doctest.h>

#include <algorithm>
#include <limits>
#include <set>

#include <tbb/global_control.h>

#include "ecoevo/checkpoint.hpp"
#include "ecoevo/engine.hpp"
#include "ecoevo/errors.hpp"
#include "ecoevo/lab.hpp"
#include "support.hpp"

using namespace ecoevo;
using ecoevo::testing::hand_built;
using ecoevo::testing::quiet_config;

namespace {

SimConfig small_config(std::uint64_t seed = 1) {
  SimConfig cfg;
  cfg.rows = 30;
  cfg.cols = 40;
  cfg.max_population = 60;
  cfg.start_population = 25;
  cfg.start_resources = 300;
  cfg.seed = seed;
  cfg.physiology.time_to_reproduce = 30;
  return cfg;
}

}  // namespace

TEST_CASE("default configuration matches the published natural environment") {
  const SimConfig cfg;
  CHECK(cfg.rows == 200);
  CHECK(cfg.cols == 400);
  CHECK(cfg.max_population == 1000);
  CHECK(cfg.start_population == 330);
  CHECK(cfg.start_resources == 16000);
  CHECK(cfg.total_steps == 1000000);
  CHECK(cfg.sigma == 0.02);
  CHECK(cfg.physiology.time_to_reproduce == 140);
  CHECK(cfg.physiology.time_to_die == 200);
  CHECK(cfg.physiology.max_age == 650);
  CHECK(cfg.physiology.max_energy == 3.0);
  CHECK(cfg.physiology.decay == 0.025);
}

TEST_CASE("initial state") {
  SimConfig cfg;
  cfg.rows = 100;
  cfg.cols = 200;
  cfg.start_resources = 4000;
  cfg.start_population = 83;
  const Simulation sim(cfg);
  CHECK(sim.population().alive_count == 83);
  CHECK(sim.population().count_alive() == 83);
  CHECK(sim.world().resource_count() == 4000);
  CHECK(sim.current_step() == 0);
  std::set<std::uint64_t> ids;
  for (const AgentState& a : sim.population().slots) {
    if (!a.alive) continue;
    ids.insert(a.id);
    CHECK(a.energy == 3.0);
    CHECK(a.age == 0);
    CHECK(a.prev_action == -1);
    CHECK(a.genome.all_finite());
  }
  CHECK(ids.size() == 83);
}

TEST_CASE("configuration validation") {
  SimConfig cfg = small_config();
  cfg.start_population = 61;
  CHECK_THROWS_AS(Simulation{cfg}, ConfigError);
  cfg = small_config();
  cfg.start_resources = 30 * 40 + 1;
  CHECK_THROWS_AS(Simulation{cfg}, ConfigError);
  cfg = small_config();
  cfg.physiology.decay = 0.0;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg = small_config();
  cfg.rows = 1;
  try {
    cfg.validate();
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(e.field() == "grid_size");
  }
}

TEST_CASE("empty population only regrows") {
  SimConfig cfg = quiet_config();
  cfg.regrowth.enabled = true;
  cfg.regrowth.spontaneous_prob = 0.5;
  Simulation sim = hand_built(cfg, {}, {});
  const StepEvents ev = sim.step();
  CHECK(ev.births == 0);
  CHECK(ev.deaths == 0);
  CHECK(ev.consumed == 0);
  CHECK(ev.grown > 0);
  CHECK(sim.world().resource_count() == ev.grown);
}

TEST_CASE("agent standing on a resource eats it") {
  SimConfig cfg = quiet_config();
  cfg.physiology.initial_energy = 1.0;
  Simulation sim = hand_built(cfg, {{4, 4}}, {{4, 4}});
  sim.set_policy(lab::policies::stay());
  const StepEvents ev = sim.step();
  CHECK(ev.consumed == 1);
  CHECK_FALSE(sim.world().has_resource(4, 4));
  const AgentState& a = sim.population().slots[0];
  CHECK(a.ate);
  CHECK(a.energy == doctest::Approx(1.0 + 1.0 - 0.025).epsilon(1e-15));
  CHECK(ev.agents.size() == 1);
  CHECK(ev.agents[0].ate);
  CHECK(ev.agents[0].visible_resources == 1);
}

TEST_CASE("two agents on one resource: one eats") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    SimConfig cfg = quiet_config();
    cfg.seed = seed;
    Simulation sim = hand_built(cfg, {{4, 4}, {4, 4}}, {{4, 4}});
    sim.set_policy(lab::policies::stay());
    const StepEvents ev = sim.step();
    CHECK(ev.consumed == 1);
    const int eaters = static_cast<int>(sim.population().slots[0].ate) +
                       static_cast<int>(sim.population().slots[1].ate);
    CHECK(eaters == 1);
  }
}

TEST_CASE("wall-killed agents do not eat") {
  SimConfig cfg = quiet_config();
  Simulation sim = hand_built(cfg, {{0, 3}}, {{0, 3}});
  sim.set_policy([](const PolicyContext&) { return Action::kUp; });
  const StepEvents ev = sim.step();
  CHECK(ev.deaths == 1);
  CHECK(ev.deaths_wall == 1);
  CHECK(ev.consumed == 0);
  CHECK(sim.world().has_resource(0, 3));
  CHECK(sim.population().alive_count == 0);
}

TEST_CASE("wall-killed agents do not reproduce") {
  SimConfig cfg = quiet_config();
  cfg.physiology.time_to_reproduce = 1;
  Simulation sim = hand_built(cfg, {{0, 3}}, {});
  sim.set_policy([](const PolicyContext&) { return Action::kUp; });
  const StepEvents ev = sim.step();
  CHECK(ev.births == 0);
  CHECK(sim.population().alive_count == 0);
}

TEST_CASE("reproduction places the child on the parent's cell") {
  SimConfig cfg = quiet_config();
  cfg.physiology.time_to_reproduce = 3;
  cfg.sigma = 0.0;
  Simulation sim = hand_built(cfg, {{5, 5}}, {});
  sim.set_policy(lab::policies::stay());
  sim.step();
  sim.step();
  const StepEvents ev = sim.step();
  CHECK(ev.births == 1);
  const auto& slots = sim.population().slots;
  REQUIRE(slots[1].alive);
  CHECK(slots[1].position == slots[0].position);
  CHECK(slots[1].genome == slots[0].genome);
  CHECK(slots[1].age == 0);
  CHECK(slots[1].energy == cfg.physiology.initial_energy);
  CHECK(slots[1].recurrent == RecurrentState{});
  CHECK(slots[1].id == 2);
  CHECK(slots[0].repr_timer == 0);
}

TEST_CASE("spawn_offspring at capacity defers") {
  SimConfig cfg = quiet_config();
  cfg.max_population = 2;
  Simulation sim = hand_built(cfg, {{1, 1}, {2, 2}}, {});
  Population pop = sim.population();
  pop.slots[0].repr_timer = 500;
  const SpawnResult r = spawn_offspring(0, pop, cfg, 0);
  CHECK(r.outcome == SpawnOutcome::kDeferred);
  CHECK(pop.alive_count == 2);
  CHECK(pop.slots[0].repr_timer == 500);

  pop.slots[1].alive = false;
  pop.alive_count = 1;
  const SpawnResult s = spawn_offspring(0, pop, cfg, 0);
  CHECK(s.outcome == SpawnOutcome::kSpawned);
  CHECK(s.slot == 1);
  CHECK(pop.alive_count == 2);
}

TEST_CASE("deferred parents retry and the child is mutated") {
  SimConfig cfg = quiet_config();
  cfg.max_population = 1;
  cfg.physiology.time_to_reproduce = 2;
  Simulation sim = hand_built(cfg, {{5, 5}}, {});
  sim.set_policy(lab::policies::stay());
  sim.step();
  const StepEvents ev = sim.step();
  CHECK(ev.births == 0);
  CHECK(ev.deferred_spawns == 1);
  CHECK(sim.step().deferred_spawns == 1);
  CHECK(sim.population().slots[0].repr_timer == 3);

  SimConfig wide = cfg;
  wide.max_population = 2;
  Simulation grows = hand_built(wide, {{5, 5}}, {});
  grows.set_policy(lab::policies::stay());
  grows.step();
  grows.step();
  REQUIRE(grows.population().slots[1].alive);
  CHECK_FALSE(grows.population().slots[1].genome == grows.population().slots[0].genome);
}

TEST_CASE("lowest free slot is reused") {
  SimConfig cfg = quiet_config();
  cfg.physiology.time_to_reproduce = 1;
  cfg.sigma = 0.0;
  Simulation sim = hand_built(cfg, {{5, 5}, {0, 0}, {6, 6}}, {});
  sim.set_policy([](const PolicyContext& ctx) {
    return ctx.agent.position == Position{0, 0} ? Action::kUp : Action::kStay;
  });
  const StepEvents ev = sim.step();
  // Slot 1 dies on the wall; two births fill slots 1 and 3.
  CHECK(ev.deaths == 1);
  CHECK(ev.births == 2);
  const auto& slots = sim.population().slots;
  CHECK(slots[1].alive);
  CHECK(slots[1].position == Position{5, 5});
  CHECK(slots[3].alive);
  CHECK(slots[3].position == Position{6, 6});
}

TEST_CASE("conservation and accounting over a fuzzed run") {
  SimConfig cfg = small_config(3);
  Simulation sim(cfg);
  for (int t = 0; t < 1500 && sim.population().alive_count > 0; ++t) {
    const std::size_t res = sim.world().resource_count();
    const int k = sim.population().alive_count;
    const StepEvents ev = sim.step();
    REQUIRE(sim.world().resource_count() == res - ev.consumed + ev.grown);
    REQUIRE(sim.population().alive_count == k + ev.births - ev.deaths);
    REQUIRE(sim.population().count_alive() == sim.population().alive_count);
    REQUIRE(sim.population().alive_count <= cfg.max_population);
    REQUIRE(ev.deaths == static_cast<int>(ev.death_ages.size()));
    REQUIRE(ev.agents.size() == static_cast<std::size_t>(k));
  }
}

TEST_CASE("worker count does not change the trajectory") {
  auto digest_with = [](std::size_t workers) {
    tbb::global_control limit(tbb::global_control::max_allowed_parallelism, workers);
    Simulation sim(small_config(7));
    for (int t = 0; t < 300; ++t) sim.step();
    return state_digest(sim);
  };
  CHECK(digest_with(1) == digest_with(4));
}

TEST_CASE("same seed, same trajectory; different seed, different trajectory") {
  Simulation a(small_config(5));
  Simulation b(small_config(5));
  Simulation c(small_config(6));
  for (int t = 0; t < 200; ++t) {
    a.step();
    b.step();
    c.step();
  }
  CHECK(state_digest(a) == state_digest(b));
  CHECK(state_digest(a) != state_digest(c));
}

TEST_CASE("run with zero steps returns the initial state") {
  Simulation sim(small_config());
  const std::string before = state_digest(sim);
  int checkpoints = 0;
  RunOptions opt;
  opt.total_steps = 0;
  opt.checkpoint_every = 10;
  opt.on_checkpoint = [&](const Simulation&) { ++checkpoints; };
  const RunSummary s = run(sim, opt);
  CHECK(s.final_step == 0);
  CHECK(state_digest(sim) == before);
  CHECK(checkpoints == 1);
}

TEST_CASE("run checkpoints at multiples and at the end") {
  Simulation sim(small_config());
  std::vector<std::uint64_t> at;
  RunOptions opt;
  opt.total_steps = 25;
  opt.checkpoint_every = 10;
  opt.on_checkpoint = [&](const Simulation& s) { at.push_back(s.current_step()); };
  run(sim, opt);
  CHECK(at == std::vector<std::uint64_t>{0, 10, 20, 25});
}

TEST_CASE("extinction ends a run without error") {
  SimConfig cfg = quiet_config();
  Simulation sim = hand_built(cfg, {{0, 0}}, {});
  sim.set_policy([](const PolicyContext&) { return Action::kUp; });
  RunOptions opt;
  opt.total_steps = 100;
  const RunSummary s = run(sim, opt);
  REQUIRE(s.extinct_at.has_value());
  CHECK(*s.extinct_at == 1);
  CHECK(s.final_step == 1);
  CHECK(s.deaths == 1);
}

TEST_CASE("starvation through the full pipeline") {
  SimConfig cfg = quiet_config(20, 20);
  Simulation sim = hand_built(cfg, {{10, 10}}, {});
  sim.set_policy(lab::policies::stay());
  int died = -1;
  for (int t = 1; t <= 400 && died < 0; ++t) {
    const StepEvents ev = sim.step();
    if (ev.deaths_starvation == 1) {
      died = t;
      CHECK(ev.death_ages == std::vector<int>{t});
    }
  }
  CHECK(died == 320);
}

TEST_CASE("non-finite policy output is a fault") {
  SimConfig cfg = quiet_config();
  Simulation sim = hand_built(cfg, {{3, 3}}, {});
  sim.population().slots[0].genome.weights()[arch::kDenseOutOffset + 42] =
      std::numeric_limits<float>::infinity();
  CHECK_THROWS_AS(sim.step(), NumericFault);
}
