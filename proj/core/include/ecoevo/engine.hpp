#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include "ecoevo/agents.hpp"
#include "ecoevo/neural.hpp"
#include "ecoevo/rng.hpp"
#include "ecoevo/world.hpp"

namespace ecoevo {

// Every knob of a natural run. Defaults give the full-size natural
// environment (400 columns x 200 rows).
struct SimConfig {
  int rows = 200;
  int cols = 400;
  int max_population = 1000;
  int start_population = 330;
  int start_resources = 16000;
  std::uint64_t total_steps = 1'000'000;
  double sigma = 0.02;             // mutation standard deviation
  double init_weight_std = 0.1;    // initial weights ~ N(0, init_weight_std)
  std::uint64_t seed = 0;
  PhysiologyConfig physiology;
  RegrowthConfig regrowth;
  BoundaryMode boundary_mode = BoundaryMode::kLethal;
  bool reproduction_enabled = true;

  // Throws ConfigError naming the first invalid field.
  void validate() const;

  friend bool operator==(const SimConfig&, const SimConfig&) = default;
};

// Fixed-capacity slot array. A slot is occupied iff its agent is alive.
struct Population {
  std::vector<AgentState> slots;
  int alive_count = 0;
  std::uint64_t next_id = 1;

  explicit Population(int capacity = 0)
      : slots(static_cast<std::size_t>(capacity)) {}

  int capacity() const noexcept { return static_cast<int>(slots.size()); }
  // Lowest free slot, or -1 when full.
  int first_free_slot() const noexcept;
  // Recount of live slots, independent of alive_count.
  int count_alive() const noexcept;
};

struct AgentStepRecord {
  int slot = 0;
  std::uint64_t id = 0;
  int visible_resources = 0;
  bool ate = false;
};

struct StepEvents {
  std::uint64_t step = 0;
  int births = 0;
  int deaths = 0;
  int deaths_starvation = 0;
  int deaths_wall = 0;
  int deaths_age = 0;
  int deferred_spawns = 0;
  std::size_t consumed = 0;
  std::size_t grown = 0;
  std::vector<int> death_ages;
  // One record per agent alive at the start of the step.
  std::vector<AgentStepRecord> agents;
};

struct PolicyContext {
  const Observation& observation;
  const AgentState& agent;
  RngStream& rng;
};

// Replaces the network for scripted experiments. Called concurrently for
// different agents; must not mutate shared state.
using ScriptedPolicy = std::function<Action(const PolicyContext&)>;

enum class SpawnOutcome { kSpawned, kDeferred };

struct SpawnResult {
  SpawnOutcome outcome = SpawnOutcome::kDeferred;
  int slot = -1;
};

class Simulation {
 public:
  // Random initial state: resources without replacement over wall-free
  // cells, agents uniformly (co-location allowed) with fresh random weights.
  explicit Simulation(SimConfig cfg);
  // Explicit initial state; used by checkpoints and lab environments.
  Simulation(SimConfig cfg, WorldState world, Population population,
             std::uint64_t step);

  const SimConfig& config() const noexcept { return cfg_; }
  const WorldState& world() const noexcept { return world_; }
  const Population& population() const noexcept { return population_; }
  WorldState& world() noexcept { return world_; }
  Population& population() noexcept { return population_; }
  std::uint64_t current_step() const noexcept { return step_; }

  void set_policy(ScriptedPolicy policy) { policy_ = std::move(policy); }

  // Observe, act, move, consume, update energy and timers, resolve deaths and
  // births, regrow. Throws NumericFault if a network output is non-finite.
  StepEvents step();

 private:
  SimConfig cfg_;
  WorldState world_;
  Population population_;
  std::uint64_t step_ = 0;
  ScriptedPolicy policy_;

  // Scratch reused across steps.
  OccupancyGrid occupancy_;
  std::vector<int> acting_;
  std::vector<Action> actions_;
  std::vector<RecurrentState> next_recurrent_;
  std::vector<int> visible_;
};

Simulation init_simulation(const SimConfig& cfg);

// Places a mutated copy of the parent on the parent's cell in the lowest free
// slot and resets the parent's repr_timer. When the population is full the
// parent keeps its saturated timer and retries next step.
SpawnResult spawn_offspring(int parent_slot, Population& population,
                            const SimConfig& cfg, std::uint64_t step);

class StepObserver {
 public:
  virtual ~StepObserver() = default;
  virtual void on_start(const Simulation&) {}
  virtual void on_step(const Simulation& sim, const StepEvents& events) = 0;
  virtual void on_finish(const Simulation&) {}
};

struct RunOptions {
  std::uint64_t total_steps = 0;  // absolute step index to stop at
  std::uint64_t checkpoint_every = 0;
  std::function<void(const Simulation&)> on_checkpoint;
  std::uint64_t progress_every = 0;
  std::ostream* progress = nullptr;
};

struct RunSummary {
  std::uint64_t final_step = 0;
  std::optional<std::uint64_t> extinct_at;
  std::uint64_t births = 0;
  std::uint64_t deaths = 0;
  std::uint64_t consumed = 0;
  std::uint64_t grown = 0;
};

// Steps until options.total_steps or extinction (recorded, not an error).
// on_checkpoint fires at every multiple of checkpoint_every and once at the
// end.
RunSummary run(Simulation& sim, const RunOptions& options,
               std::span<StepObserver* const> observers = {});

}  // namespace ecoevo
