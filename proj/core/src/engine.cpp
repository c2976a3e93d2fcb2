#include "ecoevo/engine.hpp"

#include <algorithm>
#include <ostream>
#include <string>
#include <utility>

#include <tbb/blocked_range.h>
#include <tbb/parallel_for.h>

#include "ecoevo/errors.hpp"

namespace ecoevo {

void SimConfig::validate() const {
  if (rows < 2) throw ConfigError("grid_size", "needs at least 2 rows");
  if (cols < 1) throw ConfigError("grid_size", "needs at least 1 column");
  if (max_population < 1 || max_population > 65535) {
    throw ConfigError("max_population", "must be in [1, 65535]");
  }
  if (start_population < 0 || start_population > max_population) {
    throw ConfigError("starting_population",
                      "must be in [0, max_population]");
  }
  const long long cells = static_cast<long long>(rows) * cols;
  if (start_resources < 0 || start_resources > cells) {
    throw ConfigError("starting_resources", "must be in [0, rows * cols]");
  }
  if (!(sigma >= 0.0)) throw ConfigError("mutation_variance", "must be >= 0");
  if (!(init_weight_std >= 0.0)) {
    throw ConfigError("init_weight_std", "must be >= 0");
  }
  const PhysiologyConfig& p = physiology;
  if (!(p.decay > 0.0)) throw ConfigError("energy_decay", "must be > 0");
  if (!(p.initial_energy <= p.max_energy)) {
    throw ConfigError("starting_energy", "must not exceed max_energy");
  }
  if (p.time_to_reproduce < 1) {
    throw ConfigError("time_to_reproduce", "must be a positive integer");
  }
  if (p.time_to_die < 1) {
    throw ConfigError("time_to_die", "must be a positive integer");
  }
  if (p.max_age < 1) {
    throw ConfigError("maximum_age", "must be a positive integer");
  }
  const RegrowthConfig& g = regrowth;
  if (!(g.per_neighbor_prob >= 0.0 && g.per_neighbor_prob <= 1.0)) {
    throw ConfigError("regrowth_neighbor_prob", "must be in [0, 1]");
  }
  if (!(g.spontaneous_prob >= 0.0 && g.spontaneous_prob <= 1.0)) {
    throw ConfigError("spontaneous_regrowth", "must be in [0, 1]");
  }
  if (!(g.alpha > 0.0)) throw ConfigError("climate_alpha", "must be > 0");
}

int Population::first_free_slot() const noexcept {
  for (std::size_t i = 0; i < slots.size(); ++i) {
    if (!slots[i].alive) return static_cast<int>(i);
  }
  return -1;
}

int Population::count_alive() const noexcept {
  return static_cast<int>(std::count_if(
      slots.begin(), slots.end(), [](const AgentState& a) { return a.alive; }));
}

namespace {

std::vector<std::size_t> free_cells(const WorldState& world) {
  std::vector<std::size_t> cells;
  cells.reserve(world.cell_count());
  for (std::size_t i = 0; i < world.cell_count(); ++i) {
    if (world.walls[i] == 0) cells.push_back(i);
  }
  return cells;
}

AgentState newborn(std::uint64_t id, Position pos, NetworkParams genome,
                   const PhysiologyConfig& physiology) {
  AgentState a;
  a.alive = true;
  a.id = id;
  a.position = pos;
  a.energy = physiology.initial_energy;
  a.genome = std::move(genome);
  return a;
}

}  // namespace

Simulation::Simulation(SimConfig cfg) : cfg_(std::move(cfg)) {
  cfg_.validate();
  world_ = make_world(cfg_.rows, cfg_.cols, cfg_.regrowth.alpha);
  population_ = Population(cfg_.max_population);

  std::vector<std::size_t> cells = free_cells(world_);
  if (static_cast<std::size_t>(cfg_.start_resources) > cells.size()) {
    throw ConfigError("starting_resources", "exceeds the number of free cells");
  }
  // Partial Fisher-Yates: the first start_resources entries are a uniform
  // sample without replacement.
  RngStream placement(cfg_.seed, StreamPurpose::kInitResources, 0, 0);
  for (std::size_t i = 0; i < static_cast<std::size_t>(cfg_.start_resources); ++i) {
    const std::size_t j = i + placement.below(cells.size() - i);
    std::swap(cells[i], cells[j]);
    world_.resources[cells[i]] = 1;
  }

  std::vector<std::size_t> open = free_cells(world_);
  if (cfg_.start_population > 0 && open.empty()) {
    throw ConfigError("grid_size", "no wall-free cell to place agents");
  }
  for (int slot = 0; slot < cfg_.start_population; ++slot) {
    const auto s = static_cast<std::uint64_t>(slot);
    RngStream where(cfg_.seed, StreamPurpose::kInitAgents, 0, s);
    const std::size_t cell = open[where.below(open.size())];
    const Position pos{static_cast<int>(cell / static_cast<std::size_t>(cfg_.cols)),
                       static_cast<int>(cell % static_cast<std::size_t>(cfg_.cols))};
    RngStream weights(cfg_.seed, StreamPurpose::kInitWeights, 0, s);
    population_.slots[static_cast<std::size_t>(slot)] =
        newborn(population_.next_id++, pos,
                NetworkParams::random(weights, cfg_.init_weight_std),
                cfg_.physiology);
  }
  population_.alive_count = cfg_.start_population;
}

Simulation::Simulation(SimConfig cfg, WorldState world, Population population,
                       std::uint64_t step)
    : cfg_(std::move(cfg)),
      world_(std::move(world)),
      population_(std::move(population)),
      step_(step) {
  cfg_.validate();
  if (world_.rows != cfg_.rows || world_.cols != cfg_.cols) {
    throw ConfigError("grid_size", "world shape does not match configuration");
  }
  if (population_.capacity() != cfg_.max_population) {
    throw ConfigError("max_population",
                      "population capacity does not match configuration");
  }
  population_.alive_count = population_.count_alive();
}

Simulation init_simulation(const SimConfig& cfg) { return Simulation(cfg); }

SpawnResult spawn_offspring(int parent_slot, Population& population,
                            const SimConfig& cfg, std::uint64_t step) {
  AgentState& parent = population.slots.at(static_cast<std::size_t>(parent_slot));
  const int slot = population.first_free_slot();
  if (slot < 0) return {SpawnOutcome::kDeferred, -1};

  RngStream noise(cfg.seed, StreamPurpose::kMutation, step,
                  static_cast<std::uint64_t>(parent_slot));
  population.slots[static_cast<std::size_t>(slot)] =
      newborn(population.next_id++, parent.position,
              mutate(parent.genome, cfg.sigma, noise), cfg.physiology);
  ++population.alive_count;
  parent.repr_timer = 0;
  return {SpawnOutcome::kSpawned, slot};
}

StepEvents Simulation::step() {
  StepEvents ev;
  ev.step = step_;
  auto& slots = population_.slots;
  const std::size_t capacity = slots.size();

  if (occupancy_.rows() != world_.rows || occupancy_.cols() != world_.cols) {
    occupancy_ = OccupancyGrid(world_.rows, world_.cols);
  } else {
    occupancy_.clear();
  }
  acting_.clear();
  for (std::size_t s = 0; s < capacity; ++s) {
    if (!slots[s].alive) continue;
    acting_.push_back(static_cast<int>(s));
    occupancy_.add(slots[s].position);
  }
  const std::size_t n = acting_.size();
  actions_.resize(n);
  next_recurrent_.resize(n);
  visible_.resize(n);

  // Read phase: every decision sees the same start-of-step snapshot.
  const std::uint64_t action_prefix =
      RngStream::prefix(cfg_.seed, StreamPurpose::kAction, step_);
  tbb::parallel_for(tbb::blocked_range<std::size_t>(0, n, 16),
                    [&](const tbb::blocked_range<std::size_t>& range) {
    for (std::size_t k = range.begin(); k != range.end(); ++k) {
      const auto slot = static_cast<std::size_t>(acting_[k]);
      const AgentState& agent = slots[slot];
      const Observation obs = observe(agent.position, world_, occupancy_);
      visible_[k] = visible_resources(obs);
      RngStream rng = RngStream::from_prefix(action_prefix, slot);
      if (policy_) {
        actions_[k] = policy_(PolicyContext{obs, agent, rng});
        next_recurrent_[k] = agent.recurrent;
      } else {
        const ForwardResult out = forward(agent.genome, obs, agent.prev_action,
                                          agent.ate, agent.recurrent);
        actions_[k] = static_cast<Action>(sample_action(out.probs, rng));
        next_recurrent_[k] = out.state;
      }
    }
  });

  // Commit phase, in slot order.
  ev.agents.resize(n);
  std::vector<int> killed;
  for (std::size_t k = 0; k < n; ++k) {
    const auto slot = static_cast<std::size_t>(acting_[k]);
    AgentState& agent = slots[slot];
    agent.recurrent = next_recurrent_[k];
    agent.prev_action = static_cast<int>(actions_[k]);
    agent.ate = false;
    ev.agents[k] = {acting_[k], agent.id, visible_[k], false};
    const MoveResult move =
        apply_move(agent.position, actions_[k], world_, cfg_.boundary_mode);
    agent.position = move.position;
    if (move.killed_by_wall) killed.push_back(static_cast<int>(k));
  }
  for (int k : killed) {
    AgentState& agent = slots[static_cast<std::size_t>(acting_[static_cast<std::size_t>(k)])];
    agent.alive = false;
    ++ev.deaths_wall;
    ev.death_ages.push_back(agent.age);
  }

  // Consumption: one winner per resource cell, uniform among occupants.
  std::vector<std::pair<std::size_t, std::size_t>> claims;  // (cell, k)
  for (std::size_t k = 0; k < n; ++k) {
    const AgentState& agent = slots[static_cast<std::size_t>(acting_[k])];
    if (!agent.alive) continue;
    const std::size_t cell = world_.index(agent.position);
    if (world_.resources[cell] != 0) claims.emplace_back(cell, k);
  }
  std::stable_sort(claims.begin(), claims.end(),
                   [](const auto& a, const auto& b) { return a.first < b.first; });
  for (std::size_t i = 0; i < claims.size();) {
    std::size_t j = i;
    while (j < claims.size() && claims[j].first == claims[i].first) ++j;
    const std::size_t cell = claims[i].first;
    std::size_t winner = i;
    if (j - i > 1) {
      RngStream rng(cfg_.seed, StreamPurpose::kConsume, step_, cell);
      winner = i + static_cast<std::size_t>(rng.below(j - i));
    }
    const std::size_t k = claims[winner].second;
    slots[static_cast<std::size_t>(acting_[k])].ate = true;
    ev.agents[k].ate = true;
    world_.resources[cell] = 0;
    ++ev.consumed;
    i = j;
  }

  // Physiology and life timers.
  std::vector<int> parents;
  for (std::size_t k = 0; k < n; ++k) {
    AgentState& agent = slots[static_cast<std::size_t>(acting_[k])];
    if (!agent.alive) continue;
    ++agent.age;
    agent.energy = step_energy(agent.energy, agent.ate, cfg_.physiology);
    const LifeDecision d = update_life_timers(agent, cfg_.physiology);
    if (d.die) {
      agent.alive = false;
      ev.death_ages.push_back(agent.age);
      if (d.cause == DeathCause::kStarvation) {
        ++ev.deaths_starvation;
      } else {
        ++ev.deaths_age;
      }
    } else if (d.reproduce && cfg_.reproduction_enabled) {
      parents.push_back(acting_[k]);
    }
  }
  ev.deaths = ev.deaths_wall + ev.deaths_starvation + ev.deaths_age;
  population_.alive_count -= ev.deaths;

  for (int parent : parents) {
    const SpawnResult r = spawn_offspring(parent, population_, cfg_, step_);
    if (r.outcome == SpawnOutcome::kSpawned) {
      ++ev.births;
    } else {
      ++ev.deferred_spawns;
    }
  }

  ev.grown = step_regrowth(world_, cfg_.regrowth, cfg_.seed, step_);
  ++step_;
  return ev;
}

RunSummary run(Simulation& sim, const RunOptions& options,
               std::span<StepObserver* const> observers) {
  RunSummary summary;
  for (StepObserver* o : observers) o->on_start(sim);

  std::uint64_t last_checkpoint = ~std::uint64_t{0};
  auto checkpoint = [&] {
    if (options.on_checkpoint && last_checkpoint != sim.current_step()) {
      options.on_checkpoint(sim);
      last_checkpoint = sim.current_step();
    }
  };
  if (options.checkpoint_every > 0 &&
      sim.current_step() % options.checkpoint_every == 0 &&
      sim.current_step() < options.total_steps) {
    checkpoint();
  }

  while (sim.current_step() < options.total_steps) {
    if (sim.population().alive_count == 0) {
      summary.extinct_at = sim.current_step();
      break;
    }
    const StepEvents ev = sim.step();
    summary.births += static_cast<std::uint64_t>(ev.births);
    summary.deaths += static_cast<std::uint64_t>(ev.deaths);
    summary.consumed += ev.consumed;
    summary.grown += ev.grown;
    for (StepObserver* o : observers) o->on_step(sim, ev);

    const std::uint64_t t = sim.current_step();
    if (options.checkpoint_every > 0 && t % options.checkpoint_every == 0) {
      checkpoint();
    }
    if (options.progress && options.progress_every > 0 &&
        t % options.progress_every == 0) {
      *options.progress << "step " << t << " population "
                        << sim.population().alive_count << " resources "
                        << sim.world().resource_count() << '\n';
    }
  }
  if (!summary.extinct_at && sim.population().alive_count == 0) {
    summary.extinct_at = sim.current_step();
  }
  summary.final_step = sim.current_step();
  checkpoint();
  for (StepObserver* o : observers) o->on_finish(sim);
  return summary;
}

}  // namespace ecoevo
