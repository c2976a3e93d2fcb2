#include "ecoevo/agents.hpp"

#include <algorithm>

namespace ecoevo {

OccupancyGrid::OccupancyGrid(int rows, int cols)
    : rows_(rows),
      cols_(cols),
      counts_(static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols), 0) {}

void OccupancyGrid::clear() noexcept {
  std::fill(counts_.begin(), counts_.end(), std::uint16_t{0});
}

OccupancyGrid OccupancyGrid::from_agents(int rows, int cols,
                                         std::span<const AgentState> agents) {
  OccupancyGrid grid(rows, cols);
  for (const AgentState& a : agents) {
    if (a.alive) grid.add(a.position);
  }
  return grid;
}

Observation observe(Position center, const WorldState& world,
                    const OccupancyGrid& occupancy) {
  Observation obs;
  float* out = obs.data();
  for (int dy = -kViewRadius; dy <= kViewRadius; ++dy) {
    const int r = center.row + dy;
    const bool row_in = r >= 0 && r < world.rows;
    for (int dx = -kViewRadius; dx <= kViewRadius; ++dx, out += kObsChannels) {
      const int c = center.col + dx;
      if (!row_in || c < 0 || c >= world.cols) {
        out[0] = 0.0f;
        out[1] = 0.0f;
        out[2] = 1.0f;
        continue;
      }
      const std::size_t i = world.index(r, c);
      out[0] = static_cast<float>(world.resources[i]);
      out[1] = static_cast<float>(occupancy.at(r, c));
      out[2] = static_cast<float>(world.walls[i]);
    }
  }
  return obs;
}

Observation observe(const AgentState& agent, const WorldState& world,
                    std::span<const AgentState> all_agents) {
  return observe(agent.position, world,
                 OccupancyGrid::from_agents(world.rows, world.cols, all_agents));
}

int visible_resources(const Observation& obs) noexcept {
  int n = 0;
  for (std::size_t i = 0; i < obs.size(); i += kObsChannels) {
    n += obs[i] > 0.0f;
  }
  return n;
}

MoveResult apply_move(Position from, Action action, const WorldState& world,
                      BoundaryMode boundary) {
  Position to = from;
  switch (action) {
    case Action::kStay: return {from, false};
    case Action::kUp: --to.row; break;
    case Action::kDown: ++to.row; break;
    case Action::kLeft: --to.col; break;
    case Action::kRight: ++to.col; break;
  }
  if (!world.in_bounds(to.row, to.col)) {
    if (boundary == BoundaryMode::kBlocked) return {from, false};
    return {from, true};
  }
  if (world.has_wall(to.row, to.col)) return {from, true};
  return {to, false};
}

double step_energy(double energy, bool ate, const PhysiologyConfig& cfg) noexcept {
  return std::min(cfg.max_energy,
                  energy - cfg.decay + (ate ? cfg.eat_gain : 0.0));
}

LifeDecision update_life_timers(AgentState& agent,
                                const PhysiologyConfig& cfg) noexcept {
  if (agent.energy > cfg.min_energy) {
    ++agent.repr_timer;
    agent.death_timer = 0;
  } else {
    ++agent.death_timer;
    agent.repr_timer = 0;
  }
  LifeDecision d;
  d.reproduce = agent.repr_timer >= cfg.time_to_reproduce;
  if (agent.death_timer >= cfg.time_to_die) {
    d.die = true;
    d.cause = DeathCause::kStarvation;
  } else if (agent.age > cfg.max_age) {
    d.die = true;
    d.cause = DeathCause::kAge;
  }
  return d;
}

}  // namespace ecoevo
