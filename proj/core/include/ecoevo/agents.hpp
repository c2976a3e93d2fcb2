#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "ecoevo/neural.hpp"
#include "ecoevo/world.hpp"

namespace ecoevo {

enum class Action : std::uint8_t { kStay = 0, kUp, kDown, kLeft, kRight };

enum class BoundaryMode : std::uint8_t {
  kLethal = 0,   // stepping off the grid kills like a wall
  kBlocked = 1,  // stepping off the grid is a no-op
};

enum class DeathCause : std::uint8_t { kNone = 0, kStarvation, kWall, kAge };

struct PhysiologyConfig {
  double initial_energy = 3.0;
  double max_energy = 3.0;
  double min_energy = 0.0;  // one threshold for both timers
  double decay = 0.025;
  double eat_gain = 1.0;
  int time_to_reproduce = 140;
  int time_to_die = 200;
  int max_age = 650;
  friend bool operator==(const PhysiologyConfig&, const PhysiologyConfig&) = default;
};

struct AgentState {
  bool alive = false;
  std::uint64_t id = 0;
  Position position;
  double energy = 0.0;
  int age = 0;
  int repr_timer = 0;
  int death_timer = 0;
  RecurrentState recurrent;
  int prev_action = -1;  // -1 until the first action
  bool ate = false;
  NetworkParams genome;
};

// Number of live agents per cell.
class OccupancyGrid {
 public:
  OccupancyGrid() = default;
  OccupancyGrid(int rows, int cols);

  void clear() noexcept;
  void add(Position p) noexcept { ++counts_[index(p)]; }
  std::uint16_t at(int row, int col) const noexcept {
    return counts_[static_cast<std::size_t>(row) * static_cast<std::size_t>(cols_) +
                   static_cast<std::size_t>(col)];
  }
  int rows() const noexcept { return rows_; }
  int cols() const noexcept { return cols_; }

  static OccupancyGrid from_agents(int rows, int cols,
                                   std::span<const AgentState> agents);

 private:
  std::size_t index(Position p) const noexcept {
    return static_cast<std::size_t>(p.row) * static_cast<std::size_t>(cols_) +
           static_cast<std::size_t>(p.col);
  }
  int rows_ = 0;
  int cols_ = 0;
  std::vector<std::uint16_t> counts_;
};

// 15x15x3 view centred on `center`: channel 0 resource presence, channel 1
// agent count (the observer included), channel 2 walls. Cells off the grid
// read as wall=1, resource=0, agents=0.
Observation observe(Position center, const WorldState& world,
                    const OccupancyGrid& occupancy);

// Convenience overload that builds the occupancy grid from a population.
Observation observe(const AgentState& agent, const WorldState& world,
                    std::span<const AgentState> all_agents);

// Resource cells within the observation window.
int visible_resources(const Observation& obs) noexcept;

struct MoveResult {
  Position position;
  bool killed_by_wall = false;
};

// Row 0 is the top row: "up" decrements the row.
MoveResult apply_move(Position from, Action action, const WorldState& world,
                      BoundaryMode boundary);

// min(max_energy, energy - decay + ate * eat_gain). Not floored.
double step_energy(double energy, bool ate, const PhysiologyConfig& cfg) noexcept;

struct LifeDecision {
  bool reproduce = false;
  bool die = false;
  DeathCause cause = DeathCause::kNone;
};

// Advances repr_timer / death_timer from the already-updated energy and
// reports whether the agent may reproduce or must die. Energy strictly above
// min_energy feeds repr_timer; energy at or below feeds death_timer. The
// caller resets repr_timer after a successful spawn.
LifeDecision update_life_timers(AgentState& agent, const PhysiologyConfig& cfg) noexcept;

}  // namespace ecoevo
