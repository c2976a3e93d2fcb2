#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

namespace ecoevo {

struct Position {
  int row = 0;
  int col = 0;
  friend bool operator==(const Position&, const Position&) = default;
};

enum class NeighborMode : std::uint8_t {
  kProportional = 0,  // per_neighbor_prob * (number of occupied neighbours)
  kIndicator = 1,     // per_neighbor_prob * [at least one occupied neighbour]
};

struct RegrowthConfig {
  double per_neighbor_prob = 0.002;
  double spontaneous_prob = 0.00005;
  double alpha = 200.0;
  NeighborMode neighbor_mode = NeighborMode::kProportional;
  bool enabled = true;
  friend bool operator==(const RegrowthConfig&, const RegrowthConfig&) = default;
};

// Grid layers plus the per-row climate factor. Row 0 is the top of the map.
struct WorldState {
  int rows = 0;
  int cols = 0;
  std::vector<std::uint8_t> resources;  // 1 = one resource present
  std::vector<std::uint8_t> walls;
  std::vector<double> climate;          // one value per row

  std::size_t index(int row, int col) const noexcept {
    return static_cast<std::size_t>(row) * static_cast<std::size_t>(cols) +
           static_cast<std::size_t>(col);
  }
  std::size_t index(Position p) const noexcept { return index(p.row, p.col); }
  std::size_t cell_count() const noexcept {
    return static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols);
  }
  bool in_bounds(int row, int col) const noexcept {
    return row >= 0 && row < rows && col >= 0 && col < cols;
  }
  bool has_resource(int row, int col) const noexcept {
    return resources[index(row, col)] != 0;
  }
  bool has_wall(int row, int col) const noexcept {
    return walls[index(row, col)] != 0;
  }

  // Full popcount of the resource layer.
  std::size_t resource_count() const noexcept;
};

// Climate of a row: (alpha^x + 1) / (alpha + 1) with x = 1 on the bottom row
// and x = 0 on the top row. Throws ConfigError when rows < 2 or alpha <= 0,
// std::out_of_range when row is outside [0, rows).
double climate_value(int row, int rows, double alpha);

// Empty world with the climate gradient filled in.
WorldState make_world(int rows, int cols, double alpha);

// Occupied direct (von Neumann) neighbours of a cell.
int occupied_neighbors(const WorldState& world, int row, int col) noexcept;

// Probability that an empty, wall-free cell grows a resource this step.
// Throws std::logic_error on an occupied or wall cell.
double regrowth_probability(Position cell, const WorldState& world,
                            const RegrowthConfig& cfg);

// Samples regrowth for every empty, wall-free cell against the world as it
// is on entry; resources grown in this call do not count as neighbours until
// the next call. Randomness comes from per-cell substreams keyed by
// (seed, step, cell), so the result does not depend on evaluation order.
// Returns the number of resources grown.
std::size_t step_regrowth(WorldState& world, const RegrowthConfig& cfg,
                          std::uint64_t seed, std::uint64_t step);

}  // namespace ecoevo
