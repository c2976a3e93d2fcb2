#include "ecoevo/world.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>
#include <string>

#include "ecoevo/errors.hpp"
#include "ecoevo/rng.hpp"

namespace ecoevo {

std::size_t WorldState::resource_count() const noexcept {
  return static_cast<std::size_t>(
      std::count_if(resources.begin(), resources.end(),
                    [](std::uint8_t v) { return v != 0; }));
}

double climate_value(int row, int rows, double alpha) {
  if (rows < 2) {
    throw ConfigError("grid_rows", "climate gradient needs at least 2 rows");
  }
  if (!(alpha > 0.0)) {
    throw ConfigError("climate_alpha", "must be > 0");
  }
  if (row < 0 || row >= rows) {
    throw std::out_of_range("climate_value: row " + std::to_string(row) +
                            " outside [0, " + std::to_string(rows) + ")");
  }
  // Normalised latitude: 0 on the top row, 1 on the bottom row.
  const double x = static_cast<double>(row) / static_cast<double>(rows - 1);
  return (std::pow(alpha, x) + 1.0) / (alpha + 1.0);
}

WorldState make_world(int rows, int cols, double alpha) {
  if (rows < 2) throw ConfigError("grid_rows", "must be >= 2");
  if (cols < 1) throw ConfigError("grid_cols", "must be >= 1");
  WorldState world;
  world.rows = rows;
  world.cols = cols;
  world.resources.assign(world.cell_count(), 0);
  world.walls.assign(world.cell_count(), 0);
  world.climate.resize(static_cast<std::size_t>(rows));
  for (int r = 0; r < rows; ++r) {
    world.climate[static_cast<std::size_t>(r)] = climate_value(r, rows, alpha);
  }
  return world;
}

int occupied_neighbors(const WorldState& world, int row, int col) noexcept {
  int n = 0;
  if (row > 0) n += world.has_resource(row - 1, col);
  if (row + 1 < world.rows) n += world.has_resource(row + 1, col);
  if (col > 0) n += world.has_resource(row, col - 1);
  if (col + 1 < world.cols) n += world.has_resource(row, col + 1);
  return n;
}

namespace {

double probability_for(int neighbors, double climate,
                       const RegrowthConfig& cfg) noexcept {
  double local = 0.0;
  if (cfg.neighbor_mode == NeighborMode::kProportional) {
    local = cfg.per_neighbor_prob * static_cast<double>(neighbors);
  } else if (neighbors >= 1) {
    local = cfg.per_neighbor_prob;
  }
  return std::clamp(local * climate + cfg.spontaneous_prob, 0.0, 1.0);
}

}  // namespace

double regrowth_probability(Position cell, const WorldState& world,
                            const RegrowthConfig& cfg) {
  if (!world.in_bounds(cell.row, cell.col)) {
    throw std::out_of_range("regrowth_probability: cell out of bounds");
  }
  if (world.has_resource(cell.row, cell.col) ||
      world.has_wall(cell.row, cell.col)) {
    throw std::logic_error(
        "regrowth_probability: cell already holds a resource or a wall");
  }
  return probability_for(occupied_neighbors(world, cell.row, cell.col),
                         world.climate[static_cast<std::size_t>(cell.row)],
                         cfg);
}

std::size_t step_regrowth(WorldState& world, const RegrowthConfig& cfg,
                          std::uint64_t seed, std::uint64_t step) {
  if (!cfg.enabled) return 0;
  const std::uint64_t prefix =
      RngStream::prefix(seed, StreamPurpose::kRegrowth, step);

  // Probabilities for n = 0..4 neighbours, per row.
  std::array<double, 5> table{};
  std::vector<std::size_t> grown;
  const std::uint8_t* res = world.resources.data();
  const std::uint8_t* wall = world.walls.data();
  const auto cols = static_cast<std::size_t>(world.cols);
  for (int r = 0; r < world.rows; ++r) {
    const double climate = world.climate[static_cast<std::size_t>(r)];
    for (int n = 0; n <= 4; ++n) {
      table[static_cast<std::size_t>(n)] = probability_for(n, climate, cfg);
    }
    const std::size_t base = static_cast<std::size_t>(r) * cols;
    const std::uint8_t* row = res + base;
    const std::uint8_t* above = r > 0 ? row - cols : nullptr;
    const std::uint8_t* below = r + 1 < world.rows ? row + cols : nullptr;
    for (std::size_t c = 0; c < cols; ++c) {
      if ((row[c] | wall[base + c]) != 0) continue;
      int n = 0;
      if (above) n += above[c];
      if (below) n += below[c];
      if (c > 0) n += row[c - 1];
      if (c + 1 < cols) n += row[c + 1];
      const double p = table[static_cast<std::size_t>(n)];
      if (p <= 0.0) continue;
      if (RngStream::from_prefix(prefix, base + c).uniform() < p) {
        grown.push_back(base + c);
      }
    }
  }
  // Commit after the read pass so new growth is invisible to this step.
  for (std::size_t i : grown) world.resources[i] = 1;
  return grown.size();
}

}  // namespace ecoevo
