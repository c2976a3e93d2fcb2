#pragma once

#include <atomic>
#include <filesystem>
#include <string>
#include <vector>

#include <unistd.h>

#include "ecoevo/engine.hpp"

namespace ecoevo::testing {

// Scratch directory removed on destruction.
class TempDir {
 public:
  TempDir() {
    static std::atomic<int> counter{0};
    path_ = std::filesystem::temp_directory_path() /
            ("ecoevo_test_" + std::to_string(::getpid()) + "_" +
             std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const noexcept { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

// Simulation with agents at `where` (slots in order) and resources exactly at
// `resources`; the random initial placement of cfg is ignored.
inline Simulation hand_built(SimConfig cfg, const std::vector<Position>& where,
                             const std::vector<Position>& resources) {
  cfg.start_population = 0;
  cfg.start_resources = 0;
  WorldState world = make_world(cfg.rows, cfg.cols, cfg.regrowth.alpha);
  for (Position p : resources) world.resources[world.index(p)] = 1;
  Population pop(cfg.max_population);
  for (std::size_t i = 0; i < where.size(); ++i) {
    AgentState& a = pop.slots[i];
    a.alive = true;
    a.id = pop.next_id++;
    a.position = where[i];
    a.energy = cfg.physiology.initial_energy;
  }
  return Simulation(cfg, std::move(world), std::move(pop), 0);
}

// Small grid with regrowth off.
inline SimConfig quiet_config(int rows = 10, int cols = 10) {
  SimConfig cfg;
  cfg.rows = rows;
  cfg.cols = cols;
  cfg.max_population = 8;
  cfg.regrowth.enabled = false;
  return cfg;
}

}  // namespace ecoevo::testing
