#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ecoevo/engine.hpp"
#include "ecoevo/metrics.hpp"
#include "ecoevo/stats.hpp"

namespace ecoevo::lab {

enum class Density : std::uint8_t { kLow = 0, kMedium = 1, kHigh = 2 };
inline constexpr std::array<Density, 3> kAllDensities = {
    Density::kLow, Density::kMedium, Density::kHigh};
const char* to_string(Density d) noexcept;

struct LabConfig {
  int rows = 40;
  int cols = 40;
  std::array<double, 3> density_fractions = {0.05, 0.15, 0.30};
  bool regrowth_enabled = false;
  int trial_length = 1000;
  int trials = 10;
  int genomes = 50;
  int reproduction_time = 20;  // replaces time_to_reproduce when reproducing
  int max_population = 1000;
  double offspring_sigma = 0.0;
  bool abort_on_cap = false;
  std::uint64_t seed = 0;
  PhysiologyConfig physiology;
  RegrowthConfig regrowth;

  // Throws ConfigError.
  void validate() const;
};

struct TrialResult {
  std::optional<double> greediness;
  GreedinessCounts counts;
  int focal_consumed = 0;
  int total_consumed = 0;
  int agents_existed = 1;
  int births = 0;
  int steps_run = 0;
  std::optional<int> focal_death_step;
  std::size_t resources_start = 0;
  std::size_t resources_end = 0;
  bool saturated = false;  // a spawn was deferred at the slot cap
  bool aborted = false;    // saturated with abort_on_cap set

  double efficiency(bool reproduction) const noexcept;
};

// Seed of one (genome, density, trial) cell of an experiment. Both
// reproduction arms share it.
std::uint64_t trial_seed(std::uint64_t experiment_seed, std::size_t genome,
                         Density density, int trial) noexcept;

// Fresh lab world (resources placed uniformly, none on the centre cell) with a
// single focal agent at the centre carrying `genome` and a zeroed memory.
Simulation make_lab_simulation(const NetworkParams& genome,
                               const LabConfig& cfg, Density density,
                               bool reproduction, std::uint64_t seed);

// Runs one trial. `policy`, when set, replaces the network for every agent.
TrialResult run_trial(const NetworkParams& genome, const LabConfig& cfg,
                      Density density, bool reproduction, std::uint64_t seed,
                      const ScriptedPolicy& policy = {});

enum class Phenotype : std::uint8_t {
  kSustainableForager,
  kOpportunisticTraveler,  // no significant density effect
  kOther,
  kExcluded,
};
const char* to_string(Phenotype p) noexcept;

struct TrialRecord {
  std::size_t genome = 0;
  Density density = Density::kLow;
  int trial = 0;
  bool reproduction = false;
  TrialResult result;
};

struct AgentGreediness {
  std::size_t genome = 0;
  // Defined greediness values per density, trimmed to a balanced design.
  std::array<stats::Sample, 3> greediness;
  std::optional<stats::AnovaResult> anova;
  std::optional<stats::TukeyResult> tukey;
  Phenotype phenotype = Phenotype::kExcluded;
  std::string note;
};

// Classifies one agent from its per-density greediness samples.
AgentGreediness classify(std::size_t genome,
                         const std::array<stats::Sample, 3>& greediness);

struct GreedinessReport {
  std::vector<TrialRecord> trials;  // (genome, density, trial) order
  std::vector<AgentGreediness> agents;
  int count(Phenotype p) const noexcept;
};

GreedinessReport run_greediness_experiment(std::span<const NetworkParams> genomes,
                                           const LabConfig& cfg,
                                           const ScriptedPolicy& policy = {});

struct PressureArm {
  Density density = Density::kHigh;
  std::vector<double> efficiency_off;  // per genome, mean over trials
  std::vector<double> efficiency_on;
  double mean_off = 0.0;
  double mean_on = 0.0;
  std::optional<stats::PairedTTestResult> test;  // on minus off
  int aborted_trials = 0;
  int saturated_trials = 0;
  bool on_exceeds_off() const noexcept { return mean_on > mean_off; }
};

struct PressureReport {
  std::vector<TrialRecord> trials;
  std::vector<PressureArm> arms;  // one per density, in the requested order
  const PressureArm* arm(Density d) const noexcept;
};

PressureReport run_pressure_experiment(std::span<const NetworkParams> genomes,
                                       const LabConfig& cfg,
                                       std::span<const Density> densities = kAllDensities,
                                       const ScriptedPolicy& policy = {});

// Up to n genomes drawn uniformly without replacement from live agents.
std::vector<NetworkParams> sample_genomes(const Population& population,
                                          std::size_t n, std::uint64_t seed);

std::string render_report(const GreedinessReport& report);
std::string render_report(const PressureReport& report);
void export_trials(std::span<const TrialRecord> trials,
                   const std::string& path);

// Scripted reference policies.
namespace policies {
// Heads for the nearest visible resource; random walk when none is visible.
ScriptedPolicy greedy_forager();
// Greedy while fewer than `threshold` resources are visible, otherwise
// holds still on its (empty) cell.
ScriptedPolicy threshold_forager(int threshold);
// Never moves.
ScriptedPolicy stay();
}  // namespace policies

}  // namespace ecoevo::lab
