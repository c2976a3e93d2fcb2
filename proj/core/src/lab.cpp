#include "ecoevo/lab.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <tbb/parallel_for.h>

#include "ecoevo/errors.hpp"

namespace ecoevo::lab {

const char* to_string(Density d) noexcept {
  switch (d) {
    case Density::kLow: return "low";
    case Density::kMedium: return "medium";
    case Density::kHigh: return "high";
  }
  return "?";
}

const char* to_string(Phenotype p) noexcept {
  switch (p) {
    case Phenotype::kSustainableForager: return "sustainable_forager";
    case Phenotype::kOpportunisticTraveler: return "opportunistic_traveler";
    case Phenotype::kOther: return "other";
    case Phenotype::kExcluded: return "excluded";
  }
  return "?";
}

void LabConfig::validate() const {
  if (rows < 2 || cols < 1) throw ConfigError("lab_grid", "grid too small");
  for (double f : density_fractions) {
    if (!(f > 0.0 && f <= 1.0)) {
      throw ConfigError("lab_density", "fractions must be in (0, 1]");
    }
  }
  if (trial_length <= 0 || trial_length % kGreedinessWindow != 0) {
    throw ConfigError("trial_length",
                      "must be a positive multiple of the 20-step window");
  }
  if (trials < 1) throw ConfigError("trials", "must be >= 1");
  if (reproduction_time < 1) throw ConfigError("reproduction_time", "must be >= 1");
  if (max_population < 1 || max_population > 65535) {
    throw ConfigError("lab_max_population", "must be in [1, 65535]");
  }
  if (!(offspring_sigma >= 0.0)) throw ConfigError("offspring_sigma", "must be >= 0");
}

double TrialResult::efficiency(bool reproduction) const noexcept {
  if (!reproduction) return focal_consumed;
  return static_cast<double>(total_consumed) / agents_existed;
}

std::uint64_t trial_seed(std::uint64_t experiment_seed, std::size_t genome,
                         Density density, int trial) noexcept {
  RngStream rng(experiment_seed, StreamPurpose::kLabTrial,
                static_cast<std::uint64_t>(genome),
                static_cast<std::uint64_t>(density) * 1'000'003ULL +
                    static_cast<std::uint64_t>(trial));
  return rng.next_u64();
}

Simulation make_lab_simulation(const NetworkParams& genome,
                               const LabConfig& cfg, Density density,
                               bool reproduction, std::uint64_t seed) {
  cfg.validate();
  SimConfig sim;
  sim.rows = cfg.rows;
  sim.cols = cfg.cols;
  sim.max_population = reproduction ? cfg.max_population : 1;
  sim.start_population = 0;
  sim.start_resources = 0;
  sim.total_steps = static_cast<std::uint64_t>(cfg.trial_length);
  sim.sigma = cfg.offspring_sigma;
  sim.seed = seed;
  sim.physiology = cfg.physiology;
  if (reproduction) sim.physiology.time_to_reproduce = cfg.reproduction_time;
  sim.regrowth = cfg.regrowth;
  sim.regrowth.enabled = cfg.regrowth_enabled;
  sim.boundary_mode = BoundaryMode::kBlocked;
  sim.reproduction_enabled = reproduction;

  WorldState world = make_world(cfg.rows, cfg.cols, sim.regrowth.alpha);
  const Position center{cfg.rows / 2, cfg.cols / 2};
  std::vector<std::size_t> cells;
  for (std::size_t i = 0; i < world.cell_count(); ++i) {
    if (i != world.index(center)) cells.push_back(i);
  }
  const auto wanted = static_cast<std::size_t>(std::llround(
      cfg.density_fractions[static_cast<std::size_t>(density)] *
      static_cast<double>(world.cell_count())));
  const std::size_t n = std::min(wanted, cells.size());
  RngStream placement(seed, StreamPurpose::kInitResources, 0, 0);
  for (std::size_t i = 0; i < n; ++i) {
    std::swap(cells[i], cells[i + placement.below(cells.size() - i)]);
    world.resources[cells[i]] = 1;
  }

  Population pop(sim.max_population);
  AgentState& focal = pop.slots[0];
  focal.alive = true;
  focal.id = pop.next_id++;
  focal.position = center;
  focal.energy = sim.physiology.initial_energy;
  focal.genome = genome;
  return Simulation(std::move(sim), std::move(world), std::move(pop), 0);
}

TrialResult run_trial(const NetworkParams& genome, const LabConfig& cfg,
                      Density density, bool reproduction, std::uint64_t seed,
                      const ScriptedPolicy& policy) {
  Simulation sim = make_lab_simulation(genome, cfg, density, reproduction, seed);
  if (policy) sim.set_policy(policy);
  const std::uint64_t focal_id = sim.population().slots[0].id;

  TrialResult r;
  r.resources_start = sim.world().resource_count();
  std::vector<GreedinessRecord> trace;
  trace.reserve(static_cast<std::size_t>(cfg.trial_length));
  bool focal_alive = true;
  for (int t = 0; t < cfg.trial_length; ++t) {
    if (sim.population().alive_count == 0) break;
    const StepEvents ev = sim.step();
    ++r.steps_run;
    r.total_consumed += static_cast<int>(ev.consumed);
    r.births += ev.births;
    if (ev.deferred_spawns > 0) r.saturated = true;
    if (focal_alive) {
      const auto it = std::find_if(ev.agents.begin(), ev.agents.end(),
                                   [&](const AgentStepRecord& a) { return a.id == focal_id; });
      if (it != ev.agents.end()) {
        trace.push_back({it->visible_resources > 0, it->ate ? 1 : 0});
        r.focal_consumed += it->ate ? 1 : 0;
      }
      if (!sim.population().slots[0].alive || sim.population().slots[0].id != focal_id) {
        focal_alive = false;
        r.focal_death_step = t;
      }
    }
    if (r.saturated && cfg.abort_on_cap) {
      r.aborted = true;
      break;
    }
  }
  r.agents_existed = 1 + r.births;
  r.counts = greediness_counts(trace);
  r.greediness = greediness(trace);
  r.resources_end = sim.world().resource_count();
  return r;
}

int GreedinessReport::count(Phenotype p) const noexcept {
  return static_cast<int>(std::count_if(agents.begin(), agents.end(),
                                        [p](const AgentGreediness& a) { return a.phenotype == p; }));
}

AgentGreediness classify(std::size_t genome,
                         const std::array<stats::Sample, 3>& greediness) {
  AgentGreediness a;
  a.genome = genome;
  a.greediness = greediness;
  std::size_t n = greediness[0].size();
  for (std::size_t d = 0; d < 3; ++d) {
    if (greediness[d].size() < 2) {
      a.phenotype = Phenotype::kExcluded;
      a.note = std::string("fewer than 2 trials with defined greediness in the ") +
               to_string(static_cast<Density>(d)) + " condition";
      return a;
    }
    n = std::min(n, greediness[d].size());
  }
  bool trimmed = false;
  for (auto& g : a.greediness) {
    if (g.size() > n) {
      g.resize(n);
      trimmed = true;
    }
  }
  if (trimmed) a.note = "groups trimmed to " + std::to_string(n) + " trials";

  a.anova = stats::one_way_anova(a.greediness);
  a.tukey = stats::tukey_hsd(a.greediness);
  if (!a.anova->significant()) {
    a.phenotype = Phenotype::kOpportunisticTraveler;
    return a;
  }
  const stats::TukeyPair* low_high = a.tukey->find(0, 2);
  if (low_high && low_high->significant && low_high->mean_difference > 0.0) {
    a.phenotype = Phenotype::kSustainableForager;
  } else {
    a.phenotype = Phenotype::kOther;
  }
  return a;
}

namespace {

std::vector<TrialRecord> run_all(std::vector<TrialRecord> records,
                                 std::span<const NetworkParams> genomes,
                                 const LabConfig& cfg,
                                 const ScriptedPolicy& policy) {
  tbb::parallel_for(std::size_t{0}, records.size(), [&](std::size_t i) {
    TrialRecord& rec = records[i];
    rec.result = run_trial(genomes[rec.genome], cfg, rec.density, rec.reproduction,
                           trial_seed(cfg.seed, rec.genome, rec.density, rec.trial),
                           policy);
  });
  return records;
}

}  // namespace

GreedinessReport run_greediness_experiment(std::span<const NetworkParams> genomes,
                                           const LabConfig& cfg,
                                           const ScriptedPolicy& policy) {
  cfg.validate();
  std::vector<TrialRecord> plan;
  for (std::size_t g = 0; g < genomes.size(); ++g) {
    for (Density d : kAllDensities) {
      for (int t = 0; t < cfg.trials; ++t) plan.push_back({g, d, t, false, {}});
    }
  }
  GreedinessReport report;
  report.trials = run_all(std::move(plan), genomes, cfg, policy);
  for (std::size_t g = 0; g < genomes.size(); ++g) {
    std::array<stats::Sample, 3> samples;
    for (const TrialRecord& rec : report.trials) {
      if (rec.genome != g || !rec.result.greediness) continue;
      samples[static_cast<std::size_t>(rec.density)].push_back(*rec.result.greediness);
    }
    report.agents.push_back(classify(g, samples));
  }
  return report;
}

const PressureArm* PressureReport::arm(Density d) const noexcept {
  for (const PressureArm& a : arms) {
    if (a.density == d) return &a;
  }
  return nullptr;
}

PressureReport run_pressure_experiment(std::span<const NetworkParams> genomes,
                                       const LabConfig& cfg,
                                       std::span<const Density> densities,
                                       const ScriptedPolicy& policy) {
  cfg.validate();
  std::vector<TrialRecord> plan;
  for (std::size_t g = 0; g < genomes.size(); ++g) {
    for (Density d : densities) {
      for (int t = 0; t < cfg.trials; ++t) {
        plan.push_back({g, d, t, false, {}});
        plan.push_back({g, d, t, true, {}});
      }
    }
  }
  PressureReport report;
  report.trials = run_all(std::move(plan), genomes, cfg, policy);

  for (Density d : densities) {
    PressureArm arm;
    arm.density = d;
    for (std::size_t g = 0; g < genomes.size(); ++g) {
      std::vector<double> off;
      std::vector<TrialConsumption> on;
      for (const TrialRecord& rec : report.trials) {
        if (rec.genome != g || rec.density != d) continue;
        if (rec.result.aborted) {
          ++arm.aborted_trials;
          continue;
        }
        if (rec.result.saturated) ++arm.saturated_trials;
        if (rec.reproduction) {
          on.push_back({static_cast<double>(rec.result.total_consumed),
                        rec.result.agents_existed});
        } else {
          off.push_back(static_cast<double>(rec.result.focal_consumed));
        }
      }
      if (off.empty() || on.empty()) continue;
      arm.efficiency_off.push_back(efficiency(off));
      arm.efficiency_on.push_back(efficiency_per_capita(on));
    }
    if (!arm.efficiency_off.empty()) {
      arm.mean_off = stats::mean(arm.efficiency_off);
      arm.mean_on = stats::mean(arm.efficiency_on);
    }
    if (arm.efficiency_off.size() >= 2) {
      arm.test = stats::paired_t_test(arm.efficiency_on, arm.efficiency_off);
    }
    report.arms.push_back(std::move(arm));
  }
  return report;
}

std::vector<NetworkParams> sample_genomes(const Population& population,
                                          std::size_t n, std::uint64_t seed) {
  std::vector<std::size_t> alive;
  for (std::size_t s = 0; s < population.slots.size(); ++s) {
    if (population.slots[s].alive) alive.push_back(s);
  }
  n = std::min(n, alive.size());
  RngStream rng(seed, StreamPurpose::kGenomeSampling, 0, 0);
  std::vector<NetworkParams> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::swap(alive[i], alive[i + rng.below(alive.size() - i)]);
    out.push_back(population.slots[alive[i]].genome);
  }
  return out;
}

namespace {

std::string fmt(double v, int precision = 4) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  std::ostringstream s;
  s.imbue(std::locale::classic());
  s.precision(precision);
  s << std::fixed << v;
  return s.str();
}

}  // namespace

std::string render_report(const GreedinessReport& report) {
  std::ostringstream out;
  out.imbue(std::locale::classic());
  out << "# Greediness across resource densities\n\n";
  out << "trials: " << report.trials.size() << "\n";
  out << "sustainable_forager: " << report.count(Phenotype::kSustainableForager) << "\n";
  out << "opportunistic_traveler: " << report.count(Phenotype::kOpportunisticTraveler) << "\n";
  out << "other: " << report.count(Phenotype::kOther) << "\n";
  out << "excluded: " << report.count(Phenotype::kExcluded) << "\n\n";
  for (const AgentGreediness& a : report.agents) {
    out << "## genome " << a.genome << ": " << to_string(a.phenotype) << "\n";
    if (!a.note.empty()) out << "note: " << a.note << "\n";
    for (std::size_t d = 0; d < 3; ++d) {
      out << "  " << to_string(static_cast<Density>(d)) << ": n=" << a.greediness[d].size();
      if (!a.greediness[d].empty()) out << " mean G=" << fmt(stats::mean(a.greediness[d]));
      out << "\n";
    }
    if (a.anova) {
      out << "  ANOVA: F(" << a.anova->df_between << "," << a.anova->df_within
          << ")=" << fmt(a.anova->f_statistic) << " p=" << fmt(a.anova->p_value) << "\n";
    }
    if (a.tukey) {
      out << "  Tukey (q_crit=" << fmt(a.tukey->q_critical) << "):\n";
      for (const stats::TukeyPair& p : a.tukey->pairs) {
        out << "    " << to_string(static_cast<Density>(p.group_i)) << " vs "
            << to_string(static_cast<Density>(p.group_j))
            << ": diff=" << fmt(p.mean_difference) << " q=" << fmt(p.q)
            << (p.significant ? " significant" : " n.s.") << "\n";
      }
    }
    out << "\n";
  }
  return out.str();
}

std::string render_report(const PressureReport& report) {
  std::ostringstream out;
  out.imbue(std::locale::classic());
  out << "# Efficiency with reproduction off vs on\n\n";
  out << "trials: " << report.trials.size() << "\n\n";
  for (const PressureArm& arm : report.arms) {
    out << "## density " << to_string(arm.density) << "\n";
    out << "  genomes: " << arm.efficiency_off.size() << "\n";
    out << "  reproduction off: mean efficiency " << fmt(arm.mean_off) << "\n";
    out << "  reproduction on:  mean efficiency " << fmt(arm.mean_on) << "\n";
    out << "  direction: " << (arm.on_exceeds_off() ? "on > off" : "on <= off") << "\n";
    if (arm.test) {
      out << "  paired t-test (on - off): diff=" << fmt(arm.test->mean_difference)
          << " t(" << arm.test->df << ")=" << fmt(arm.test->t_statistic)
          << " p=" << fmt(arm.test->p_value)
          << (arm.test->significant() ? " significant" : " n.s.") << "\n";
    }
    out << "  saturated trials: " << arm.saturated_trials
        << ", aborted trials: " << arm.aborted_trials << "\n\n";
  }
  return out.str();
}

void export_trials(std::span<const TrialRecord> trials, const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  out.imbue(std::locale::classic());
  out << "genome,density,trial,reproduction,greediness,visible_windows,"
         "consuming_windows,focal_consumed,total_consumed,agents_existed,"
         "births,steps_run,saturated,aborted\n";
  for (const TrialRecord& t : trials) {
    const TrialResult& r = t.result;
    out << t.genome << ',' << to_string(t.density) << ',' << t.trial << ','
        << (t.reproduction ? 1 : 0) << ',';
    if (r.greediness) out << fmt(*r.greediness, 6);
    out << ',' << r.counts.visible_windows << ',' << r.counts.consuming_windows << ','
        << r.focal_consumed << ',' << r.total_consumed << ',' << r.agents_existed << ','
        << r.births << ',' << r.steps_run << ',' << (r.saturated ? 1 : 0) << ','
        << (r.aborted ? 1 : 0) << '\n';
  }
  out.flush();
  if (!out) throw std::runtime_error("write failed: " + path);
}

namespace policies {

namespace {

// Step that reduces the Manhattan distance to the nearest visible resource,
// or nullopt when none is visible.
std::optional<Action> toward_nearest(const Observation& obs) {
  int best = -1;
  int best_dist = 1 << 30;
  for (int r = 0; r < kViewSize; ++r) {
    for (int c = 0; c < kViewSize; ++c) {
      if (obs[static_cast<std::size_t>((r * kViewSize + c) * kObsChannels)] <= 0.0f) continue;
      const int d = std::abs(r - kViewRadius) + std::abs(c - kViewRadius);
      if (d < best_dist) {
        best_dist = d;
        best = r * kViewSize + c;
      }
    }
  }
  if (best < 0) return std::nullopt;
  const int dr = best / kViewSize - kViewRadius;
  const int dc = best % kViewSize - kViewRadius;
  if (dr < 0) return Action::kUp;
  if (dr > 0) return Action::kDown;
  if (dc < 0) return Action::kLeft;
  if (dc > 0) return Action::kRight;
  return Action::kStay;
}

Action random_move(RngStream& rng) {
  return static_cast<Action>(1 + rng.below(4));
}

}  // namespace

ScriptedPolicy greedy_forager() {
  return [](const PolicyContext& ctx) {
    if (auto a = toward_nearest(ctx.observation)) return *a;
    return random_move(ctx.rng);
  };
}

ScriptedPolicy threshold_forager(int threshold) {
  return [threshold](const PolicyContext& ctx) {
    if (visible_resources(ctx.observation) >= threshold) return Action::kStay;
    if (auto a = toward_nearest(ctx.observation)) return *a;
    return random_move(ctx.rng);
  };
}

ScriptedPolicy stay() {
  return [](const PolicyContext&) { return Action::kStay; };
}

}  // namespace policies

}  // namespace ecoevo::lab
