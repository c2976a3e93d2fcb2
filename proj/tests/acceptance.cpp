// Acceptance gate. Prints one PASS/FAIL line per criterion and exits non-zero
// if any criterion fails. Pass criterion numbers as arguments to run a subset.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <tbb/global_control.h>

#include "ecoevo/checkpoint.hpp"
#include "ecoevo/engine.hpp"
#include "ecoevo/lab.hpp"
#include "ecoevo/metrics.hpp"
#include "ecoevo/neural.hpp"
#include "ecoevo/stats.hpp"
#include "ecoevo/world.hpp"
#include "support.hpp"

using namespace ecoevo;

namespace {

struct Verdict {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof(buf), f, args...);
  return buf;
}

// Desk-scale natural environment: 200 columns by 100 rows, starting resources
// scaled with the area, other parameters at their defaults.
SimConfig desk_config(std::uint64_t seed) {
  SimConfig cfg;
  cfg.cols = 200;
  cfg.rows = 100;
  cfg.start_resources = 4000;
  cfg.seed = seed;
  return cfg;
}

// ---------------------------------------------------------------------------

Verdict parameter_count() {
  const NetworkParams p;
  const std::size_t n = p.size();
  return {n == 2445 && NetworkParams::kSize == 2445, fmt("parameters = %zu", n)};
}

Verdict regrowth_law() {
  // Two-row world: (1,2) sits on the bottom row next to one resource at (1,1);
  // (0,4) has no occupied neighbours.
  WorldState initial = make_world(2, 5, 200.0);
  initial.resources[initial.index(1, 1)] = 1;
  const RegrowthConfig cfg;
  const std::size_t neighbour_cell = initial.index(1, 2);
  const std::size_t lone_cell = initial.index(0, 4);
  const std::uint64_t n = 1'000'000;
  std::uint64_t neighbour_hits = 0;
  std::uint64_t lone_hits = 0;
  WorldState w = initial;
  for (std::uint64_t t = 0; t < n; ++t) {
    w.resources = initial.resources;
    step_regrowth(w, cfg, 2024, t);
    neighbour_hits += w.resources[neighbour_cell];
    lone_hits += w.resources[lone_cell];
  }
  const auto z = [n](std::uint64_t hits, double p) {
    const double sd = std::sqrt(p * (1.0 - p) / static_cast<double>(n));
    return (static_cast<double>(hits) / static_cast<double>(n) - p) / sd;
  };
  const double z1 = z(neighbour_hits, 0.002 * 1.0 + 0.00005);
  const double z0 = z(lone_hits, 0.00005);
  return {std::abs(z1) <= 3.0 && std::abs(z0) <= 3.0,
          fmt("one neighbour %.6f (z=%+.2f), spontaneous %.6f (z=%+.2f)",
              static_cast<double>(neighbour_hits) / n, z1,
              static_cast<double>(lone_hits) / n, z0)};
}

Verdict climate_gradient() {
  const double bottom = climate_value(99, 100, 200.0);
  const double top = climate_value(0, 100, 200.0);
  const double ratio = bottom / top;
  return {std::abs(ratio - 100.5) <= 1e-9, fmt("c(bottom)/c(top) = %.12f", ratio)};
}

Verdict physiology() {
  SimConfig cfg = testing::quiet_config(9, 9);
  cfg.max_population = 1;
  cfg.reproduction_enabled = false;

  Simulation hungry = testing::hand_built(cfg, {{4, 4}}, {});
  hungry.set_policy(lab::policies::stay());
  int starved_at = -1;
  bool starvation = false;
  while (hungry.population().alive_count > 0 && hungry.current_step() < 5000) {
    const StepEvents ev = hungry.step();
    if (ev.deaths > 0) {
      starved_at = ev.death_ages.front();
      starvation = ev.deaths_starvation == 1;
    }
  }

  Simulation fed = testing::hand_built(cfg, {{4, 4}}, {});
  fed.set_policy(lab::policies::stay());
  int died_at = -1;
  bool of_age = false;
  bool countdown = false;
  while (fed.population().alive_count > 0 && fed.current_step() < 5000) {
    if (fed.current_step() % 40 == 39) fed.world().resources[fed.world().index(4, 4)] = 1;
    const StepEvents ev = fed.step();
    if (fed.population().alive_count > 0) countdown |= fed.population().slots[0].death_timer > 0;
    if (ev.deaths > 0) {
      died_at = ev.death_ages.front();
      of_age = ev.deaths_age == 1;
    }
  }
  return {starved_at == 320 && starvation && died_at == 651 && of_age && !countdown,
          fmt("never fed: starvation at age %d; fed every 40 steps: %s death at age %d",
              starved_at, of_age ? "age-cap" : "non-age", died_at)};
}

Verdict determinism_and_resume() {
  const SimConfig cfg = desk_config(5);
  std::vector<std::uint8_t> a_bytes;
  {
    tbb::global_control one(tbb::global_control::max_allowed_parallelism, 1);
    Simulation a(cfg);
    run(a, RunOptions{10'000});
    a_bytes = encode_checkpoint(a);
  }
  Simulation b(cfg);
  run(b, RunOptions{10'000});
  const std::vector<std::uint8_t> b_bytes = encode_checkpoint(b);

  Simulation first(cfg);
  run(first, RunOptions{5'000});
  testing::TempDir dir;
  save_checkpoint(first, dir / "mid.ckpt");
  Simulation resumed = load_checkpoint(dir / "mid.ckpt");
  run(resumed, RunOptions{10'000});

  const bool identical = a_bytes == b_bytes;
  const std::string straight = state_digest(b);
  const std::string after = state_digest(resumed);
  return {identical && straight == after,
          fmt("final checkpoints %s (%zu bytes); digest %s, resumed %s; population %d",
              identical ? "identical" : "differ", a_bytes.size(), straight.c_str(),
              after.c_str(), b.population().alive_count)};
}

Verdict conservation() {
  RngStream fuzz(77, StreamPurpose::kInitAgents, 0, 0);
  const ScriptedPolicy random_walk = [](const PolicyContext& ctx) {
    return static_cast<Action>(ctx.rng.below(kNumActions));
  };
  std::uint64_t steps = 0;
  int peak = 0;
  std::string broken;
  int segment = 0;
  while (steps < 10'000 && broken.empty()) {
    SimConfig cfg;
    cfg.rows = 20 + static_cast<int>(fuzz.below(100));
    cfg.cols = 20 + static_cast<int>(fuzz.below(200));
    const auto cells = static_cast<std::uint64_t>(cfg.rows) * static_cast<std::uint64_t>(cfg.cols);
    cfg.max_population = 1000;
    cfg.start_population = static_cast<int>(fuzz.below(1001));
    cfg.start_resources = fuzz.below(cells / 2 + 1);
    cfg.physiology.time_to_reproduce = 5 + static_cast<int>(fuzz.below(140));
    cfg.physiology.eat_gain = 0.5 + fuzz.uniform();
    cfg.regrowth.per_neighbor_prob = 0.02 * fuzz.uniform();
    cfg.regrowth.neighbor_mode = fuzz.below(2) ? NeighborMode::kIndicator : NeighborMode::kProportional;
    cfg.boundary_mode = fuzz.below(2) ? BoundaryMode::kBlocked : BoundaryMode::kLethal;
    cfg.sigma = 0.1 * fuzz.uniform();
    cfg.seed = fuzz.next_u64();
    Simulation sim(cfg);
    if (segment++ % 2 == 0) sim.set_policy(random_walk);
    const std::uint64_t length = std::min<std::uint64_t>(2'000, 10'000 - steps);
    for (std::uint64_t t = 0; t < length; ++t, ++steps) {
      const std::size_t r0 = sim.world().resource_count();
      const int k0 = sim.population().count_alive();
      const StepEvents ev = sim.step();
      const std::size_t r1 = sim.world().resource_count();
      const int k1 = sim.population().count_alive();
      peak = std::max(peak, k1);
      if (r1 != r0 - ev.consumed + ev.grown) {
        broken = fmt("resources at step %llu of segment %d", static_cast<unsigned long long>(t), segment);
      } else if (k1 != k0 + ev.births - ev.deaths || k1 != sim.population().alive_count) {
        broken = fmt("population at step %llu of segment %d", static_cast<unsigned long long>(t), segment);
      } else if (k1 > 1000) {
        broken = fmt("population %d above cap", k1);
      }
      if (!broken.empty()) break;
    }
  }
  return {broken.empty() && steps == 10'000,
          broken.empty() ? fmt("%llu steps over %d fuzzed configurations, peak population %d",
                               static_cast<unsigned long long>(steps), segment, peak)
                         : "violated: " + broken};
}

Verdict statistics() {
  const std::vector<stats::Sample> g = {{1, 2, 3}, {2, 3, 4}, {3, 4, 5}};
  const stats::AnovaResult a = stats::one_way_anova(g);
  // F(2, d) survival function in closed form.
  const double p_ref = std::pow(1.0 + 2.0 * a.f_statistic / 6.0, -3.0);
  const stats::TukeyResult t = stats::tukey_hsd(g);
  const stats::TukeyPair* extreme = t.find(0, 2);
  const bool ok = a.f_statistic == 3.0 && std::abs(a.p_value - p_ref) <= 0.01 &&
                  std::abs(a.p_value - 0.125) <= 0.01 && extreme != nullptr &&
                  std::abs(extreme->q - 3.464) <= 1e-3 && !extreme->significant &&
                  std::abs(t.q_critical - 4.339) <= 1e-3;
  return {ok, fmt("F=%.6f p=%.6f (reference %.6f), q=%.6f vs q_crit=%.4f -> %s", a.f_statistic,
                  a.p_value, p_ref, extreme ? extreme->q : NAN, t.q_critical,
                  extreme && extreme->significant ? "significant" : "not significant")};
}

Verdict metric_oracles() {
  const int b0 = movement_bin({0, 0}, {0, 0});
  const int b7 = movement_bin({0, 0}, {3, 4});
  const int b50 = movement_bin({0, 0}, {20, 30});
  lab::LabConfig cfg;
  cfg.density_fractions = {1.0, 1.0, 1.0};
  const lab::TrialResult eat =
      lab::run_trial(NetworkParams{}, cfg, lab::Density::kHigh, false, 1, lab::policies::greedy_forager());
  const lab::TrialResult idle =
      lab::run_trial(NetworkParams{}, cfg, lab::Density::kHigh, false, 1, lab::policies::stay());
  const bool ok = b0 == 0 && b7 == 2 && b50 == 16 && eat.greediness && *eat.greediness == 1.0 &&
                  idle.greediness && *idle.greediness == 0.0;
  return {ok, fmt("bins {%d,%d,%d}; always-eat G=%.3f, never-eat G=%.3f", b0, b7, b50,
                  eat.greediness.value_or(NAN), idle.greediness.value_or(NAN))};
}

// Population series of one desk-scale run.
class PopulationTrace : public StepObserver {
 public:
  void on_step(const Simulation& sim, const StepEvents&) override {
    series.push_back(sim.population().alive_count);
  }
  std::vector<int> series;
};

constexpr std::uint64_t kDeskSteps = 200'000;
constexpr std::size_t kSmoothingBlock = 5'000;

// Means of consecutive 5000-step blocks, then strict interior maxima.
int smoothed_maxima(const std::vector<int>& series) {
  std::vector<double> blocks;
  for (std::size_t i = 0; i + kSmoothingBlock <= series.size(); i += kSmoothingBlock) {
    double s = 0.0;
    for (std::size_t j = i; j < i + kSmoothingBlock; ++j) s += series[j];
    blocks.push_back(s / kSmoothingBlock);
  }
  int maxima = 0;
  for (std::size_t i = 1; i + 1 < blocks.size(); ++i) {
    maxima += blocks[i] > blocks[i - 1] && blocks[i] > blocks[i + 1];
  }
  return maxima;
}

std::optional<Simulation> g_survivor;

Verdict eco_evo_replication() {
  std::ostringstream detail;
  int survivors = 0;
  bool oscillating = true;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    Simulation sim(desk_config(seed));
    PopulationTrace trace;
    StepObserver* obs[] = {&trace};
    RunOptions opt;
    opt.total_steps = kDeskSteps;
    const RunSummary s = run(sim, opt, obs);
    detail << " seed " << seed << ": ";
    if (s.extinct_at) {
      detail << "extinct at " << *s.extinct_at << ";";
      continue;
    }
    ++survivors;
    const int maxima = smoothed_maxima(trace.series);
    oscillating &= maxima >= 3;
    detail << "alive (" << sim.population().alive_count << "), " << maxima << " maxima;";
    if (!g_survivor) g_survivor.emplace(std::move(sim));
    std::fflush(stdout);
  }
  return {survivors >= 1 && oscillating,
          fmt("%d/5 seeds survive %llu steps;", survivors, static_cast<unsigned long long>(kDeskSteps)) +
              detail.str()};
}

Verdict directional_lab() {
  if (!g_survivor) {
    (void)eco_evo_replication();
    if (!g_survivor) return {false, "no desk-scale seed survived to evolve a population"};
  }
  const Simulation& natural = *g_survivor;
  lab::LabConfig cfg;
  cfg.seed = 9;
  cfg.physiology = natural.config().physiology;
  cfg.regrowth = natural.config().regrowth;
  const std::vector<NetworkParams> genomes =
      lab::sample_genomes(natural.population(), static_cast<std::size_t>(cfg.genomes), cfg.seed);
  const lab::Density high[] = {lab::Density::kHigh};
  const lab::PressureReport report = lab::run_pressure_experiment(genomes, cfg, high);
  const lab::PressureArm* arm = report.arm(lab::Density::kHigh);

  double focal_off = 0.0, focal_on = 0.0, total_on = 0.0;
  int n_off = 0, n_on = 0;
  for (const lab::TrialRecord& t : report.trials) {
    if (t.reproduction) {
      focal_on += t.result.focal_consumed;
      total_on += t.result.total_consumed;
      ++n_on;
    } else {
      focal_off += t.result.focal_consumed;
      ++n_off;
    }
  }
  std::printf("  note: focal-agent consumption off %.3f, on %.3f; whole-group consumption on %.3f\n",
              focal_off / std::max(n_off, 1), focal_on / std::max(n_on, 1),
              total_on / std::max(n_on, 1));
  return {arm != nullptr && arm->on_exceeds_off(),
          fmt("%zu genomes, high density: efficiency off %.4f, on %.4f (saturated trials %d)",
              genomes.size(), arm ? arm->mean_off : NAN, arm ? arm->mean_on : NAN,
              arm ? arm->saturated_trials : 0)};
}

Verdict throughput() {
  SimConfig cfg;
  cfg.start_population = 1000;
  cfg.max_population = 1000;
  cfg.boundary_mode = BoundaryMode::kBlocked;
  cfg.seed = 11;
  Simulation sim(cfg);
  const int steps = 300;
  int lowest = sim.population().alive_count;
  const auto t0 = std::chrono::steady_clock::now();
  for (int i = 0; i < steps; ++i) {
    sim.step();
    lowest = std::min(lowest, sim.population().alive_count);
  }
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  const double rate = steps / seconds;
  return {rate >= 100.0 && lowest >= 990,
          fmt("%.1f steps/s on 400x200 (population never below %d)", rate, lowest)};
}

struct Criterion {
  int id;
  const char* name;
  std::function<Verdict()> check;
};

}  // namespace

int main(int argc, char** argv) {
  const std::vector<Criterion> criteria = {
      {1, "parameter count", parameter_count},
      {2, "regrowth law", regrowth_law},
      {3, "climate gradient", climate_gradient},
      {4, "physiology determinism", physiology},
      {5, "determinism and resume", determinism_and_resume},
      {6, "conservation invariants", conservation},
      {7, "statistics oracles", statistics},
      {8, "metric pipeline oracles", metric_oracles},
      {10, "eco-evolutionary replication", eco_evo_replication},
      {9, "directional lab result", directional_lab},
      {11, "throughput", throughput},
  };
  std::set<int> wanted;
  for (int i = 1; i < argc; ++i) wanted.insert(std::atoi(argv[i]));

  int failures = 0;
  for (const Criterion& c : criteria) {
    if (!wanted.empty() && !wanted.count(c.id)) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Verdict v;
    try {
      v = c.check();
    } catch (const std::exception& e) {
      v = {false, std::string("exception: ") + e.what()};
    }
    const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("[%s] %2d %s: %s (%.1fs)\n", v.pass ? "PASS" : "FAIL", c.id, c.name,
                v.detail.c_str(), s);
    std::fflush(stdout);
    failures += !v.pass;
  }
  std::printf("%d criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
