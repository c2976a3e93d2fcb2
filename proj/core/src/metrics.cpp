#include "ecoevo/metrics.hpp"

#include <algorithm>
#include <cstdlib>
#include <numeric>
#include <stdexcept>

namespace ecoevo {

MetricsFrame make_frame(const Simulation& sim, const StepEvents& events) {
  MetricsFrame f;
  f.step = events.step;
  f.population = sim.population().alive_count;
  f.resources = sim.world().resource_count();
  f.births = events.births;
  f.deaths = events.deaths;
  double energy = 0.0;
  int alive = 0;
  for (const AgentState& a : sim.population().slots) {
    if (!a.alive) continue;
    energy += a.energy;
    ++alive;
  }
  f.mean_energy = alive > 0 ? energy / alive : 0.0;
  return f;
}

int MovementHistogram::total() const noexcept {
  return std::accumulate(bins.begin(), bins.end(), 0);
}

MovementSummary summarize(const MovementHistogram& hist) noexcept {
  MovementSummary s;
  const int total = hist.total();
  if (total == 0) return s;
  const double denom = static_cast<double>(total);
  s.lowest = hist.bins.front() / denom;
  s.highest = hist.bins.back() / denom;
  const int middle = *std::max_element(hist.bins.begin() + 1, hist.bins.end() - 1);
  s.max_middle = middle / denom;
  return s;
}

int movement_bin(Position start, Position end) noexcept {
  const int d = std::abs(end.row - start.row) + std::abs(end.col - start.col);
  return std::min(d / kMovementBinWidth, kMovementBins - 1);
}

std::optional<double> life_expectancy(std::span<const int> death_ages) {
  if (death_ages.empty()) return std::nullopt;
  const double sum = std::accumulate(death_ages.begin(), death_ages.end(), 0.0);
  return sum / static_cast<double>(death_ages.size());
}

GreedinessCounts greediness_counts(std::span<const GreedinessRecord> trace,
                                   int window) {
  if (window <= 0) throw std::invalid_argument("greediness window must be > 0");
  GreedinessCounts counts;
  const std::size_t w = static_cast<std::size_t>(window);
  for (std::size_t start = 0; start + w <= trace.size(); start += w) {
    bool visible = false;
    bool consumed = false;
    for (std::size_t i = start; i < start + w; ++i) {
      visible = visible || trace[i].resource_visible;
      consumed = consumed || trace[i].consumed > 0;
    }
    if (!visible) continue;
    ++counts.visible_windows;
    if (consumed) ++counts.consuming_windows;
  }
  return counts;
}

std::optional<double> greediness(std::span<const GreedinessRecord> trace,
                                 int window) {
  const GreedinessCounts c = greediness_counts(trace, window);
  if (c.visible_windows == 0) return std::nullopt;
  return static_cast<double>(c.consuming_windows) / c.visible_windows;
}

double efficiency(std::span<const double> consumption) {
  if (consumption.empty()) {
    throw std::invalid_argument("efficiency: no consumption counts");
  }
  return std::accumulate(consumption.begin(), consumption.end(), 0.0) /
         static_cast<double>(consumption.size());
}

double efficiency_per_capita(std::span<const TrialConsumption> trials) {
  if (trials.empty()) throw std::invalid_argument("efficiency: no trials");
  double sum = 0.0;
  for (const TrialConsumption& t : trials) {
    if (t.agents_existed <= 0) {
      throw std::invalid_argument("efficiency: trial without agents");
    }
    sum += t.total_consumed / t.agents_existed;
  }
  return sum / static_cast<double>(trials.size());
}

std::optional<MovementHistogram> MovementTracker::observe(const Simulation& sim) {
  const std::uint64_t now = sim.current_step();
  std::optional<MovementHistogram> closed;
  if (open_ && now == window_start_ + kMovementWindow) {
    MovementHistogram hist;
    hist.window_start = window_start_;
    for (const AgentState& a : sim.population().slots) {
      if (!a.alive) continue;
      const auto it = start_positions_.find(a.id);
      if (it == start_positions_.end()) continue;
      ++hist.bins[static_cast<std::size_t>(movement_bin(it->second, a.position))];
    }
    closed = hist;
    open_ = false;
  }
  if (!open_ && now % kMovementWindow == 0) {
    open_ = true;
    window_start_ = now;
    start_positions_.clear();
    for (const AgentState& a : sim.population().slots) {
      if (a.alive) start_positions_.emplace(a.id, a.position);
    }
  }
  return closed;
}

std::optional<ExpectancyTracker::Window> ExpectancyTracker::on_step(
    const StepEvents& events) {
  if (!open_ && events.step % kExpectancyWindow == 0) {
    open_ = true;
    window_start_ = events.step;
    ages_.clear();
  }
  if (!open_) return std::nullopt;
  ages_.insert(ages_.end(), events.death_ages.begin(), events.death_ages.end());
  if ((events.step + 1) % kExpectancyWindow != 0) return std::nullopt;
  open_ = false;
  return Window{window_start_, life_expectancy(ages_)};
}

void MetricsRecorder::on_start(const Simulation& sim) {
  if (auto h = movement_tracker_.observe(sim)) movement_.push_back(*h);
}

void MetricsRecorder::on_step(const Simulation& sim, const StepEvents& events) {
  frames_.push_back(make_frame(sim, events));
  if (auto h = movement_tracker_.observe(sim)) movement_.push_back(*h);
  if (auto w = expectancy_tracker_.on_step(events)) expectancy_.push_back(*w);
}

}  // namespace ecoevo
