#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <unordered_map>
#include <vector>

#include "ecoevo/engine.hpp"

namespace ecoevo {

inline constexpr int kMovementWindow = 50;
inline constexpr int kMovementBins = 17;
inline constexpr int kMovementBinWidth = 3;
inline constexpr int kExpectancyWindow = 500;
inline constexpr int kGreedinessWindow = 20;

struct MetricsFrame {
  std::uint64_t step = 0;  // index of the step just executed
  int population = 0;
  std::size_t resources = 0;
  int births = 0;
  int deaths = 0;
  double mean_energy = 0.0;  // 0 when the population is empty
  friend bool operator==(const MetricsFrame&, const MetricsFrame&) = default;
};

MetricsFrame make_frame(const Simulation& sim, const StepEvents& events);

struct MovementHistogram {
  std::uint64_t window_start = 0;
  std::array<int, kMovementBins> bins{};
  int total() const noexcept;
  friend bool operator==(const MovementHistogram&, const MovementHistogram&) = default;
};

// Fractions (0..1) of a movement window: lowest bin, highest bin,
// and the largest of the middle bins. All zero for an empty window.
struct MovementSummary {
  double lowest = 0.0;
  double highest = 0.0;
  double max_middle = 0.0;
};
MovementSummary summarize(const MovementHistogram& hist) noexcept;

// floor(manhattan(start, end) / 3), clamped to the last bin.
int movement_bin(Position start, Position end) noexcept;

// Mean age at death, or nullopt when nobody died.
std::optional<double> life_expectancy(std::span<const int> death_ages);

// One step of one agent, as seen by the greediness measure.
struct GreedinessRecord {
  bool resource_visible = false;
  int consumed = 0;
};

struct GreedinessCounts {
  int visible_windows = 0;    // T_r
  int consuming_windows = 0;  // C_r among the visible windows
};

// Splits the trace into back-to-back windows, dropping a trailing partial
// window.
GreedinessCounts greediness_counts(std::span<const GreedinessRecord> trace,
                                   int window = kGreedinessWindow);

// C_r / T_r, or nullopt when no window had a visible resource.
std::optional<double> greediness(std::span<const GreedinessRecord> trace,
                                 int window = kGreedinessWindow);

// Mean of per-agent, per-trial consumption counts (reproduction off).
// Throws std::invalid_argument on empty input.
double efficiency(std::span<const double> consumption);

struct TrialConsumption {
  double total_consumed = 0.0;
  int agents_existed = 0;
};

// Mean over trials of total_consumed / agents_existed (reproduction on).
// Throws std::invalid_argument on empty input or a trial with no agents.
double efficiency_per_capita(std::span<const TrialConsumption> trials);

// Tracks agents alive through aligned 50-step windows.
class MovementTracker {
 public:
  // Call with the state before the step at `sim.current_step()` runs, and
  // after every step. Emits a histogram whenever a window closes.
  std::optional<MovementHistogram> observe(const Simulation& sim);

 private:
  bool open_ = false;
  std::uint64_t window_start_ = 0;
  std::unordered_map<std::uint64_t, Position> start_positions_;
};

// Accumulates death ages over aligned 500-step windows.
class ExpectancyTracker {
 public:
  struct Window {
    std::uint64_t window_start = 0;
    std::optional<double> mean_death_age;
  };
  std::optional<Window> on_step(const StepEvents& events);

 private:
  bool open_ = false;
  std::uint64_t window_start_ = 0;
  std::vector<int> ages_;
};

// Collects every metric stream of a natural run.
class MetricsRecorder : public StepObserver {
 public:
  void on_start(const Simulation& sim) override;
  void on_step(const Simulation& sim, const StepEvents& events) override;

  const std::vector<MetricsFrame>& frames() const noexcept { return frames_; }
  const std::vector<MovementHistogram>& movement() const noexcept { return movement_; }
  const std::vector<ExpectancyTracker::Window>& expectancy() const noexcept {
    return expectancy_;
  }

 private:
  std::vector<MetricsFrame> frames_;
  std::vector<MovementHistogram> movement_;
  std::vector<ExpectancyTracker::Window> expectancy_;
  MovementTracker movement_tracker_;
  ExpectancyTracker expectancy_tracker_;
};

}  // namespace ecoevo
