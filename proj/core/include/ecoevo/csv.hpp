#pragma once

#include <filesystem>
#include <fstream>
#include <span>
#include <string>
#include <vector>

#include "ecoevo/metrics.hpp"

namespace ecoevo {

inline constexpr const char* kMetricsHeader =
    "step,population,resources,births,deaths,mean_energy";
std::string movement_header();
inline constexpr const char* kExpectancyHeader = "window_start,mean_death_age";

// Locale-independent CSV rows ('.' decimals, '\n' endings).
std::string format_row(const MetricsFrame& frame);
std::string format_row(const MovementHistogram& hist);
std::string format_row(const ExpectancyTracker::Window& window);

// Whole-file writers and readers. I/O failures throw std::runtime_error
// naming the path; malformed rows throw std::runtime_error with the line.
void export_metrics(std::span<const MetricsFrame> frames,
                    const std::filesystem::path& path);
std::vector<MetricsFrame> import_metrics(const std::filesystem::path& path);
void export_movement(std::span<const MovementHistogram> windows,
                     const std::filesystem::path& path);
std::vector<MovementHistogram> import_movement(const std::filesystem::path& path);
void export_expectancy(std::span<const ExpectancyTracker::Window> windows,
                       const std::filesystem::path& path);

// Streams metrics.csv, movement.csv and expectancy.csv into a directory as a
// run progresses.
class CsvMetricsWriter : public StepObserver {
 public:
  explicit CsvMetricsWriter(const std::filesystem::path& dir);

  void on_start(const Simulation& sim) override;
  void on_step(const Simulation& sim, const StepEvents& events) override;
  void on_finish(const Simulation& sim) override;

 private:
  void check(std::ofstream& out, const std::filesystem::path& path);

  std::filesystem::path dir_;
  std::ofstream metrics_;
  std::ofstream movement_;
  std::ofstream expectancy_;
  MovementTracker movement_tracker_;
  ExpectancyTracker expectancy_tracker_;
};

}  // namespace ecoevo
