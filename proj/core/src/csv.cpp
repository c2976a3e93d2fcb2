#include "ecoevo/csv.hpp"

#include <charconv>
#include <sstream>
#include <stdexcept>
#include <system_error>

namespace ecoevo {

namespace {

void append(std::string& out, double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  out.append(buf, ptr);
}

template <typename Int>
void append(std::string& out, Int v) {
  char buf[32];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  out.append(buf, ptr);
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, ',')) fields.push_back(field);
  if (!line.empty() && line.back() == ',') fields.emplace_back();
  return fields;
}

template <typename T>
T parse(const std::string& s, const std::filesystem::path& path, int line) {
  T out{};
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw std::runtime_error(path.string() + ":" + std::to_string(line) +
                             ": cannot parse '" + s + "'");
  }
  return out;
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  return out;
}

std::ifstream open_in(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  return in;
}

void finish(std::ofstream& out, const std::filesystem::path& path) {
  out.flush();
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

}  // namespace

std::string movement_header() {
  std::string h = "window_start";
  for (int b = 0; b < kMovementBins; ++b) h += ",bin_" + std::to_string(b);
  return h;
}

std::string format_row(const MetricsFrame& f) {
  std::string out;
  append(out, f.step);
  out += ',';
  append(out, f.population);
  out += ',';
  append(out, f.resources);
  out += ',';
  append(out, f.births);
  out += ',';
  append(out, f.deaths);
  out += ',';
  append(out, f.mean_energy);
  return out;
}

std::string format_row(const MovementHistogram& h) {
  std::string out;
  append(out, h.window_start);
  for (int b : h.bins) {
    out += ',';
    append(out, b);
  }
  return out;
}

std::string format_row(const ExpectancyTracker::Window& w) {
  std::string out;
  append(out, w.window_start);
  out += ',';
  if (w.mean_death_age) append(out, *w.mean_death_age);
  return out;
}

void export_metrics(std::span<const MetricsFrame> frames,
                    const std::filesystem::path& path) {
  std::ofstream out = open_out(path);
  out << kMetricsHeader << '\n';
  for (const MetricsFrame& f : frames) out << format_row(f) << '\n';
  finish(out, path);
}

std::vector<MetricsFrame> import_metrics(const std::filesystem::path& path) {
  std::ifstream in = open_in(path);
  std::string line;
  std::getline(in, line);
  if (line != kMetricsHeader) {
    throw std::runtime_error(path.string() + ":1: unexpected header");
  }
  std::vector<MetricsFrame> frames;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    const auto f = split(line);
    if (f.size() != 6) {
      throw std::runtime_error(path.string() + ":" + std::to_string(line_no) +
                               ": expected 6 fields");
    }
    MetricsFrame m;
    m.step = parse<std::uint64_t>(f[0], path, line_no);
    m.population = parse<int>(f[1], path, line_no);
    m.resources = parse<std::size_t>(f[2], path, line_no);
    m.births = parse<int>(f[3], path, line_no);
    m.deaths = parse<int>(f[4], path, line_no);
    m.mean_energy = parse<double>(f[5], path, line_no);
    frames.push_back(m);
  }
  return frames;
}

void export_movement(std::span<const MovementHistogram> windows,
                     const std::filesystem::path& path) {
  std::ofstream out = open_out(path);
  out << movement_header() << '\n';
  for (const MovementHistogram& h : windows) out << format_row(h) << '\n';
  finish(out, path);
}

std::vector<MovementHistogram> import_movement(const std::filesystem::path& path) {
  std::ifstream in = open_in(path);
  std::string line;
  std::getline(in, line);
  if (line != movement_header()) {
    throw std::runtime_error(path.string() + ":1: unexpected header");
  }
  std::vector<MovementHistogram> out;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    const auto f = split(line);
    if (f.size() != 1 + kMovementBins) {
      throw std::runtime_error(path.string() + ":" + std::to_string(line_no) +
                               ": expected 18 fields");
    }
    MovementHistogram h;
    h.window_start = parse<std::uint64_t>(f[0], path, line_no);
    for (int b = 0; b < kMovementBins; ++b) {
      h.bins[static_cast<std::size_t>(b)] =
          parse<int>(f[static_cast<std::size_t>(b) + 1], path, line_no);
    }
    out.push_back(h);
  }
  return out;
}

void export_expectancy(std::span<const ExpectancyTracker::Window> windows,
                       const std::filesystem::path& path) {
  std::ofstream out = open_out(path);
  out << kExpectancyHeader << '\n';
  for (const auto& w : windows) out << format_row(w) << '\n';
  finish(out, path);
}

CsvMetricsWriter::CsvMetricsWriter(const std::filesystem::path& dir)
    : dir_(dir),
      metrics_(open_out(dir / "metrics.csv")),
      movement_(open_out(dir / "movement.csv")),
      expectancy_(open_out(dir / "expectancy.csv")) {
  metrics_ << kMetricsHeader << '\n';
  movement_ << movement_header() << '\n';
  expectancy_ << kExpectancyHeader << '\n';
}

void CsvMetricsWriter::check(std::ofstream& out, const std::filesystem::path& path) {
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

void CsvMetricsWriter::on_start(const Simulation& sim) {
  if (auto h = movement_tracker_.observe(sim)) movement_ << format_row(*h) << '\n';
}

void CsvMetricsWriter::on_step(const Simulation& sim, const StepEvents& events) {
  metrics_ << format_row(make_frame(sim, events)) << '\n';
  check(metrics_, dir_ / "metrics.csv");
  if (auto h = movement_tracker_.observe(sim)) {
    movement_ << format_row(*h) << '\n';
    check(movement_, dir_ / "movement.csv");
  }
  if (auto w = expectancy_tracker_.on_step(events)) {
    expectancy_ << format_row(*w) << '\n';
    check(expectancy_, dir_ / "expectancy.csv");
  }
}

void CsvMetricsWriter::on_finish(const Simulation&) {
  finish(metrics_, dir_ / "metrics.csv");
  finish(movement_, dir_ / "movement.csv");
  finish(expectancy_, dir_ / "expectancy.csv");
}

}  // namespace ecoevo
