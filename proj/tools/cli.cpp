#include "cli.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>

#include "ecoevo/checkpoint.hpp"
#include "ecoevo/config.hpp"
#include "ecoevo/csv.hpp"
#include "ecoevo/engine.hpp"
#include "ecoevo/errors.hpp"
#include "ecoevo/lab.hpp"

namespace ecoevo::cli {

namespace fs = std::filesystem;

namespace {

std::string checkpoint_name(std::uint64_t step) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "checkpoint_%09llu.ckpt",
                static_cast<unsigned long long>(step));
  return buf;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << text;
  if (!out) throw std::runtime_error("cannot write " + path.string());
}

struct NaturalArgs {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::uint64_t> steps;
  std::string out = ".";
  std::uint64_t checkpoint_every = 100000;
  std::string resume;
  std::uint64_t progress_every = 10000;
};

int cmd_natural(const NaturalArgs& a, std::ostream& out, std::ostream& err) {
  std::optional<Simulation> sim;
  if (!a.resume.empty()) {
    if (!fs::exists(a.resume)) {
      err << "error: checkpoint not found: " << a.resume << '\n';
      return kUsageError;
    }
    if (!a.config.empty() || a.seed) {
      err << "error: --resume restores the configuration and seed stored in "
             "the checkpoint; drop --config/--seed\n";
      return kUsageError;
    }
    sim.emplace(load_checkpoint(a.resume));
  } else {
    SimConfig cfg;
    if (!a.config.empty()) {
      if (!fs::exists(a.config)) {
        err << "error: config file not found: " << a.config << '\n';
        return kUsageError;
      }
      cfg = load_config(a.config);
    }
    if (a.seed) cfg.seed = *a.seed;
    cfg.validate();
    sim.emplace(cfg);
  }
  const std::uint64_t target = a.steps ? *a.steps : sim->config().total_steps;

  fs::create_directories(a.out);
  const fs::path dir(a.out);
  write_text(dir / "config.txt", format_config(sim->config()));

  CsvMetricsWriter writer(dir);
  StepObserver* observers[] = {&writer};
  RunOptions options;
  options.total_steps = target;
  options.checkpoint_every = a.checkpoint_every;
  options.on_checkpoint = [&](const Simulation& s) {
    save_checkpoint(s, dir / checkpoint_name(s.current_step()));
  };
  options.progress_every = a.progress_every;
  options.progress = &err;

  RunSummary summary;
  try {
    summary = run(*sim, options, observers);
  } catch (const std::exception& e) {
    err << "error at step " << sim->current_step() << ": " << e.what() << '\n';
    return kRuntimeError;
  }
  out << "final_step " << summary.final_step << '\n';
  out << "population " << sim->population().alive_count << '\n';
  out << "resources " << sim->world().resource_count() << '\n';
  if (summary.extinct_at) out << "extinct_at " << *summary.extinct_at << '\n';
  out << "digest " << state_digest(*sim) << '\n';
  return kOk;
}

struct LabArgs {
  std::string checkpoint;
  std::string experiment = "greediness";
  int genomes = 50;
  int trials = 10;
  std::uint64_t seed = 0;
  std::string out = ".";
  int trial_length = 1000;
  std::string grid = "40x40";
  bool abort_on_cap = false;
};

int cmd_lab(const LabArgs& a, std::ostream& out, std::ostream& err) {
  if (a.checkpoint.empty() || !fs::exists(a.checkpoint)) {
    err << "error: checkpoint not found: "
        << (a.checkpoint.empty() ? "(none given)" : a.checkpoint) << '\n';
    return kUsageError;
  }
  lab::LabConfig cfg;
  const auto x = a.grid.find('x');
  try {
    if (x == std::string::npos) throw std::invalid_argument("grid");
    cfg.cols = std::stoi(a.grid.substr(0, x));
    cfg.rows = std::stoi(a.grid.substr(x + 1));
  } catch (const std::exception&) {
    err << "error: --grid expects COLSxROWS, got '" << a.grid << "'\n";
    return kUsageError;
  }
  cfg.trials = a.trials;
  cfg.genomes = a.genomes;
  cfg.seed = a.seed;
  cfg.trial_length = a.trial_length;
  cfg.abort_on_cap = a.abort_on_cap;

  const Simulation natural = load_checkpoint(a.checkpoint);
  cfg.physiology = natural.config().physiology;
  cfg.regrowth = natural.config().regrowth;
  cfg.validate();

  const std::vector<NetworkParams> genomes = lab::sample_genomes(
      natural.population(), static_cast<std::size_t>(a.genomes), a.seed);
  if (genomes.empty()) {
    err << "error: checkpoint has no live agents to sample\n";
    return kUsageError;
  }
  if (genomes.size() < static_cast<std::size_t>(a.genomes)) {
    err << "warning: only " << genomes.size() << " live agents available\n";
  }

  fs::create_directories(a.out);
  const fs::path dir(a.out);
  std::string report;
  std::size_t trials = 0;
  if (a.experiment == "greediness") {
    const lab::GreedinessReport r = lab::run_greediness_experiment(genomes, cfg);
    lab::export_trials(r.trials, (dir / "trials.csv").string());
    report = lab::render_report(r);
    trials = r.trials.size();
  } else {
    const lab::PressureReport r = lab::run_pressure_experiment(genomes, cfg);
    lab::export_trials(r.trials, (dir / "trials.csv").string());
    report = lab::render_report(r);
    trials = r.trials.size();
  }
  write_text(dir / "report.md", report);
  out << "trials " << trials << '\n';
  out << report;
  return kOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Non-episodic neuroevolution in a common-pool resource grid world"};
  app.require_subcommand(1);

  NaturalArgs natural;
  CLI::App* nat = app.add_subcommand("natural", "Run the natural environment");
  nat->add_option("--config", natural.config, "key = value configuration file")
      ->envname("ECOEVO_CONFIG");
  nat->add_option("--seed", natural.seed, "Random seed (overrides the config)")
      ->envname("ECOEVO_SEED");
  nat->add_option("--steps", natural.steps, "Stop at this step index")
      ->envname("ECOEVO_STEPS");
  nat->add_option("--out", natural.out, "Output directory")->envname("ECOEVO_OUT");
  nat->add_option("--checkpoint-every", natural.checkpoint_every,
                  "Checkpoint interval in steps (0: final only)")
      ->envname("ECOEVO_CHECKPOINT_EVERY");
  nat->add_option("--resume", natural.resume, "Continue from a checkpoint")
      ->envname("ECOEVO_RESUME");
  nat->add_option("--progress-every", natural.progress_every,
                  "Progress line interval on stderr (0: silent)");

  LabArgs labargs;
  CLI::App* labcmd = app.add_subcommand("lab", "Evaluate evolved genomes in lab environments");
  labcmd->add_option("--checkpoint", labargs.checkpoint, "Natural-run checkpoint")
      ->envname("ECOEVO_CHECKPOINT");
  labcmd->add_option("--experiment", labargs.experiment, "greediness or pressure")
      ->check(CLI::IsMember({"greediness", "pressure"}));
  labcmd->add_option("--genomes", labargs.genomes, "Genomes sampled from the checkpoint")
      ->check(CLI::PositiveNumber);
  labcmd->add_option("--trials", labargs.trials, "Trials per condition")
      ->check(CLI::PositiveNumber);
  labcmd->add_option("--seed", labargs.seed, "Sampling and trial seed")
      ->envname("ECOEVO_SEED");
  labcmd->add_option("--out", labargs.out, "Output directory")->envname("ECOEVO_OUT");
  labcmd->add_option("--trial-length", labargs.trial_length, "Steps per trial");
  labcmd->add_option("--grid", labargs.grid, "Lab grid as COLSxROWS");
  labcmd->add_flag("--abort-on-cap", labargs.abort_on_cap,
                   "Abort reproduction trials that hit the slot cap");

  std::string digest_path;
  CLI::App* dig = app.add_subcommand("digest", "Print the CRC-32 digest of a checkpoint");
  dig->add_option("file", digest_path)->required();

  std::string config_path;
  CLI::App* conf = app.add_subcommand("config", "Print the canonical configuration");
  conf->add_option("--config", config_path, "Configuration file to normalise");

  std::vector<const char*> argv;
  for (const std::string& s : args) argv.push_back(s.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kUsageError;
  }

  try {
    if (nat->parsed()) return cmd_natural(natural, out, err);
    if (labcmd->parsed()) return cmd_lab(labargs, out, err);
    if (dig->parsed()) {
      if (!fs::exists(digest_path)) {
        err << "error: file not found: " << digest_path << '\n';
        return kUsageError;
      }
      out << file_digest(digest_path) << '\n';
      return kOk;
    }
    if (conf->parsed()) {
      out << format_config(config_path.empty() ? SimConfig{} : load_config(config_path));
      return kOk;
    }
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kUsageError;
  } catch (const CheckpointError& e) {
    err << "checkpoint error: " << e.what() << '\n';
    return kCheckpointError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kRuntimeError;
  }
  return kUsageError;
}

}  // namespace ecoevo::cli
