#include <doctest.h>

#include <fstream>

#include "ecoevo/config.hpp"
#include "ecoevo/errors.hpp"
#include "support.hpp"

using namespace ecoevo;

namespace {

std::string field_of(const std::string& text) {
  try {
    parse_config(text);
  } catch (const ConfigError& e) {
    return e.field();
  }
  return "";
}

}  // namespace

TEST_CASE("empty text gives the defaults") {
  CHECK(parse_config("") == SimConfig{});
  CHECK(parse_config("# only a comment\n; and another\n\n") == SimConfig{});
}

TEST_CASE("keys map onto the configuration") {
  const SimConfig c = parse_config(
      "grid_size = 200x100\n"
      "max_population = 500\n"
      "starting_population = 100\n"
      "starting_resources = 4000\n"
      "field_of_view = 15\n"
      "total_timesteps = 20000\n"
      "mutation_variance = 0.05\n"
      "init_weight_std = 0.2\n"
      "seed = 18446744073709551615\n"
      "time_to_reproduce = 20\n"
      "time_to_die = 150\n"
      "max_energy = 4\n"
      "starting_energy = 2.5\n"
      "energy_death = 0.5\n"
      "energy_decay = 0.01\n"
      "energy_gain = 2\n"
      "maximum_age = 700\n"
      "regrowth_neighbor_prob = 0.003\n"
      "spontaneous_regrowth = 0.0001\n"
      "climate_alpha = 50\n"
      "neighbor_mode = indicator\n"
      "boundary_mode = blocked\n"
      "regrowth_enabled = false\n"
      "reproduction_enabled = 0\n");
  CHECK(c.cols == 200);
  CHECK(c.rows == 100);
  CHECK(c.max_population == 500);
  CHECK(c.start_population == 100);
  CHECK(c.start_resources == 4000);
  CHECK(c.total_steps == 20000);
  CHECK(c.sigma == 0.05);
  CHECK(c.init_weight_std == 0.2);
  CHECK(c.seed == 18446744073709551615ULL);
  CHECK(c.physiology.time_to_reproduce == 20);
  CHECK(c.physiology.time_to_die == 150);
  CHECK(c.physiology.max_energy == 4.0);
  CHECK(c.physiology.initial_energy == 2.5);
  CHECK(c.physiology.min_energy == 0.5);
  CHECK(c.physiology.decay == 0.01);
  CHECK(c.physiology.eat_gain == 2.0);
  CHECK(c.physiology.max_age == 700);
  CHECK(c.regrowth.per_neighbor_prob == 0.003);
  CHECK(c.regrowth.spontaneous_prob == 0.0001);
  CHECK(c.regrowth.alpha == 50.0);
  CHECK(c.regrowth.neighbor_mode == NeighborMode::kIndicator);
  CHECK(c.boundary_mode == BoundaryMode::kBlocked);
  CHECK_FALSE(c.regrowth.enabled);
  CHECK_FALSE(c.reproduction_enabled);
}

TEST_CASE("format and parse round-trip") {
  SimConfig c;
  c.rows = 77;
  c.cols = 33;
  c.start_resources = 1000;
  c.sigma = 0.1 + 0.2;  // not exactly representable in short decimal
  c.seed = 12345;
  c.regrowth.alpha = 1.0 / 3.0;
  c.boundary_mode = BoundaryMode::kBlocked;
  const std::string text = format_config(c);
  CHECK(parse_config(text) == c);
  CHECK(format_config(parse_config(text)) == text);
  CHECK(config_digest(c) == config_digest(parse_config(text)));
  SimConfig d = c;
  d.seed = 12346;
  CHECK(config_digest(c) != config_digest(d));
}

TEST_CASE("errors name the offending key") {
  CHECK(field_of("bogus = 1\n") == "bogus");
  CHECK(field_of("max_population = many\n") == "max_population");
  CHECK(field_of("max_population = 12abc\n") == "max_population");
  CHECK(field_of("grid_size = 400by200\n") == "grid_size");
  CHECK(field_of("field_of_view = 11\n") == "field_of_view");
  CHECK(field_of("neighbor_mode = sometimes\n") == "neighbor_mode");
  CHECK(field_of("boundary_mode = soft\n") == "boundary_mode");
  CHECK(field_of("regrowth_enabled = maybe\n") == "regrowth_enabled");
  CHECK(field_of("[section]\nseed = 1\n") == "section");
  CHECK(field_of("starting_population = 2000\n") == "starting_population");
  CHECK(field_of("energy_decay = -1\n") == "energy_decay");
  CHECK(field_of("spontaneous_regrowth = 2\n") == "spontaneous_regrowth");
}

TEST_CASE("malformed lines report a line number") {
  const std::string f = field_of("seed = 1\nthis line has no equals sign\n");
  CHECK(f == "line 2");
}

TEST_CASE("load_config reads files") {
  ecoevo::testing::TempDir dir;
  {
    std::ofstream out(dir / "run.ini");
    out << "grid_size = 40x30\nstarting_resources = 100\nstarting_population = 10\nseed = 9\n";
  }
  const SimConfig c = load_config(dir / "run.ini");
  CHECK(c.cols == 40);
  CHECK(c.rows == 30);
  CHECK(c.seed == 9);
  CHECK_THROWS_AS(load_config(dir / "missing.ini"), ConfigError);
}
