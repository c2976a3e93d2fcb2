#include "ecoevo/config.hpp"

#include <charconv>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <system_error>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <zlib.h>

#include "ecoevo/errors.hpp"
#include "ecoevo/neural.hpp"

namespace ecoevo {

namespace {

template <typename T>
T parse_number(const std::string& key, const std::string& value) {
  T out{};
  const char* first = value.data();
  const char* last = value.data() + value.size();
  const auto [ptr, ec] = std::from_chars(first, last, out);
  if (ec != std::errc() || ptr != last) {
    throw ConfigError(key, "cannot parse '" + value + "' as a number");
  }
  return out;
}

bool parse_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1") return true;
  if (value == "false" || value == "0") return false;
  throw ConfigError(key, "expected true or false, got '" + value + "'");
}

std::string number(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

template <typename T>
std::string number(T v) {
  return std::to_string(v);
}

using Setter = std::function<void(SimConfig&, const std::string& key,
                                  const std::string& value)>;

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> table = {
      {"grid_size",
       [](SimConfig& c, const std::string& k, const std::string& v) {
         const auto x = v.find('x');
         if (x == std::string::npos) {
           throw ConfigError(k, "expected COLSxROWS, got '" + v + "'");
         }
         c.cols = parse_number<int>(k, v.substr(0, x));
         c.rows = parse_number<int>(k, v.substr(x + 1));
       }},
      {"max_population",
       [](SimConfig& c, const std::string& k, const std::string& v) {
         c.max_population = parse_number<int>(k, v);
       }},
      {"starting_population",
       [](SimConfig& c, const std::string& k, const std::string& v) {
         c.start_population = parse_number<int>(k, v);
       }},
      {"starting_resources",
       [](SimConfig& c, const std::string& k, const std::string& v) {
         c.start_resources = parse_number<int>(k, v);
       }},
      {"field_of_view",
       [](SimConfig&, const std::string& k, const std::string& v) {
         if (parse_number<int>(k, v) != kViewSize) {
           throw ConfigError(k, "the policy network is built for a 15x15 view");
         }
       }},
      {"total_timesteps",
       [](SimConfig& c, const std::string& k, const std::string& v) {
         c.total_steps = parse_number<std::uint64_t>(k, v);
       }},
      {"mutation_variance",
       [](SimConfig& c, const std::string& k, const std::string& v) {
         c.sigma = parse_number<double>(k, v);
       }},
      {"init_weight_std",
       [](SimConfig& c, const std::string& k, const std::string& v) {
         c.init_weight_std = parse_number<double>(k, v);
       }},
      {"seed",
       [](SimConfig& c, const std::string& k, const std::string& v) {
         c.seed = parse_number<std::uint64_t>(k, v);
       }},
      {"time_to_reproduce",
       [](SimConfig& c, const std::string& k, const std::string& v) {
         c.physiology.time_to_reproduce = parse_number<int>(k, v);
       }},
      {"time_to_die",
       [](SimConfig& c, const std::string& k, const std::string& v) {
         c.physiology.time_to_die = parse_number<int>(k, v);
       }},
      {"max_energy",
       [](SimConfig& c, const std::string& k, const std::string& v) {
         c.physiology.max_energy = parse_number<double>(k, v);
       }},
      {"starting_energy",
       [](SimConfig& c, const std::string& k, const std::string& v) {
         c.physiology.initial_energy = parse_number<double>(k, v);
       }},
      {"energy_death",
       [](SimConfig& c, const std::string& k, const std::string& v) {
         c.physiology.min_energy = parse_number<double>(k, v);
       }},
      {"energy_decay",
       [](SimConfig& c, const std::string& k, const std::string& v) {
         c.physiology.decay = parse_number<double>(k, v);
       }},
      {"energy_gain",
       [](SimConfig& c, const std::string& k, const std::string& v) {
         c.physiology.eat_gain = parse_number<double>(k, v);
       }},
      {"maximum_age",
       [](SimConfig& c, const std::string& k, const std::string& v) {
         c.physiology.max_age = parse_number<int>(k, v);
       }},
      {"regrowth_neighbor_prob",
       [](SimConfig& c, const std::string& k, const std::string& v) {
         c.regrowth.per_neighbor_prob = parse_number<double>(k, v);
       }},
      {"spontaneous_regrowth",
       [](SimConfig& c, const std::string& k, const std::string& v) {
         c.regrowth.spontaneous_prob = parse_number<double>(k, v);
       }},
      {"climate_alpha",
       [](SimConfig& c, const std::string& k, const std::string& v) {
         c.regrowth.alpha = parse_number<double>(k, v);
       }},
      {"neighbor_mode",
       [](SimConfig& c, const std::string& k, const std::string& v) {
         if (v == "proportional") {
           c.regrowth.neighbor_mode = NeighborMode::kProportional;
         } else if (v == "indicator") {
           c.regrowth.neighbor_mode = NeighborMode::kIndicator;
         } else {
           throw ConfigError(k, "expected proportional or indicator");
         }
       }},
      {"boundary_mode",
       [](SimConfig& c, const std::string& k, const std::string& v) {
         if (v == "lethal") {
           c.boundary_mode = BoundaryMode::kLethal;
         } else if (v == "blocked") {
           c.boundary_mode = BoundaryMode::kBlocked;
         } else {
           throw ConfigError(k, "expected lethal or blocked");
         }
       }},
      {"regrowth_enabled",
       [](SimConfig& c, const std::string& k, const std::string& v) {
         c.regrowth.enabled = parse_bool(k, v);
       }},
      {"reproduction_enabled",
       [](SimConfig& c, const std::string& k, const std::string& v) {
         c.reproduction_enabled = parse_bool(k, v);
       }},
  };
  return table;
}

}  // namespace

SimConfig parse_config(std::string_view text) {
  boost::property_tree::ptree tree;
  std::istringstream in{std::string(text)};
  try {
    boost::property_tree::read_ini(in, tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw ConfigError("line " + std::to_string(e.line()), e.message());
  }
  SimConfig cfg;
  for (const auto& [key, node] : tree) {
    if (!node.empty()) {
      throw ConfigError(key, "sections are not supported; use flat keys");
    }
    const auto it = setters().find(key);
    if (it == setters().end()) throw ConfigError(key, "unknown key");
    it->second(cfg, key, node.data());
  }
  cfg.validate();
  return cfg;
}

SimConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError(path.string(), "cannot open config file");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_config(buffer.str());
}

std::string format_config(const SimConfig& c) {
  const PhysiologyConfig& p = c.physiology;
  const RegrowthConfig& g = c.regrowth;
  std::string out;
  auto line = [&out](const char* key, const std::string& value) {
    out += key;
    out += " = ";
    out += value;
    out += '\n';
  };
  line("grid_size", number(c.cols) + "x" + number(c.rows));
  line("max_population", number(c.max_population));
  line("starting_population", number(c.start_population));
  line("starting_resources", number(c.start_resources));
  line("field_of_view", number(kViewSize));
  line("total_timesteps", number(c.total_steps));
  line("mutation_variance", number(c.sigma));
  line("init_weight_std", number(c.init_weight_std));
  line("seed", number(c.seed));
  line("time_to_reproduce", number(p.time_to_reproduce));
  line("time_to_die", number(p.time_to_die));
  line("max_energy", number(p.max_energy));
  line("starting_energy", number(p.initial_energy));
  line("energy_death", number(p.min_energy));
  line("energy_decay", number(p.decay));
  line("energy_gain", number(p.eat_gain));
  line("maximum_age", number(p.max_age));
  line("regrowth_neighbor_prob", number(g.per_neighbor_prob));
  line("spontaneous_regrowth", number(g.spontaneous_prob));
  line("climate_alpha", number(g.alpha));
  line("neighbor_mode", g.neighbor_mode == NeighborMode::kProportional
                            ? "proportional"
                            : "indicator");
  line("boundary_mode",
       c.boundary_mode == BoundaryMode::kLethal ? "lethal" : "blocked");
  line("regrowth_enabled", g.enabled ? "true" : "false");
  line("reproduction_enabled", c.reproduction_enabled ? "true" : "false");
  return out;
}

std::uint32_t config_digest(const SimConfig& cfg) {
  const std::string text = format_config(cfg);
  return static_cast<std::uint32_t>(
      crc32(0L, reinterpret_cast<const Bytef*>(text.data()),
            static_cast<uInt>(text.size())));
}

}  // namespace ecoevo
