#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

#include "ecoevo/engine.hpp"

namespace ecoevo {

// Flat `key = value` configuration text (grid_size, time_to_reproduce, ...).
// Any key may be omitted to keep its default. Full-line comments start with
// '#' or ';'. Throws ConfigError with the offending field (or line) on bad input.
SimConfig parse_config(std::string_view text);
SimConfig load_config(const std::filesystem::path& path);

// Canonical text form: every key, fixed order, shortest round-trip numbers.
std::string format_config(const SimConfig& cfg);

// CRC-32 of the canonical text.
std::uint32_t config_digest(const SimConfig& cfg);

}  // namespace ecoevo
