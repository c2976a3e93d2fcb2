#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "ecoevo/engine.hpp"

namespace ecoevo {

// Binary layout (all integers and floats little-endian):
//
//   magic "ECOEVOCK" | u32 version | u64 step | u32 config digest
//   u32 config text length | config text (canonical key = value form)
//   u64 next agent id | u32 rows | u32 cols
//   resource bitmap | wall bitmap      (row-major, LSB first, ceil(cells/8))
//   u32 capacity | capacity x slot record
//   u32 CRC-32 of every preceding byte
//
// A slot record is a u8 alive flag, followed for live slots by
//   u64 id | i32 row | i32 col | f64 energy | i32 age | i32 repr_timer
//   i32 death_timer | f32 hidden[4] | f32 cell[4] | i8 prev_action | u8 ate
//   f32 weights[2445] in segment order.
//
// Random streams are counter-based on (seed, step, entity), so the seed in
// the config text plus the step index is the complete generator state.
inline constexpr std::uint32_t kCheckpointVersion = 1;

std::vector<std::uint8_t> encode_checkpoint(const Simulation& sim);
// Throws CheckpointError on bad magic, version, checksum, or truncation.
Simulation decode_checkpoint(std::span<const std::uint8_t> bytes);

void save_checkpoint(const Simulation& sim, const std::filesystem::path& path);
Simulation load_checkpoint(const std::filesystem::path& path);

// CRC-32 of the encoded checkpoint without its trailer (so, for a valid
// file, the stored checksum), as 8 lowercase hex digits.
std::string state_digest(const Simulation& sim);
std::string file_digest(const std::filesystem::path& path);

}  // namespace ecoevo
