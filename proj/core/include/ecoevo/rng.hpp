#pragma once

#include <cstdint>

namespace ecoevo {

// Purposes for which independent random substreams are drawn. The numeric
// values are part of the trajectory contract: changing one changes every
// seeded run.
enum class StreamPurpose : std::uint32_t {
  kInitResources = 1,
  kInitAgents = 2,
  kInitWeights = 3,
  kAction = 4,
  kMutation = 5,
  kRegrowth = 6,
  kConsume = 7,
  kLabTrial = 8,
  kGenomeSampling = 9,
};

// Counter-based random stream. A stream is fully determined by
// (seed, purpose, step, entity) plus its draw counter, so any entity can
// derive its randomness for a given step without touching shared state.
class RngStream {
 public:
  RngStream(std::uint64_t seed, StreamPurpose purpose, std::uint64_t step,
            std::uint64_t entity) noexcept;

  // Key shared by every entity of one (seed, purpose, step). Hot loops
  // compute it once and derive per-entity streams with from_prefix().
  static std::uint64_t prefix(std::uint64_t seed, StreamPurpose purpose,
                              std::uint64_t step) noexcept;
  static RngStream from_prefix(std::uint64_t prefix_key,
                               std::uint64_t entity) noexcept;

  std::uint64_t key() const noexcept { return key_; }
  std::uint64_t counter() const noexcept { return counter_; }

  std::uint64_t next_u64() noexcept;
  // Uniform in [0, 1) with 53 random bits.
  double uniform() noexcept;
  // Uniform integer in [0, bound). bound must be > 0.
  std::uint64_t below(std::uint64_t bound) noexcept;
  // Standard normal via Box-Muller; the second variate is cached.
  double normal() noexcept;

 private:
  explicit RngStream(std::uint64_t key) noexcept : key_(key) {}

  std::uint64_t key_;
  std::uint64_t counter_ = 0;
  double cached_normal_ = 0.0;
  bool has_cached_normal_ = false;
};

// SplitMix64 finalizer; exposed for hashing and digests.
std::uint64_t mix64(std::uint64_t x) noexcept;

}  // namespace ecoevo
