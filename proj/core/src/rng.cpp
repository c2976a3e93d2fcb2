#include "ecoevo/rng.hpp"

#include <cmath>
#include <numbers>

namespace ecoevo {

namespace {
constexpr std::uint64_t kGamma = 0x9e3779b97f4a7c15ULL;
}  // namespace

std::uint64_t mix64(std::uint64_t x) noexcept {
  x ^= x >> 30;
  x *= 0xbf58476d1ce4e5b9ULL;
  x ^= x >> 27;
  x *= 0x94d049bb133111ebULL;
  x ^= x >> 31;
  return x;
}

// Each component passes through a full mix before the next is absorbed, so
// (a, b) and (b, a) keys land far apart.
std::uint64_t RngStream::prefix(std::uint64_t seed, StreamPurpose purpose,
                                std::uint64_t step) noexcept {
  std::uint64_t k = mix64(seed + kGamma);
  k = mix64(k ^ (static_cast<std::uint64_t>(purpose) * kGamma));
  return mix64(k ^ (step + 0x6a09e667f3bcc909ULL));
}

RngStream RngStream::from_prefix(std::uint64_t prefix_key,
                                 std::uint64_t entity) noexcept {
  return RngStream(mix64(prefix_key ^ (entity * 0xd1b54a32d192ed03ULL +
                                       0xbb67ae8584caa73bULL)));
}

RngStream::RngStream(std::uint64_t seed, StreamPurpose purpose,
                     std::uint64_t step, std::uint64_t entity) noexcept
    : RngStream(from_prefix(prefix(seed, purpose, step), entity)) {}

std::uint64_t RngStream::next_u64() noexcept {
  ++counter_;
  return mix64(key_ + counter_ * kGamma);
}

double RngStream::uniform() noexcept {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

std::uint64_t RngStream::below(std::uint64_t bound) noexcept {
  // Lemire's multiply-shift with rejection; unbiased.
  std::uint64_t x = next_u64();
  __uint128_t m = static_cast<__uint128_t>(x) * bound;
  auto low = static_cast<std::uint64_t>(m);
  if (low < bound) {
    const std::uint64_t threshold = (0 - bound) % bound;
    while (low < threshold) {
      x = next_u64();
      m = static_cast<__uint128_t>(x) * bound;
      low = static_cast<std::uint64_t>(m);
    }
  }
  return static_cast<std::uint64_t>(m >> 64);
}

double RngStream::normal() noexcept {
  if (has_cached_normal_) {
    has_cached_normal_ = false;
    return cached_normal_;
  }
  const double u1 = 1.0 - uniform();  // (0, 1]
  const double u2 = uniform();
  const double radius = std::sqrt(-2.0 * std::log(u1));
  const double angle = 2.0 * std::numbers::pi * u2;
  cached_normal_ = radius * std::sin(angle);
  has_cached_normal_ = true;
  return radius * std::cos(angle);
}

}  // namespace ecoevo
