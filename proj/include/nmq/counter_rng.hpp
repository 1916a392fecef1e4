#pragma once

// Stateless counter-based random numbers. A draw is a pure function of
// (key, counter), so the value assigned to a given (realization, mode) never
// depends on evaluation order or thread count.

#include <cmath>
#include <cstdint>
#include <numbers>

namespace nmq {

/// Stream tags separating independent noise processes under one master seed.
enum class StreamTag : std::uint64_t { single = 0, system = 1, ancilla = 2 };

struct RngKey {
  std::uint64_t seed = 0;
  StreamTag stream = StreamTag::single;
  std::uint64_t realization = 0;

  friend bool operator==(const RngKey&, const RngKey&) = default;
};

namespace detail {

// splitmix64 finalizer
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

inline constexpr std::uint64_t golden = 0x9E3779B97F4A7C15ULL;

}  // namespace detail

constexpr std::uint64_t counter_hash(const RngKey& key, std::uint64_t counter) noexcept {
  using detail::golden;
  using detail::mix64;
  std::uint64_t h = mix64(key.seed + golden);
  h = mix64(h ^ mix64(static_cast<std::uint64_t>(key.stream) + 2 * golden));
  h = mix64(h ^ mix64(key.realization + 3 * golden));
  h = mix64(h ^ mix64(counter + 5 * golden));
  return h;
}

/// Uniform on [0, 1) with 53 bits of resolution.
constexpr double uniform01(const RngKey& key, std::uint64_t counter) noexcept {
  return static_cast<double>(counter_hash(key, counter) >> 11) * 0x1.0p-53;
}

/// Uniform phase on [0, 2pi).
inline double uniform_phase(const RngKey& key, std::uint64_t counter) noexcept {
  constexpr double two_pi = 2.0 * std::numbers::pi;
  const double psi = two_pi * uniform01(key, counter);
  return psi < two_pi ? psi : std::nextafter(two_pi, 0.0);
}

}  // namespace nmq
