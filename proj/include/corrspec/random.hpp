#pragma once

#include <cstdint>
#include <initializer_list>

namespace corrspec::rng {

// Counter-based variates: every draw is a pure function of (seed, stream, site),
// so two samplers that share a seed see the same innovation at the same lattice site
// regardless of the window each one materializes.

constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t base, std::initializer_list<std::uint64_t> tags) noexcept {
  std::uint64_t h = splitmix64(base);
  for (std::uint64_t t : tags) h = splitmix64(h ^ splitmix64(t + 0x632be59bd9b4e019ULL));
  return h;
}

inline std::uint64_t site_key(std::uint64_t seed, std::uint64_t stream, std::int64_t row,
                              std::int64_t col) noexcept {
  return derive_seed(seed, {stream, static_cast<std::uint64_t>(row), static_cast<std::uint64_t>(col)});
}

/// Uniform in the open interval (0, 1).
inline double uniform_open(std::uint64_t bits) noexcept {
  return (static_cast<double>(bits >> 11) + 0.5) * 0x1.0p-53;
}

/// Standard normal via Box-Muller on two sub-streams of the key.
double standard_normal(std::uint64_t key) noexcept;

}  // namespace corrspec::rng
