#include "corrspec/random.hpp"

#include <cmath>
#include <numbers>

namespace corrspec::rng {

double standard_normal(std::uint64_t key) noexcept {
  const double u1 = uniform_open(splitmix64(key ^ 0x1ULL));
  const double u2 = uniform_open(splitmix64(key ^ 0x2ULL));
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

}  // namespace corrspec::rng
