#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace mlw {

// std::mt19937_64 is fully specified by the standard, so its raw stream is
// identical on every platform. The std:: distributions are not, which is why
// the two samplers below are written out.
using Engine = std::mt19937_64;

/// Uniform double in [0, 1) from the top 53 bits of one draw.
inline double uniform01(Engine& eng) {
  return static_cast<double>(eng() >> 11) * 0x1.0p-53;
}

/// Standard normal, Marsaglia polar method (one value per accepted pair).
inline double standard_normal(Engine& eng) {
  for (;;) {
    const double u = 2.0 * uniform01(eng) - 1.0;
    const double v = 2.0 * uniform01(eng) - 1.0;
    const double s = u * u + v * v;
    if (s > 0.0 && s < 1.0) return u * std::sqrt(-2.0 * std::log(s) / s);
  }
}

/// Unbiased uniform index in [0, n) by rejection.
inline std::uint64_t uniform_index(Engine& eng, std::uint64_t n) {
  const std::uint64_t limit = Engine::max() - Engine::max() % n;
  for (;;) {
    const std::uint64_t r = eng();
    if (r < limit) return r % n;
  }
}

}  // namespace mlw
