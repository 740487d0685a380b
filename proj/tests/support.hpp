#pragma once

#include <cmath>
#include <cstdint>

#include "mlw/numgrid.hpp"
#include "mlw/rng.hpp"

namespace testing {

inline mlw::GridFunction random_function(const mlw::Grid& g, mlw::Engine& eng,
                                         double scale = 1.0) {
  mlw::GridFunction u(g);
  for (auto& v : u.values()) v = scale * mlw::standard_normal(eng);
  return u;
}

inline mlw::GridFunction random_uniform(const mlw::Grid& g, mlw::Engine& eng, double lo,
                                        double hi) {
  mlw::GridFunction u(g);
  for (auto& v : u.values()) v = lo + (hi - lo) * mlw::uniform01(eng);
  return u;
}

inline double rel_diff(double a, double b) {
  return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-300});
}

}  // namespace testing
