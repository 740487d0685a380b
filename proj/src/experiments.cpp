#include "mlw/experiments.hpp"

#include <boost/math/tools/roots.hpp>
#include <cmath>
#include <stdexcept>

namespace mlw {

double entropy_exponent() {
  static const double a = [] {
    auto f = [](double a) {
      return std::exp(1.5 * a - 1.0) * std::expm1(a) / a - 1.0;
    };
    std::uintmax_t max_iter = 200;
    const auto r = boost::math::tools::toms748_solve(
        f, 0.1, 1.0, boost::math::tools::eps_tolerance<double>(), max_iter);
    return 0.5 * (r.first + r.second);
  }();
  return a;
}

double entropy_truth(double t) {
  const double a = entropy_exponent();
  return std::exp(1.5 * a - 1.0 + a * t);
}

Experiment setup_entropy_experiment(std::size_t n, KernelStorage storage) {
  if (n < 100) throw std::invalid_argument("entropy experiment needs n >= 100");
  const Grid grid = Grid::interval(n);
  const double L = std::sqrt(19.0 / 3.0);

  auto F = [&] {
    if (storage == KernelStorage::Dense) {
      return ForwardOperator::linear(
          DenseOperator::from_kernel(grid, grid,
                                     [](double t, double s) { return 1.0 + t + s; }),
          L);
    }
    // 1 + t + s = 1 * (1 + t) + s * 1
    const GridFunction one(grid, 1.0);
    const auto s = GridFunction::sample(grid, [](double v) { return v; });
    const auto one_plus_t = GridFunction::sample(grid, [](double v) { return 1.0 + v; });
    return ForwardOperator::linear(
        SeparableOperator(grid, grid, {one, s}, {one_plus_t, one}), L);
  }();

  GridFunction x = GridFunction::sample(grid, entropy_truth);
  x *= 1.0 / norm_l1(x);
  GridFunction y = F.apply(x);
  return {std::move(F), Regularizer::entropy_simplex(), std::move(x), std::move(y),
          GridFunction(grid), L, 0.0};
}

double pde_truth(double x, double y) {
  const double m = std::max(1.0 - 9.0 * (x * x + y * y), 0.0);
  return m * m;
}

Experiment setup_pde_experiment(std::size_t n, const PdeSetup& setup) {
  if (n != 16 && n != 32 && n != 64 && n != 128)
    throw std::invalid_argument("pde experiment needs n in {16, 32, 64, 128}");
  const Grid grid = Grid::square(n, setup.lo, setup.hi);
  const auto u_true = [](double x, double y) { return 1.0 + x * x + y * y; };
  auto f = GridFunction::sample(grid, [&](double x, double y) {
    return -4.0 + u_true(x, y) * pde_truth(x, y);
  });
  auto g = GridFunction::sample(grid, u_true);
  ForwardOperator F = ForwardOperator::elliptic(std::move(f), std::move(g), setup.cg_rtol);

  GridFunction c = GridFunction::sample(grid, pde_truth);
  GridFunction y = F.apply(c);
  for (std::size_t i = 0; i < c.size(); ++i)
    if (grid.on_boundary(i)) c[i] = 0.0;
  const double L = F.norm_bound(RateNorm::L2, setup.norm_seed);
  Regularizer R = Regularizer::nonnegative(grid);
  return {std::move(F), std::move(R), std::move(c), std::move(y), GridFunction(grid),
          L, 0.04};
}

}  // namespace mlw
