#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <variant>

#include "mlw/convex.hpp"
#include "mlw/numgrid.hpp"

namespace mlw {

class CgNonConvergence : public std::runtime_error {
 public:
  CgNonConvergence(std::size_t iterations, double relative_residual);
  std::size_t iterations;
  double relative_residual;
};

struct SolveStats {
  std::size_t iterations = 0;
  double relative_residual = 0.0;
};

/// Jacobi-preconditioned CG for (-Lap_h + diag(c)) v = rhs on the interior
/// nodes of a square grid (five-point stencil, zero Dirichlet data).
/// Interior vectors are (n-1)^2 long, row-major like the grid.
class EllipticSolver {
 public:
  /// max_iter = 0 selects 10 n^2.
  explicit EllipticSolver(Grid grid, double rtol = 1e-10,
                          std::size_t max_iter = 0);

  const Grid& grid() const { return grid_; }
  std::size_t interior_size() const { return m_ * m_; }
  std::size_t interior_line() const { return m_; }
  double rtol() const { return rtol_; }

  SolveStats solve(std::span<const double> c, std::span<const double> rhs,
                   std::span<double> v) const;
  /// out = (-Lap_h + diag(c)) v
  void apply(std::span<const double> c, std::span<const double> v,
             std::span<double> out) const;

  std::vector<double> restrict_interior(const GridFunction& u) const;
  /// Interior values into a full-grid function with the given boundary values.
  GridFunction extend(std::span<const double> interior,
                      const GridFunction* boundary) const;

 private:
  Grid grid_;
  std::size_t m_;
  double rtol_;
  std::size_t max_iter_;
};

/// (Ax)(s) = int phi(t, s) x(t) dt, dense or with a separable kernel.
struct LinearIntegral {
  std::variant<DenseOperator, SeparableOperator> op;
  std::optional<double> analytic_bound;
};

/// c -> u(c), the solution of -Lap u + c u = f, u = g on the boundary.
struct EllipticCoefficient {
  GridFunction f;
  GridFunction g;  // only boundary node values are used
  EllipticSolver solver;
};

class ForwardOperator {
 public:
  using Variant = std::variant<LinearIntegral, EllipticCoefficient>;

  static ForwardOperator linear(DenseOperator op,
                                std::optional<double> analytic_bound = {});
  static ForwardOperator linear(SeparableOperator op,
                                std::optional<double> analytic_bound = {});
  static ForwardOperator elliptic(GridFunction f, GridFunction g,
                                  double rtol = 1e-10, std::size_t max_iter = 0);

  const Variant& variant() const { return v_; }
  bool is_linear() const { return std::holds_alternative<LinearIntegral>(v_); }
  const Grid& input_grid() const;
  const Grid& output_grid() const;

  /// F evaluated at x; the derivative products below reuse it.
  struct Point {
    GridFunction x;
    GridFunction value;
  };
  Point evaluate(const GridFunction& x) const;

  GridFunction apply(const GridFunction& x) const { return evaluate(x).value; }
  GridFunction deriv_apply(const Point& at, const GridFunction& h) const;
  GridFunction deriv_adjoint_apply(const Point& at, const GridFunction& w) const;
  GridFunction deriv_apply(const GridFunction& x, const GridFunction& h) const {
    return deriv_apply(evaluate(x), h);
  }
  GridFunction deriv_adjoint_apply(const GridFunction& x,
                                   const GridFunction& w) const {
    return deriv_adjoint_apply(evaluate(x), w);
  }

  /// Bound L on ||F'(x)|| from the `from` norm into L2. Analytic when known;
  /// otherwise the exact L1->L2 column bound or a power-iteration estimate
  /// (for the elliptic map: ||F'(c0)|| at c0 = 0).
  double norm_bound(RateNorm from = RateNorm::L2, std::uint64_t seed = 1) const;
  /// Power-iteration estimate of ||F'(x)||_{L2->L2}.
  PowerIterationResult estimate_derivative_norm(const GridFunction& x,
                                                std::uint64_t seed) const;

 private:
  explicit ForwardOperator(Variant v) : v_(std::move(v)) {}
  Variant v_;
};

}  // namespace mlw
