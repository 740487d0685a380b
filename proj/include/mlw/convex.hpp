#pragma once

#include <optional>
#include <variant>

#include "mlw/numgrid.hpp"

namespace mlw {

/// Norm in which a regularizer is strongly convex; error/rate checks use it.
enum class RateNorm { L2, L1 };

/// R(x) = 1/2 ||x||^2 + indicator{x >= lower}. No bound means unconstrained.
struct QuadraticBox {
  std::optional<GridFunction> lower;
};

/// R(x) = 1/2 ||x||^2 + beta ||x||_{L1}.
struct ElasticNet {
  double beta = 1.0;
};

/// R(x) = int x log x on the probability simplex {x >= 0, int x = 1}.
struct EntropySimplex {};

class Regularizer {
 public:
  using Variant = std::variant<QuadraticBox, ElasticNet, EntropySimplex>;

  static Regularizer quadratic_box(GridFunction lower);
  static Regularizer nonnegative(const Grid& grid);
  static Regularizer unconstrained_quadratic();
  static Regularizer elastic_net(double beta);
  static Regularizer entropy_simplex();

  const Variant& variant() const { return v_; }
  /// Strong-convexity modulus; 1/2 for every supported variant.
  double sigma() const { return 0.5; }
  RateNorm rate_norm() const;
  const char* name() const;

 private:
  explicit Regularizer(Variant v) : v_(std::move(v)) {}
  Variant v_;
};

/// Mass tolerance for membership in the simplex.
inline constexpr double kSimplexMassTol = 1e-9;

/// (x, xi) with xi in dR(x).
struct PrimalDualPair {
  GridFunction x;
  GridFunction xi;

  static PrimalDualPair from_dual(const Regularizer& r, GridFunction xi);
};

/// R(x); +infinity outside the effective domain.
double value(const Regularizer& r, const GridFunction& x);

/// grad R*(xi) = argmin_x { R(x) - <xi, x> }.
GridFunction mirror_map(const Regularizer& r, const GridFunction& xi);

/// R*(xi) = sup_x { <xi, x> - R(x) }.
double conjugate_value(const Regularizer& r, const GridFunction& xi);

/// D_R^xi(xbar, x) = R(xbar) - R(x) - <xi, xbar - x>.
double bregman(const Regularizer& r, const PrimalDualPair& pair,
               const GridFunction& xbar);

/// One element of dR(x). Throws std::domain_error when x is outside the
/// effective domain (for the simplex: not strictly positive).
GridFunction subgradient_for(const Regularizer& r, const GridFunction& x);

/// ||u|| in the regularizer's rate norm (L2 or L1).
double rate_norm_of(const Regularizer& r, const GridFunction& u);
/// ||xi|| in the dual of the rate norm (L2 or L-infinity).
double dual_norm_of(const Regularizer& r, const GridFunction& xi);

}  // namespace mlw
