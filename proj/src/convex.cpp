#include "mlw/convex.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace mlw {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

double soft_threshold(double v, double beta) {
  const double m = std::abs(v) - beta;
  return m > 0.0 ? std::copysign(m, v) : 0.0;
}

double lower_at(const QuadraticBox& q, std::size_t i) {
  return q.lower ? (*q.lower)[i] : -kInf;
}

void check_bound_grid(const QuadraticBox& q, const Grid& g) {
  if (q.lower) require_same_grid(q.lower->grid(), g, "QuadraticBox bound");
}

}  // namespace

Regularizer Regularizer::quadratic_box(GridFunction lower) {
  return Regularizer(QuadraticBox{std::move(lower)});
}

Regularizer Regularizer::nonnegative(const Grid& grid) {
  return quadratic_box(GridFunction(grid, 0.0));
}

Regularizer Regularizer::unconstrained_quadratic() {
  return Regularizer(QuadraticBox{});
}

Regularizer Regularizer::elastic_net(double beta) {
  if (!(beta > 0.0)) throw std::invalid_argument("elastic net needs beta > 0");
  return Regularizer(ElasticNet{beta});
}

Regularizer Regularizer::entropy_simplex() {
  return Regularizer(EntropySimplex{});
}

RateNorm Regularizer::rate_norm() const {
  return std::holds_alternative<EntropySimplex>(v_) ? RateNorm::L1
                                                    : RateNorm::L2;
}

const char* Regularizer::name() const {
  return std::visit(overloaded{
                        [](const QuadraticBox&) { return "quadratic_box"; },
                        [](const ElasticNet&) { return "elastic_net"; },
                        [](const EntropySimplex&) { return "entropy_simplex"; },
                    },
                    v_);
}

PrimalDualPair PrimalDualPair::from_dual(const Regularizer& r, GridFunction xi) {
  GridFunction x = mirror_map(r, xi);
  return {std::move(x), std::move(xi)};
}

double value(const Regularizer& r, const GridFunction& x) {
  const auto w = x.grid().weights();
  return std::visit(
      overloaded{
          [&](const QuadraticBox& q) {
            check_bound_grid(q, x.grid());
            for (std::size_t i = 0; i < x.size(); ++i)
              if (x[i] < lower_at(q, i)) return kInf;
            return 0.5 * inner(x, x);
          },
          [&](const ElasticNet& e) {
            return 0.5 * inner(x, x) + e.beta * norm_l1(x);
          },
          [&](const EntropySimplex&) {
            double s = 0.0;
            for (std::size_t i = 0; i < x.size(); ++i) {
              if (x[i] < 0.0) return kInf;
              if (x[i] > 0.0) s += w[i] * x[i] * std::log(x[i]);
            }
            if (std::abs(norm_l1(x) - 1.0) > kSimplexMassTol) return kInf;
            return s;
          },
      },
      r.variant());
}

GridFunction mirror_map(const Regularizer& r, const GridFunction& xi) {
  GridFunction x(xi.grid());
  std::visit(
      overloaded{
          [&](const QuadraticBox& q) {
            check_bound_grid(q, xi.grid());
            for (std::size_t i = 0; i < x.size(); ++i)
              x[i] = std::max(xi[i], lower_at(q, i));
          },
          [&](const ElasticNet& e) {
            for (std::size_t i = 0; i < x.size(); ++i)
              x[i] = soft_threshold(xi[i], e.beta);
          },
          [&](const EntropySimplex&) {
            // Shifting by max(xi) leaves the normalized result unchanged.
            const auto v = xi.values();
            const double m = *std::max_element(v.begin(), v.end());
            for (std::size_t i = 0; i < x.size(); ++i) x[i] = std::exp(xi[i] - m);
            x *= 1.0 / norm_l1(x);
          },
      },
      r.variant());
  return x;
}

double conjugate_value(const Regularizer& r, const GridFunction& xi) {
  return std::visit(
      overloaded{
          [&](const EntropySimplex&) {
            // log int e^xi, evaluated stably.
            const auto v = xi.values();
            const double m = *std::max_element(v.begin(), v.end());
            GridFunction e(xi.grid());
            for (std::size_t i = 0; i < e.size(); ++i) e[i] = std::exp(xi[i] - m);
            return m + std::log(norm_l1(e));
          },
          [&](const auto&) {
            const GridFunction x = mirror_map(r, xi);
            return inner(xi, x) - value(r, x);
          },
      },
      r.variant());
}

double bregman(const Regularizer& r, const PrimalDualPair& pair,
               const GridFunction& xbar) {
  const double rb = value(r, xbar);
  if (std::isinf(rb)) return kInf;
  return rb - value(r, pair.x) - inner(pair.xi, xbar - pair.x);
}

GridFunction subgradient_for(const Regularizer& r, const GridFunction& x) {
  GridFunction xi(x.grid());
  std::visit(
      overloaded{
          [&](const QuadraticBox& q) {
            check_bound_grid(q, x.grid());
            for (std::size_t i = 0; i < x.size(); ++i) {
              if (x[i] < lower_at(q, i))
                throw std::domain_error("subgradient_for: x below the box bound");
              xi[i] = x[i];
            }
          },
          [&](const ElasticNet& e) {
            for (std::size_t i = 0; i < x.size(); ++i) {
              const double s = x[i] > 0.0 ? 1.0 : (x[i] < 0.0 ? -1.0 : 0.0);
              xi[i] = x[i] + e.beta * s;
            }
          },
          [&](const EntropySimplex&) {
            for (std::size_t i = 0; i < x.size(); ++i) {
              if (!(x[i] > 0.0))
                throw std::domain_error(
                    "subgradient_for: simplex point must be strictly positive");
            }
            if (std::abs(norm_l1(x) - 1.0) > kSimplexMassTol)
              throw std::domain_error("subgradient_for: mass differs from 1");
            for (std::size_t i = 0; i < x.size(); ++i) xi[i] = 1.0 + std::log(x[i]);
          },
      },
      r.variant());
  return xi;
}

double rate_norm_of(const Regularizer& r, const GridFunction& u) {
  return r.rate_norm() == RateNorm::L1 ? norm_l1(u) : norm_l2(u);
}

double dual_norm_of(const Regularizer& r, const GridFunction& xi) {
  return r.rate_norm() == RateNorm::L1 ? norm_max(xi) : norm_l2(xi);
}

}  // namespace mlw
