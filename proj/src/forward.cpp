#include <algorithm>
#include <cmath>

#include "mlw/forward.hpp"

namespace mlw {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

void require_nonnegative(const GridFunction& c) {
  for (double v : c.values())
    if (v < 0.0)
      throw std::invalid_argument(
          "elliptic coefficient must be nonnegative at every node");
}

// Right-hand side f + (Dirichlet neighbours of g)/h^2 on the interior.
std::vector<double> dirichlet_rhs(const EllipticCoefficient& e) {
  const EllipticSolver& s = e.solver;
  const Grid& grid = s.grid();
  const std::size_t m = s.interior_line();
  const std::size_t line = grid.line_size();
  const double h = grid.spacing();
  const double inv_h2 = 1.0 / (h * h);
  std::vector<double> rhs = s.restrict_interior(e.f);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < m; ++j) {
      const std::size_t gi = i + 1;
      const std::size_t gj = j + 1;
      double b = 0.0;
      if (gi == 1) b += e.g[(gi - 1) * line + gj];
      if (gi == m) b += e.g[(gi + 1) * line + gj];
      if (gj == 1) b += e.g[gi * line + gj - 1];
      if (gj == m) b += e.g[gi * line + gj + 1];
      rhs[i * m + j] += b * inv_h2;
    }
  }
  return rhs;
}

}  // namespace

ForwardOperator ForwardOperator::linear(DenseOperator op,
                                        std::optional<double> analytic_bound) {
  return ForwardOperator(LinearIntegral{std::move(op), analytic_bound});
}

ForwardOperator ForwardOperator::linear(SeparableOperator op,
                                        std::optional<double> analytic_bound) {
  return ForwardOperator(LinearIntegral{std::move(op), analytic_bound});
}

ForwardOperator ForwardOperator::elliptic(GridFunction f, GridFunction g,
                                          double rtol, std::size_t max_iter) {
  require_same_grid(f.grid(), g.grid(), "ForwardOperator::elliptic");
  EllipticSolver solver(f.grid(), rtol, max_iter);
  return ForwardOperator(
      EllipticCoefficient{std::move(f), std::move(g), std::move(solver)});
}

const Grid& ForwardOperator::input_grid() const {
  return std::visit(
      overloaded{
          [](const LinearIntegral& l) -> const Grid& {
            return std::visit([](const auto& op) -> const Grid& { return op.input_grid(); },
                              l.op);
          },
          [](const EllipticCoefficient& e) -> const Grid& { return e.solver.grid(); },
      },
      v_);
}

const Grid& ForwardOperator::output_grid() const {
  return std::visit(
      overloaded{
          [](const LinearIntegral& l) -> const Grid& {
            return std::visit([](const auto& op) -> const Grid& { return op.output_grid(); },
                              l.op);
          },
          [](const EllipticCoefficient& e) -> const Grid& { return e.solver.grid(); },
      },
      v_);
}

ForwardOperator::Point ForwardOperator::evaluate(const GridFunction& x) const {
  return std::visit(
      overloaded{
          [&](const LinearIntegral& l) {
            GridFunction y =
                std::visit([&](const auto& op) { return op.apply(x); }, l.op);
            return Point{x, std::move(y)};
          },
          [&](const EllipticCoefficient& e) {
            require_same_grid(x.grid(), e.solver.grid(), "elliptic apply");
            require_nonnegative(x);
            const auto c = e.solver.restrict_interior(x);
            const auto rhs = dirichlet_rhs(e);
            std::vector<double> u(e.solver.interior_size());
            e.solver.solve(c, rhs, u);
            return Point{x, e.solver.extend(u, &e.g)};
          },
      },
      v_);
}

GridFunction ForwardOperator::deriv_apply(const Point& at,
                                          const GridFunction& h) const {
  return std::visit(
      overloaded{
          [&](const LinearIntegral& l) {
            return std::visit([&](const auto& op) { return op.apply(h); }, l.op);
          },
          [&](const EllipticCoefficient& e) {
            require_same_grid(h.grid(), e.solver.grid(), "elliptic deriv_apply");
            const auto c = e.solver.restrict_interior(at.x);
            const auto u = e.solver.restrict_interior(at.value);
            auto rhs = e.solver.restrict_interior(h);
            for (std::size_t i = 0; i < rhs.size(); ++i) rhs[i] *= -u[i];
            std::vector<double> v(rhs.size());
            e.solver.solve(c, rhs, v);
            return e.solver.extend(v, nullptr);
          },
      },
      v_);
}

GridFunction ForwardOperator::deriv_adjoint_apply(const Point& at,
                                                  const GridFunction& w) const {
  return std::visit(
      overloaded{
          [&](const LinearIntegral& l) {
            return std::visit([&](const auto& op) { return op.adjoint_apply(w); },
                              l.op);
          },
          [&](const EllipticCoefficient& e) {
            // Interior weights are all h^2, so the weighted adjoint of A(c)^{-1}
            // is A(c)^{-1} itself; boundary entries of the result are zero.
            require_same_grid(w.grid(), e.solver.grid(), "elliptic deriv_adjoint");
            const auto c = e.solver.restrict_interior(at.x);
            const auto u = e.solver.restrict_interior(at.value);
            const auto rhs = e.solver.restrict_interior(w);
            std::vector<double> z(rhs.size());
            e.solver.solve(c, rhs, z);
            for (std::size_t i = 0; i < z.size(); ++i) z[i] *= -u[i];
            return e.solver.extend(z, nullptr);
          },
      },
      v_);
}

PowerIterationResult ForwardOperator::estimate_derivative_norm(
    const GridFunction& x, std::uint64_t seed) const {
  const Point at = evaluate(x);
  return power_iteration(
      input_grid(),
      [&](const GridFunction& v) {
        return deriv_adjoint_apply(at, deriv_apply(at, v));
      },
      seed);
}

double ForwardOperator::norm_bound(RateNorm from, std::uint64_t seed) const {
  return std::visit(
      overloaded{
          [&](const LinearIntegral& l) {
            if (l.analytic_bound) return *l.analytic_bound;
            if (from == RateNorm::L1)
              return std::visit([](const auto& op) { return op.norm_l1_to_l2(); },
                                l.op);
            return estimate_derivative_norm(GridFunction(input_grid()), seed).norm;
          },
          [&](const EllipticCoefficient&) {
            return estimate_derivative_norm(GridFunction(input_grid()), seed).norm;
          },
      },
      v_);
}

}  // namespace mlw
