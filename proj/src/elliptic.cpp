#include <cmath>
#include <string>

#include "mlw/forward.hpp"
#include "mlw/kernels.hpp"

namespace mlw {

CgNonConvergence::CgNonConvergence(std::size_t its, double res)
    : std::runtime_error("CG did not converge after " + std::to_string(its) +
                         " iterations (relative residual " +
                         std::to_string(res) + ")"),
      iterations(its),
      relative_residual(res) {}

EllipticSolver::EllipticSolver(Grid grid, double rtol, std::size_t max_iter)
    : grid_(std::move(grid)), m_(grid_.n() - 1), rtol_(rtol), max_iter_(max_iter) {
  if (grid_.kind() != GridKind::Square)
    throw std::invalid_argument("EllipticSolver needs a square grid");
  if (grid_.n() < 2) throw std::invalid_argument("EllipticSolver needs n >= 2");
  if (max_iter_ == 0) max_iter_ = 10 * grid_.n() * grid_.n();
}

void EllipticSolver::apply(std::span<const double> c, std::span<const double> v,
                           std::span<double> out) const {
  const double h = grid_.spacing();
  kernels::stencil5(m_, 1.0 / (h * h), c, v, out);
}

SolveStats EllipticSolver::solve(std::span<const double> c,
                                 std::span<const double> rhs,
                                 std::span<double> v) const {
  const std::size_t N = interior_size();
  const double h = grid_.spacing();
  const double diag0 = 4.0 / (h * h);

  std::fill(v.begin(), v.end(), 0.0);
  const double bnorm = std::sqrt(kernels::dot(rhs, rhs));
  if (bnorm == 0.0) return {};

  std::vector<double> r(rhs.begin(), rhs.end());
  std::vector<double> z(N), p(N), q(N), inv_diag(N);
  for (std::size_t i = 0; i < N; ++i) inv_diag[i] = 1.0 / (diag0 + c[i]);
  for (std::size_t i = 0; i < N; ++i) z[i] = inv_diag[i] * r[i];
  p = z;
  double rz = kernels::dot(r, z);

  for (std::size_t it = 1; it <= max_iter_; ++it) {
    apply(c, p, q);
    const double alpha = rz / kernels::dot(p, q);
    for (std::size_t i = 0; i < N; ++i) {
      v[i] += alpha * p[i];
      r[i] -= alpha * q[i];
    }
    const double rel = std::sqrt(kernels::dot(r, r)) / bnorm;
    if (rel <= rtol_) return {it, rel};
    for (std::size_t i = 0; i < N; ++i) z[i] = inv_diag[i] * r[i];
    const double rz_new = kernels::dot(r, z);
    const double beta = rz_new / rz;
    rz = rz_new;
    for (std::size_t i = 0; i < N; ++i) p[i] = z[i] + beta * p[i];
  }
  throw CgNonConvergence(max_iter_, std::sqrt(kernels::dot(r, r)) / bnorm);
}

std::vector<double> EllipticSolver::restrict_interior(const GridFunction& u) const {
  require_same_grid(u.grid(), grid_, "EllipticSolver::restrict_interior");
  const std::size_t line = grid_.line_size();
  std::vector<double> out(interior_size());
  for (std::size_t i = 0; i < m_; ++i)
    for (std::size_t j = 0; j < m_; ++j)
      out[i * m_ + j] = u[(i + 1) * line + (j + 1)];
  return out;
}

GridFunction EllipticSolver::extend(std::span<const double> interior,
                                    const GridFunction* boundary) const {
  GridFunction u = boundary ? *boundary : GridFunction(grid_);
  if (boundary) {
    require_same_grid(boundary->grid(), grid_, "EllipticSolver::extend");
  }
  const std::size_t line = grid_.line_size();
  for (std::size_t i = 0; i < m_; ++i)
    for (std::size_t j = 0; j < m_; ++j)
      u[(i + 1) * line + (j + 1)] = interior[i * m_ + j];
  return u;
}

}  // namespace mlw
