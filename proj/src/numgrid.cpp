#include "mlw/numgrid.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "mlw/kernels.hpp"
#include "mlw/rng.hpp"

namespace mlw {

namespace {

std::vector<double> trapezoid_1d(std::size_t n, double h) {
  std::vector<double> w(n + 1, h);
  w.front() = w.back() = 0.5 * h;
  return w;
}

}  // namespace

Grid::Grid(GridKind kind, std::size_t n, double lo, double hi)
    : kind_(kind), n_(n), lo_(lo), hi_(hi) {
  if (n == 0) throw std::invalid_argument("grid needs at least one cell");
  if (!(hi > lo)) throw std::invalid_argument("grid needs hi > lo");
  const auto w1 = trapezoid_1d(n, spacing());
  if (kind == GridKind::Interval) {
    weights_ = std::make_shared<const std::vector<double>>(w1);
  } else {
    std::vector<double> w2(w1.size() * w1.size());
    for (std::size_t i = 0; i < w1.size(); ++i)
      for (std::size_t j = 0; j < w1.size(); ++j)
        w2[i * w1.size() + j] = w1[i] * w1[j];
    weights_ = std::make_shared<const std::vector<double>>(std::move(w2));
  }
}

Grid Grid::interval(std::size_t n, double lo, double hi) {
  return Grid(GridKind::Interval, n, lo, hi);
}

Grid Grid::square(std::size_t n, double lo, double hi) {
  return Grid(GridKind::Square, n, lo, hi);
}

double Grid::measure() const {
  const double len = hi_ - lo_;
  return kind_ == GridKind::Interval ? len : len * len;
}

double Grid::coordinate(std::size_t i) const {
  // Exact endpoints; interior nodes by linear interpolation.
  if (i == n_) return hi_;
  return lo_ + (hi_ - lo_) * static_cast<double>(i) / static_cast<double>(n_);
}

std::pair<double, double> Grid::point(std::size_t node) const {
  if (kind_ == GridKind::Interval) return {coordinate(node), 0.0};
  const std::size_t m = line_size();
  return {coordinate(node / m), coordinate(node % m)};
}

bool Grid::on_boundary(std::size_t node) const {
  if (kind_ == GridKind::Interval) return node == 0 || node == n_;
  const std::size_t m = line_size();
  const std::size_t i = node / m;
  const std::size_t j = node % m;
  return i == 0 || j == 0 || i == n_ || j == n_;
}

void require_same_grid(const Grid& a, const Grid& b, const char* where) {
  if (!(a == b)) throw GridMismatch(std::string(where) + ": grid mismatch");
}

GridFunction::GridFunction(Grid grid, double fill)
    : grid_(std::move(grid)), values_(grid_.size(), fill) {}

GridFunction::GridFunction(Grid grid, std::vector<double> values)
    : grid_(std::move(grid)), values_(std::move(values)) {
  if (values_.size() != grid_.size())
    throw GridMismatch("GridFunction: value count " +
                       std::to_string(values_.size()) + " != node count " +
                       std::to_string(grid_.size()));
}

GridFunction GridFunction::sample(const Grid& grid,
                                  const std::function<double(double)>& f) {
  GridFunction u(grid);
  for (std::size_t i = 0; i < u.size(); ++i) u[i] = f(grid.point(i).first);
  return u;
}

GridFunction GridFunction::sample(
    const Grid& grid, const std::function<double(double, double)>& f) {
  GridFunction u(grid);
  for (std::size_t i = 0; i < u.size(); ++i) {
    const auto [x, y] = grid.point(i);
    u[i] = f(x, y);
  }
  return u;
}

GridFunction& GridFunction::operator+=(const GridFunction& other) {
  require_same_grid(grid_, other.grid_, "operator+=");
  for (std::size_t i = 0; i < values_.size(); ++i) values_[i] += other.values_[i];
  return *this;
}

GridFunction& GridFunction::operator-=(const GridFunction& other) {
  require_same_grid(grid_, other.grid_, "operator-=");
  for (std::size_t i = 0; i < values_.size(); ++i) values_[i] -= other.values_[i];
  return *this;
}

GridFunction& GridFunction::operator*=(double a) {
  for (double& v : values_) v *= a;
  return *this;
}

GridFunction& GridFunction::axpy(double a, const GridFunction& x) {
  require_same_grid(grid_, x.grid_, "axpy");
  for (std::size_t i = 0; i < values_.size(); ++i) values_[i] += a * x.values_[i];
  return *this;
}

double inner(const GridFunction& u, const GridFunction& v) {
  require_same_grid(u.grid(), v.grid(), "inner");
  return kernels::weighted_dot(u.grid().weights(), u.values(), v.values());
}

double norm_l2(const GridFunction& u) { return std::sqrt(inner(u, u)); }

double norm_l1(const GridFunction& u) {
  return kernels::weighted_abs_sum(u.grid().weights(), u.values());
}

double norm_max(const GridFunction& u) {
  double m = 0.0;
  for (double v : u.values()) m = std::max(m, std::abs(v));
  return m;
}

GridFunction add_noise(const GridFunction& y, double delta, std::uint64_t seed) {
  if (delta < 0.0) throw std::invalid_argument("add_noise: delta must be >= 0");
  if (delta == 0.0) return y;
  for (std::uint64_t s = seed;; ++s) {
    Engine eng(s);
    GridFunction e(y.grid());
    for (double& v : e.values()) v = standard_normal(eng);
    const double en = norm_l2(e);
    if (en > 0.0) return GridFunction(y).axpy(delta / en, e);
  }
}

// ---------------------------------------------------------------- operators

DenseOperator::DenseOperator(Grid in, Grid out, std::vector<double> kernel)
    : in_(std::move(in)), out_(std::move(out)), kernel_(std::move(kernel)) {
  if (kernel_.size() != in_.size() * out_.size())
    throw std::invalid_argument("DenseOperator: kernel size mismatch");
}

DenseOperator DenseOperator::from_kernel(
    Grid in, Grid out, const std::function<double(double, double)>& phi) {
  std::vector<double> k(in.size() * out.size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    const double s = out.point(i).first;
    for (std::size_t j = 0; j < in.size(); ++j)
      k[i * in.size() + j] = phi(in.point(j).first, s);
  }
  return DenseOperator(std::move(in), std::move(out), std::move(k));
}

GridFunction DenseOperator::apply(const GridFunction& x) const {
  require_same_grid(x.grid(), in_, "DenseOperator::apply");
  std::vector<double> xw(x.size());
  const auto w = in_.weights();
  for (std::size_t j = 0; j < xw.size(); ++j) xw[j] = w[j] * x[j];
  GridFunction y(out_);
  kernels::matvec(kernel_, out_.size(), in_.size(), xw, y.values());
  return y;
}

GridFunction DenseOperator::adjoint_apply(const GridFunction& z) const {
  require_same_grid(z.grid(), out_, "DenseOperator::adjoint_apply");
  std::vector<double> zv(z.size());
  const auto v = out_.weights();
  for (std::size_t i = 0; i < zv.size(); ++i) zv[i] = v[i] * z[i];
  GridFunction x(in_);
  kernels::matvec_transpose(kernel_, out_.size(), in_.size(), zv, x.values());
  return x;
}

double DenseOperator::norm_l1_to_l2() const {
  const std::size_t cols = in_.size();
  const auto v = out_.weights();
  std::vector<double> col2(cols, 0.0);
  for (std::size_t i = 0; i < out_.size(); ++i)
    for (std::size_t j = 0; j < cols; ++j) {
      const double k = kernel_[i * cols + j];
      col2[j] += v[i] * k * k;
    }
  return std::sqrt(*std::max_element(col2.begin(), col2.end()));
}

SeparableOperator::SeparableOperator(Grid in, Grid out,
                                     std::vector<GridFunction> out_factors,
                                     std::vector<GridFunction> in_factors)
    : in_(std::move(in)),
      out_(std::move(out)),
      out_factors_(std::move(out_factors)),
      in_factors_(std::move(in_factors)) {
  if (out_factors_.size() != in_factors_.size())
    throw std::invalid_argument("SeparableOperator: factor count mismatch");
  for (const auto& f : out_factors_)
    require_same_grid(f.grid(), out_, "SeparableOperator output factor");
  for (const auto& f : in_factors_)
    require_same_grid(f.grid(), in_, "SeparableOperator input factor");
}

GridFunction SeparableOperator::apply(const GridFunction& x) const {
  require_same_grid(x.grid(), in_, "SeparableOperator::apply");
  GridFunction y(out_);
  for (std::size_t r = 0; r < rank(); ++r)
    y.axpy(inner(in_factors_[r], x), out_factors_[r]);
  return y;
}

GridFunction SeparableOperator::adjoint_apply(const GridFunction& z) const {
  require_same_grid(z.grid(), out_, "SeparableOperator::adjoint_apply");
  GridFunction x(in_);
  for (std::size_t r = 0; r < rank(); ++r)
    x.axpy(inner(out_factors_[r], z), in_factors_[r]);
  return x;
}

double SeparableOperator::norm_l1_to_l2() const {
  // ||phi(t_j, .)||^2 = sum_{r,q} b_r(t_j) b_q(t_j) <a_r, a_q>
  const std::size_t k = rank();
  std::vector<double> gram(k * k);
  for (std::size_t r = 0; r < k; ++r)
    for (std::size_t q = 0; q < k; ++q)
      gram[r * k + q] = inner(out_factors_[r], out_factors_[q]);
  double best = 0.0;
  for (std::size_t j = 0; j < in_.size(); ++j) {
    double s = 0.0;
    for (std::size_t r = 0; r < k; ++r)
      for (std::size_t q = 0; q < k; ++q)
        s += in_factors_[r][j] * in_factors_[q][j] * gram[r * k + q];
    best = std::max(best, s);
  }
  return std::sqrt(best);
}

DenseOperator SeparableOperator::to_dense() const {
  std::vector<double> k(out_.size() * in_.size(), 0.0);
  for (std::size_t i = 0; i < out_.size(); ++i)
    for (std::size_t j = 0; j < in_.size(); ++j) {
      double s = 0.0;
      for (std::size_t r = 0; r < rank(); ++r)
        s += out_factors_[r][i] * in_factors_[r][j];
      k[i * in_.size() + j] = s;
    }
  return DenseOperator(in_, out_, std::move(k));
}

PowerIterationResult power_iteration(
    const Grid& input,
    const std::function<GridFunction(const GridFunction&)>& normal_op,
    std::uint64_t seed, int max_iter, double rtol) {
  Engine eng(seed);
  GridFunction v(input);
  for (double& x : v.values()) x = standard_normal(eng);
  v *= 1.0 / norm_l2(v);

  PowerIterationResult res;
  double lambda_prev = 0.0;
  for (int it = 1; it <= max_iter; ++it) {
    GridFunction w = normal_op(v);
    const double lambda = inner(v, w);
    const double wn = norm_l2(w);
    res.iterations = it;
    res.norm = std::sqrt(std::max(lambda, 0.0));
    if (wn == 0.0) {
      res.converged = true;
      return res;
    }
    if (it > 1 && std::abs(lambda - lambda_prev) <= rtol * std::abs(lambda)) {
      res.converged = true;
      return res;
    }
    lambda_prev = lambda;
    v = std::move(w);
    v *= 1.0 / wn;
  }
  return res;
}

}  // namespace mlw
