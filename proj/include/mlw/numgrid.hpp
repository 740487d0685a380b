#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace mlw {

enum class GridKind { Interval, Square };

/// Uniform grid on [lo,hi] or [lo,hi]^2 with trapezoidal (tensor trapezoidal)
/// quadrature weights. Nodes of the square are stored row-major: node
/// (i, j) has index i*(n+1) + j and coordinates (x_i, y_j).
class Grid {
 public:
  static Grid interval(std::size_t n, double lo = 0.0, double hi = 1.0);
  static Grid square(std::size_t n, double lo = 0.0, double hi = 1.0);

  GridKind kind() const { return kind_; }
  std::size_t n() const { return n_; }
  double lo() const { return lo_; }
  double hi() const { return hi_; }
  double spacing() const { return (hi_ - lo_) / static_cast<double>(n_); }
  /// Nodes per axis.
  std::size_t line_size() const { return n_ + 1; }
  std::size_t size() const { return weights_->size(); }
  double measure() const;
  double coordinate(std::size_t i) const;
  /// (x, y) of a square node; (t, 0) on the interval.
  std::pair<double, double> point(std::size_t node) const;
  bool on_boundary(std::size_t node) const;
  std::span<const double> weights() const { return *weights_; }

  friend bool operator==(const Grid& a, const Grid& b) {
    return a.kind_ == b.kind_ && a.n_ == b.n_ && a.lo_ == b.lo_ &&
           a.hi_ == b.hi_;
  }

 private:
  Grid(GridKind kind, std::size_t n, double lo, double hi);

  GridKind kind_;
  std::size_t n_;
  double lo_;
  double hi_;
  std::shared_ptr<const std::vector<double>> weights_;
};

class GridMismatch : public std::invalid_argument {
 public:
  explicit GridMismatch(const std::string& what) : std::invalid_argument(what) {}
};

/// Node values of a function on a Grid.
class GridFunction {
 public:
  explicit GridFunction(Grid grid, double fill = 0.0);
  GridFunction(Grid grid, std::vector<double> values);

  static GridFunction sample(const Grid& grid,
                             const std::function<double(double)>& f);
  static GridFunction sample(const Grid& grid,
                             const std::function<double(double, double)>& f);

  const Grid& grid() const { return grid_; }
  std::size_t size() const { return values_.size(); }
  std::span<const double> values() const { return values_; }
  std::span<double> values() { return values_; }
  double operator[](std::size_t i) const { return values_[i]; }
  double& operator[](std::size_t i) { return values_[i]; }

  GridFunction& operator+=(const GridFunction& other);
  GridFunction& operator-=(const GridFunction& other);
  GridFunction& operator*=(double a);
  /// this += a * x
  GridFunction& axpy(double a, const GridFunction& x);

  friend GridFunction operator+(GridFunction a, const GridFunction& b) {
    return a += b;
  }
  friend GridFunction operator-(GridFunction a, const GridFunction& b) {
    return a -= b;
  }
  friend GridFunction operator*(double s, GridFunction a) { return a *= s; }

 private:
  Grid grid_;
  std::vector<double> values_;
};

void require_same_grid(const Grid& a, const Grid& b, const char* where);

double inner(const GridFunction& u, const GridFunction& v);
double norm_l2(const GridFunction& u);
double norm_l1(const GridFunction& u);
double norm_max(const GridFunction& u);

/// y + delta * e / ||e||_{L2} with e a seeded standard-normal node vector.
GridFunction add_noise(const GridFunction& y, double delta, std::uint64_t seed);

/// Discretized integral operator (Ax)(s_i) = sum_j K_ij w_j x_j with the
/// kernel stored densely (rows = output nodes, cols = input nodes). The
/// adjoint is taken with respect to the weighted inner products, so
/// <Ax, z>_out = <x, A*z>_in holds exactly up to round-off.
class DenseOperator {
 public:
  DenseOperator(Grid in, Grid out, std::vector<double> kernel);
  /// K_ij = phi(t_j, s_i) on interval grids.
  static DenseOperator from_kernel(
      Grid in, Grid out, const std::function<double(double, double)>& phi);

  const Grid& input_grid() const { return in_; }
  const Grid& output_grid() const { return out_; }
  std::span<const double> kernel() const { return kernel_; }

  GridFunction apply(const GridFunction& x) const;
  GridFunction adjoint_apply(const GridFunction& z) const;
  /// ||A||_{L1 -> L2} = max_j ||K(., t_j)||_{L2(out)}, exact for the discrete operator.
  double norm_l1_to_l2() const;

 private:
  Grid in_;
  Grid out_;
  std::vector<double> kernel_;
};

/// Integral operator with a kernel of finite rank,
/// phi(t, s) = sum_r out_factor_r(s) * in_factor_r(t). Applies in O(rank * n).
class SeparableOperator {
 public:
  SeparableOperator(Grid in, Grid out, std::vector<GridFunction> out_factors,
                    std::vector<GridFunction> in_factors);

  const Grid& input_grid() const { return in_; }
  const Grid& output_grid() const { return out_; }
  std::size_t rank() const { return out_factors_.size(); }

  GridFunction apply(const GridFunction& x) const;
  GridFunction adjoint_apply(const GridFunction& z) const;
  double norm_l1_to_l2() const;
  DenseOperator to_dense() const;

 private:
  Grid in_;
  Grid out_;
  std::vector<GridFunction> out_factors_;
  std::vector<GridFunction> in_factors_;
};

struct PowerIterationResult {
  double norm = 0.0;  // estimate of ||A|| = sqrt(lambda_max(A*A))
  int iterations = 0;
  bool converged = false;
};

/// Power iteration on the normal operator A*A (supplied as a callable).
/// Stops when the Rayleigh quotient changes by less than rtol relative.
PowerIterationResult power_iteration(
    const Grid& input,
    const std::function<GridFunction(const GridFunction&)>& normal_op,
    std::uint64_t seed, int max_iter = 200, double rtol = 1e-10);

}  // namespace mlw
