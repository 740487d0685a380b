#include "mlw/kernels.hpp"

#include <cassert>
#include <cmath>
#include <vector>

namespace mlw::kernels {

namespace serial {

double weighted_dot(std::span<const double> w, std::span<const double> u,
                    std::span<const double> v) {
  double s = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) s += w[i] * u[i] * v[i];
  return s;
}

double weighted_abs_sum(std::span<const double> w, std::span<const double> u) {
  double s = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) s += w[i] * std::abs(u[i]);
  return s;
}

void matvec(std::span<const double> a, std::size_t rows, std::size_t cols,
            std::span<const double> x, std::span<double> y) {
  for (std::size_t i = 0; i < rows; ++i) {
    const double* row = a.data() + i * cols;
    double s = 0.0;
    for (std::size_t j = 0; j < cols; ++j) s += row[j] * x[j];
    y[i] = s;
  }
}

void matvec_transpose(std::span<const double> a, std::size_t rows,
                      std::size_t cols, std::span<const double> x,
                      std::span<double> y) {
  for (std::size_t j = 0; j < cols; ++j) y[j] = 0.0;
  for (std::size_t i = 0; i < rows; ++i) {
    const double* row = a.data() + i * cols;
    const double xi = x[i];
    for (std::size_t j = 0; j < cols; ++j) y[j] += row[j] * xi;
  }
}

void stencil5(std::size_t m, double inv_h2, std::span<const double> c,
              std::span<const double> u, std::span<double> out) {
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < m; ++j) {
      const std::size_t p = i * m + j;
      double nb = 0.0;
      if (i > 0) nb += u[p - m];
      if (i + 1 < m) nb += u[p + m];
      if (j > 0) nb += u[p - 1];
      if (j + 1 < m) nb += u[p + 1];
      out[p] = (4.0 * u[p] - nb) * inv_h2 + c[p] * u[p];
    }
  }
}

}  // namespace serial

namespace {

template <typename BlockSum>
double blocked_reduce(std::size_t n, BlockSum&& block_sum) {
  const std::size_t nblocks = (n + kReduceBlock - 1) / kReduceBlock;
  if (nblocks <= 1) return n == 0 ? 0.0 : block_sum(0, n);
  std::vector<double> partial(nblocks);
  const auto nb = static_cast<long>(nblocks);
#pragma omp parallel for schedule(static)
  for (long b = 0; b < nb; ++b) {
    const std::size_t lo = static_cast<std::size_t>(b) * kReduceBlock;
    const std::size_t hi = std::min(n, lo + kReduceBlock);
    partial[static_cast<std::size_t>(b)] = block_sum(lo, hi);
  }
  double s = 0.0;
  for (double p : partial) s += p;
  return s;
}

}  // namespace

double weighted_dot(std::span<const double> w, std::span<const double> u,
                    std::span<const double> v) {
  assert(w.size() == u.size() && u.size() == v.size());
  return blocked_reduce(w.size(), [&](std::size_t lo, std::size_t hi) {
    double s = 0.0;
    for (std::size_t i = lo; i < hi; ++i) s += w[i] * u[i] * v[i];
    return s;
  });
}

double weighted_abs_sum(std::span<const double> w, std::span<const double> u) {
  assert(w.size() == u.size());
  return blocked_reduce(w.size(), [&](std::size_t lo, std::size_t hi) {
    double s = 0.0;
    for (std::size_t i = lo; i < hi; ++i) s += w[i] * std::abs(u[i]);
    return s;
  });
}

double dot(std::span<const double> u, std::span<const double> v) {
  assert(u.size() == v.size());
  return blocked_reduce(u.size(), [&](std::size_t lo, std::size_t hi) {
    double s = 0.0;
    for (std::size_t i = lo; i < hi; ++i) s += u[i] * v[i];
    return s;
  });
}

void matvec(std::span<const double> a, std::size_t rows, std::size_t cols,
            std::span<const double> x, std::span<double> y) {
  assert(a.size() == rows * cols && x.size() == cols && y.size() == rows);
  const auto nr = static_cast<long>(rows);
#pragma omp parallel for schedule(static)
  for (long ii = 0; ii < nr; ++ii) {
    const auto i = static_cast<std::size_t>(ii);
    const double* row = a.data() + i * cols;
    double s = 0.0;
    for (std::size_t j = 0; j < cols; ++j) s += row[j] * x[j];
    y[i] = s;
  }
}

void matvec_transpose(std::span<const double> a, std::size_t rows,
                      std::size_t cols, std::span<const double> x,
                      std::span<double> y) {
  assert(a.size() == rows * cols && x.size() == rows && y.size() == cols);
  // Column strips: each thread owns a contiguous range of y and sweeps all
  // rows in order, so the summation order matches the reference.
  constexpr std::size_t kStrip = 256;
  const auto nstrips = static_cast<long>((cols + kStrip - 1) / kStrip);
#pragma omp parallel for schedule(static)
  for (long s = 0; s < nstrips; ++s) {
    const std::size_t lo = static_cast<std::size_t>(s) * kStrip;
    const std::size_t hi = std::min(cols, lo + kStrip);
    for (std::size_t j = lo; j < hi; ++j) y[j] = 0.0;
    for (std::size_t i = 0; i < rows; ++i) {
      const double* row = a.data() + i * cols;
      const double xi = x[i];
      for (std::size_t j = lo; j < hi; ++j) y[j] += row[j] * xi;
    }
  }
}

void stencil5(std::size_t m, double inv_h2, std::span<const double> c,
              std::span<const double> u, std::span<double> out) {
  assert(c.size() == m * m && u.size() == m * m && out.size() == m * m);
  const auto nm = static_cast<long>(m);
#pragma omp parallel for schedule(static)
  for (long ii = 0; ii < nm; ++ii) {
    const auto i = static_cast<std::size_t>(ii);
    for (std::size_t j = 0; j < m; ++j) {
      const std::size_t p = i * m + j;
      double nb = 0.0;
      if (i > 0) nb += u[p - m];
      if (i + 1 < m) nb += u[p + m];
      if (j > 0) nb += u[p - 1];
      if (j + 1 < m) nb += u[p + 1];
      out[p] = (4.0 * u[p] - nb) * inv_h2 + c[p] * u[p];
    }
  }
}

}  // namespace mlw::kernels
