#pragma once

#include <cstddef>
#include <span>

// Inner loops shared by the grid, operator and PDE code.
//
// Every kernel exists twice: a plain loop under `kernels::serial`, kept as the
// reference the tests and the benchmark compare against, and an OpenMP version
// used by the library. Matrix-vector products and the stencil assign each
// output entry to exactly one thread and accumulate in the same order as the
// reference, so they agree bit-for-bit. The reductions sum fixed-size blocks
// and combine the block partials in order, which makes the result independent
// of the thread count (but not bit-equal to the naive serial loop).
namespace mlw::kernels {

/// Block length of the deterministic parallel reductions.
inline constexpr std::size_t kReduceBlock = 2048;

namespace serial {

double weighted_dot(std::span<const double> w, std::span<const double> u,
                    std::span<const double> v);
double weighted_abs_sum(std::span<const double> w, std::span<const double> u);

// y = A x for a row-major rows x cols matrix.
void matvec(std::span<const double> a, std::size_t rows, std::size_t cols,
            std::span<const double> x, std::span<double> y);
// y = A^T x.
void matvec_transpose(std::span<const double> a, std::size_t rows,
                      std::size_t cols, std::span<const double> x,
                      std::span<double> y);

// out = (-Lap_h + diag(c)) u on an m x m interior block with zero Dirichlet
// data outside it; inv_h2 = 1/h^2.
void stencil5(std::size_t m, double inv_h2, std::span<const double> c,
              std::span<const double> u, std::span<double> out);

}  // namespace serial

double weighted_dot(std::span<const double> w, std::span<const double> u,
                    std::span<const double> v);
double weighted_abs_sum(std::span<const double> w, std::span<const double> u);
double dot(std::span<const double> u, std::span<const double> v);

void matvec(std::span<const double> a, std::size_t rows, std::size_t cols,
            std::span<const double> x, std::span<double> y);
void matvec_transpose(std::span<const double> a, std::size_t rows,
                      std::size_t cols, std::span<const double> x,
                      std::span<double> y);
void stencil5(std::size_t m, double inv_h2, std::span<const double> c,
              std::span<const double> u, std::span<double> out);

}  // namespace mlw::kernels
