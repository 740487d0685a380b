#pragma once

#include "mlw/convex.hpp"
#include "mlw/forward.hpp"
#include "mlw/numgrid.hpp"

namespace mlw {

/// An inverse problem with known truth: F(x_truth) = y_exact.
struct Experiment {
  ForwardOperator F;
  Regularizer R;
  GridFunction x_truth;
  GridFunction y_exact;
  GridFunction xi0;
  double L = 0.0;    // step-size bound in the regularizer's rate norm
  double eta = 0.0;  // tangential-cone constant fed to the step rules
};

enum class KernelStorage { Separable, Dense };

/// Root of e^{1.5a-1}(e^a - 1)/a = 1, so that e^{1.5a-1+at} integrates to 1.
double entropy_exponent();
/// x(t) = e^{1.5a-1+at}, the density used as truth.
double entropy_truth(double t);

/// int_0^1 (1+t+s) x(t) dt on n subintervals with the entropy regularizer.
/// The truth is normalized to unit discrete mass.
Experiment setup_entropy_experiment(std::size_t n,
                                    KernelStorage storage = KernelStorage::Separable);

struct PdeSetup {
  double lo = -1.0;
  double hi = 1.0;
  double cg_rtol = 1e-10;
  std::uint64_t norm_seed = 1;
};

/// c(x,y) = (max{1 - 9(x^2+y^2), 0})^2, the coefficient used as truth.
double pde_truth(double x, double y);

/// -Lap u + c u = f with f = -4 + (1+x^2+y^2) c_truth and Dirichlet data
/// g = 1+x^2+y^2 on the square [lo,hi]^2, nonnegativity regularizer, and the
/// data y computed by the discrete solver at c_truth. Boundary node values of
/// the truth are zeroed: they do not enter the discrete forward map.
Experiment setup_pde_experiment(std::size_t n, const PdeSetup& setup = {});

}  // namespace mlw
