#pragma once

#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <variant>
#include <vector>

#include "mlw/convex.hpp"
#include "mlw/forward.hpp"
#include "mlw/numgrid.hpp"

namespace mlw {

/// How the adaptive rules combine their ratio with gamma_bar. Min is the cap
/// the convergence theory needs; Max reproduces the alternative reading of
/// the published rules and is only for replication experiments.
enum class CapMode { Min, Max };

/// gamma_k = gamma / L^2.
struct ConstantStep {
  double gamma = 0.0;
};

/// gamma_k = min{gamma ||r||^2 / ||F'(x)* r||^2, gamma_bar}.
struct MinimalErrorCapped {
  double gamma = 0.0;
  double gamma_bar = 600.0;
  CapMode cap = CapMode::Min;
};

/// gamma_k = min{gamma0 ((1-eta)||r|| - (1+eta) delta) ||r|| / ||F'(x)* r||^2,
///               gamma_bar} while ||r|| >= tau delta, and
/// min{gamma0 (1-eta) / L^2, gamma_bar} below that.
struct AdaptiveDiscrepancy {
  double gamma0 = 1.98;
  double gamma_bar = 600.0;
  double tau = 1.1;
  double eta = 0.0;
  double delta = 0.0;
  CapMode cap = CapMode::Min;
};

using StepSizeRule = std::variant<ConstantStep, MinimalErrorCapped, AdaptiveDiscrepancy>;

/// gamma = 1.98 (1 - eta - (1 + eta)/tau), the constant shared by rules 1 and 2.
double discrepancy_gamma(double tau, double eta);
StepSizeRule rule1(double tau, double eta);
StepSizeRule rule2(double tau, double eta, double gamma_bar = 600.0,
                   CapMode cap = CapMode::Min);
StepSizeRule rule3(double delta, double tau, double eta, double gamma0 = 1.98,
                   double gamma_bar = 600.0, CapMode cap = CapMode::Min);
/// Constant step gamma = 1.98 (1 - eta) for a-priori stopping, where no tau exists.
StepSizeRule apriori_constant(double eta);

struct StepResult {
  double value = 0.0;
  bool degenerate = false;  // zero gradient with a residual above the target
};

StepResult step_size(const StepSizeRule& rule, double residual, double grad_norm,
                     double L);
/// The interval [lower, upper] every step of the rule lies in (condition on
/// admissible step sizes); only meaningful in CapMode::Min.
std::pair<double, double> step_bounds(const StepSizeRule& rule, double L);
bool rule_needs_bound(const StepSizeRule& rule);

struct APriori {
  double c = 1.0;
  double delta = 0.0;
};
struct Discrepancy {
  double tau = 1.1;
  double delta = 0.0;
};
struct MaxIter {
  long k_max = 0;
};
using StoppingRule = std::variant<APriori, Discrepancy, MaxIter>;

/// floor(c / delta).
long apriori_index(const APriori& a);

/// Throws std::invalid_argument on inconsistent rule / stop parameters.
void validate(const StepSizeRule& rule, const StoppingRule& stop,
              const Regularizer& r);

enum class StopReason { Discrepancy, APrioriBudget, MaxIter };
const char* to_string(StopReason r);

struct IterateRecord {
  long k = 0;
  double residual = 0.0;           // ||F(x_k) - y_delta||_{L2}
  std::optional<double> step;      // gamma_k, absent on the terminal record
  bool degenerate = false;
  std::optional<double> bregman;   // D^{xi_k}(x_truth, x_k)
  std::optional<double> error;     // ||x_k - x_truth|| in the rate norm
  std::optional<double> lambda_defect;  // ||xi_k - xi_0 - A* lambda_k||_{L2}
  std::optional<double> xi_norm;        // ||xi_k||_{L2}, logged with lambda_defect
};

struct RunResult {
  GridFunction x;
  GridFunction xi;
  long k_stop = 0;
  StopReason reason = StopReason::MaxIter;
  std::vector<IterateRecord> records;
};

struct RunOptions {
  std::optional<GridFunction> xi0;      // default: zero
  std::optional<GridFunction> x_truth;  // enables bregman/error diagnostics
  bool lambda_tracking = false;         // linear operators only
  std::optional<double> L;              // default: F.norm_bound(rate norm)
  long safety_cap = 1'000'000;
};

/// Thrown when the safety cap is hit; carries the partial run.
class MaxIterExceeded : public std::runtime_error {
 public:
  explicit MaxIterExceeded(RunResult partial);
  RunResult partial;
};

struct IterateState {
  GridFunction x;
  GridFunction xi;
};

struct StepOutcome {
  IterateState next;
  IterateRecord record;
};

/// One mirror-descent step: xi' = xi - gamma F'(x)*(F(x) - y), x' = grad R*(xi').
StepOutcome iterate_once(const IterateState& state, const ForwardOperator& F,
                         const Regularizer& R, const GridFunction& y_delta,
                         const StepSizeRule& rule, double L);

RunResult run(const ForwardOperator& F, const Regularizer& R,
              const GridFunction& y_delta, const StepSizeRule& rule,
              const StoppingRule& stop, const RunOptions& opts = {});

/// CSV with header k,residual,step,bregman,error,lambda_defect.
void write_iterates_csv(std::ostream& os, const std::vector<IterateRecord>& records);

}  // namespace mlw
