#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <variant>
#include <vector>

#include "mlw/convex.hpp"
#include "mlw/forward.hpp"
#include "mlw/rng.hpp"

namespace mlw {

/// F_i(x) = y_i, i = 0..N-1, all blocks on one input grid.
class SystemProblem {
 public:
  SystemProblem(std::vector<ForwardOperator> blocks, std::vector<GridFunction> data);

  std::size_t size() const { return blocks_.size(); }
  const ForwardOperator& block(std::size_t i) const { return blocks_[i]; }
  const GridFunction& data(std::size_t i) const { return data_[i]; }
  const Grid& input_grid() const { return blocks_.front().input_grid(); }
  /// max_i of the block bounds in the given norm.
  double norm_bound(RateNorm from) const;

 private:
  std::vector<ForwardOperator> blocks_;
  std::vector<GridFunction> data_;
};

struct ConstantSchedule {
  double gamma = 0.0;
};
/// gamma_k = gamma0 (k + 1)^(-alpha)
struct PolynomialSchedule {
  double gamma0 = 0.0;
  double alpha = 0.5;
};
using StepSchedule = std::variant<ConstantSchedule, PolynomialSchedule>;

double schedule_step(const StepSchedule& s, long k);
double schedule_sup(const StepSchedule& s);
/// s_k = sum_{l <= k} gamma_l for k = 0..k_max.
std::vector<double> partial_sums(const StepSchedule& s, long k_max);

class ScheduleViolation : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Requires sup gamma_k < 4 sigma (1 - eta) / L^2 and a divergent sum.
void check_schedule(const StepSchedule& s, const Regularizer& r, double L,
                    double eta = 0.0);

struct SmdRecord {
  long k = 0;
  std::optional<std::size_t> block;  // 0-based pick i_k; absent on the last record
  double gamma = 0.0;
  double s = 0.0;
  std::optional<double> bregman;     // Delta_k
  std::optional<double> s_bregman;   // s_k * Delta_k
  std::optional<double> block_residual;
  std::optional<double> lambda_defect;
};

struct SmdState {
  GridFunction x;
  GridFunction xi;
};

struct SmdStepOutcome {
  SmdState next;
  std::size_t block;
  double block_residual;
  GridFunction step_residual;  // F_i(x) - y_i, for lambda tracking
};

/// xi' = xi - gamma_k F_i'(x)*(F_i(x) - y_i) with i drawn uniformly from rng.
SmdStepOutcome smd_step(const SmdState& state, const SystemProblem& prob,
                        const Regularizer& R, const StepSchedule& sched, long k,
                        Engine& rng);

struct SmdOptions {
  std::optional<GridFunction> x_truth;
  std::optional<GridFunction> xi0;
  bool lambda_tracking = false;  // linear blocks only
  double eta = 0.0;
  std::optional<double> L;       // default: problem.norm_bound(rate norm)
};

struct SmdRun {
  std::uint64_t seed = 0;
  GridFunction x;
  GridFunction xi;
  std::vector<SmdRecord> records;  // k = 0..k_max
};

/// Runs k_max steps. The schedule is checked against the problem's bound
/// before the first step.
SmdRun smd_run(const SystemProblem& prob, const Regularizer& R,
               const StepSchedule& sched, long k_max, std::uint64_t seed,
               const SmdOptions& opts = {});

struct SourcedInstance {
  SystemProblem problem;
  GridFunction x_truth;
  GridFunction xi_truth;
  GridFunction xi0;
  std::vector<GridFunction> lambda_truth;
};

/// Random Gaussian-blur blocks A_i on an n-cell interval grid, a random
/// lambda^dagger, xi^dagger = xi0 + sum A_i* lambda_i^dagger,
/// x^dagger = grad R*(xi^dagger), y_i = A_i x^dagger. xi0 = 0.
/// dual_magnitude rescales xi^dagger - xi0 to that sup-norm (0 gives
/// lambda^dagger = 0); by default it depends on the regularizer.
SourcedInstance build_sourced_instance(std::size_t N, std::size_t n,
                                       const Regularizer& R, std::uint64_t seed,
                                       std::optional<double> dual_magnitude = {});

/// CSV with header k,i_k,gamma_k,s_k,delta_k,s_k_delta_k (i_k is 1-based).
void write_smd_csv(std::ostream& os, const std::vector<SmdRecord>& records);

}  // namespace mlw
