#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "mlw/solver.hpp"

namespace mlw {

enum class Problem { EntropyIntegral, PdeCoefficient, SmdSynthetic };
enum class RuleKind { Rule1, Rule2, Rule3 };
enum class StopKind { Discrepancy, APriori, MaxIter };

const char* to_string(Problem p);
const char* to_string(RuleKind r);
RuleKind parse_rule(const std::string& s);

struct SmdConfig {
  std::size_t blocks = 4;
  std::size_t n = 50;
  long steps = 10000;
  std::string schedule = "constant";  // constant | polynomial
  double gamma_factor = 1.0;          // gamma (or gamma0) = factor / L^2
  double alpha = 0.5;
  std::vector<std::string> regularizers = {"entropy_simplex", "elastic_net"};
  double beta = 0.1;
};

/// Declarative description of an experiment; loaded from an INI-style file.
struct ExperimentConfig {
  Problem problem = Problem::EntropyIntegral;
  std::size_t n = 5000;
  std::size_t fast_n = 1000;
  double domain_lo = -1.0;  // pde only
  double domain_hi = 1.0;
  std::string kernel_storage = "separable";

  std::vector<RuleKind> rules = {RuleKind::Rule1, RuleKind::Rule2, RuleKind::Rule3};
  double tau = 1.01;
  double gamma_bar = 600.0;
  double gamma0 = 1.98;
  std::optional<double> eta;  // default: 0 (entropy), 0.04 (pde)
  CapMode cap = CapMode::Min;

  StopKind stop = StopKind::Discrepancy;
  double apriori_c = 1.0;
  long k_max = 10000;
  long safety_cap = 1'000'000;

  std::vector<double> deltas = {5e-2, 5e-3, 5e-4};
  std::vector<std::uint64_t> seeds = {1, 2, 3, 4, 5};
  std::string out_dir = "out";

  SmdConfig smd;

  /// Effective grid size after --fast.
  std::size_t grid_n(bool fast) const;
  double effective_eta() const;
};

ExperimentConfig default_config(Problem p);
ExperimentConfig parse_config(std::istream& is);
ExperimentConfig load_config(const std::string& path);

/// Builds the step rule for one (rule, delta) cell. Under a-priori stopping
/// rule 1 uses the tau-free constant 1.98 (1 - eta).
StepSizeRule make_rule(const ExperimentConfig& cfg, RuleKind kind, double delta);
StoppingRule make_stop(const ExperimentConfig& cfg, double delta);

/// Checks every (rule, delta) combination; throws std::invalid_argument.
void validate(const ExperimentConfig& cfg);

}  // namespace mlw
