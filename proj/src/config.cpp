#include "mlw/config.hpp"

#include <boost/algorithm/string.hpp>
#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <fstream>
#include <stdexcept>

namespace mlw {

namespace pt = boost::property_tree;

namespace {

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> parts;
  boost::split(parts, s, boost::is_any_of(","));
  std::vector<std::string> out;
  for (auto& p : parts) {
    boost::trim(p);
    if (!p.empty()) out.push_back(p);
  }
  return out;
}

Problem parse_problem(const std::string& s) {
  if (s == "entropy_integral") return Problem::EntropyIntegral;
  if (s == "pde_coefficient") return Problem::PdeCoefficient;
  if (s == "smd_synthetic") return Problem::SmdSynthetic;
  throw std::invalid_argument("unknown problem '" + s + "'");
}

StopKind parse_stop(const std::string& s) {
  if (s == "discrepancy") return StopKind::Discrepancy;
  if (s == "apriori") return StopKind::APriori;
  if (s == "maxiter") return StopKind::MaxIter;
  throw std::invalid_argument("unknown stopping rule '" + s + "'");
}

CapMode parse_cap(const std::string& s) {
  if (s == "min") return CapMode::Min;
  if (s == "max") return CapMode::Max;
  throw std::invalid_argument("unknown cap_mode '" + s + "'");
}

}  // namespace

const char* to_string(Problem p) {
  switch (p) {
    case Problem::EntropyIntegral: return "entropy_integral";
    case Problem::PdeCoefficient: return "pde_coefficient";
    case Problem::SmdSynthetic: return "smd_synthetic";
  }
  return "unknown";
}

const char* to_string(RuleKind r) {
  switch (r) {
    case RuleKind::Rule1: return "rule1";
    case RuleKind::Rule2: return "rule2";
    case RuleKind::Rule3: return "rule3";
  }
  return "unknown";
}

RuleKind parse_rule(const std::string& s) {
  if (s == "rule1") return RuleKind::Rule1;
  if (s == "rule2") return RuleKind::Rule2;
  if (s == "rule3") return RuleKind::Rule3;
  throw std::invalid_argument("unknown rule '" + s + "'");
}

std::size_t ExperimentConfig::grid_n(bool fast) const {
  if (!fast) return n;
  return problem == Problem::PdeCoefficient ? std::min<std::size_t>(n, 32) : fast_n;
}

double ExperimentConfig::effective_eta() const {
  if (eta) return *eta;
  return problem == Problem::PdeCoefficient ? 0.04 : 0.0;
}

ExperimentConfig default_config(Problem p) {
  ExperimentConfig c;
  c.problem = p;
  if (p == Problem::PdeCoefficient) {
    c.n = 64;
    c.tau = 1.1;
    c.rules = {RuleKind::Rule2, RuleKind::Rule3};
    c.deltas = {1e-2, 1e-3, 1e-4};
  }
  return c;
}

ExperimentConfig parse_config(std::istream& is) {
  pt::ptree tree;
  pt::read_ini(is, tree);

  const auto problem = parse_problem(tree.get<std::string>("experiment.problem"));
  ExperimentConfig c = default_config(problem);
  c.n = tree.get("experiment.n", c.n);
  c.fast_n = tree.get("experiment.fast_n", c.fast_n);
  c.domain_lo = tree.get("experiment.domain_lo", c.domain_lo);
  c.domain_hi = tree.get("experiment.domain_hi", c.domain_hi);
  c.kernel_storage = tree.get("experiment.kernel_storage", c.kernel_storage);

  if (auto rules = tree.get_optional<std::string>("rule.rules")) {
    c.rules.clear();
    for (const auto& r : split_list(*rules)) c.rules.push_back(parse_rule(r));
  }
  c.tau = tree.get("rule.tau", c.tau);
  c.gamma_bar = tree.get("rule.gamma_bar", c.gamma_bar);
  c.gamma0 = tree.get("rule.gamma0", c.gamma0);
  if (auto eta = tree.get_optional<double>("rule.eta")) c.eta = *eta;
  if (auto cap = tree.get_optional<std::string>("rule.cap_mode")) c.cap = parse_cap(*cap);

  if (auto kind = tree.get_optional<std::string>("stopping.kind")) c.stop = parse_stop(*kind);
  c.apriori_c = tree.get("stopping.c", c.apriori_c);
  c.k_max = tree.get("stopping.k_max", c.k_max);
  c.safety_cap = tree.get("stopping.safety_cap", c.safety_cap);

  if (auto d = tree.get_optional<std::string>("noise.deltas")) {
    c.deltas.clear();
    for (const auto& v : split_list(*d)) c.deltas.push_back(std::stod(v));
  }
  if (auto s = tree.get_optional<std::string>("noise.seeds")) {
    c.seeds.clear();
    for (const auto& v : split_list(*s)) c.seeds.push_back(std::stoull(v));
  }
  c.out_dir = tree.get("output.dir", c.out_dir);

  c.smd.blocks = tree.get("smd.blocks", c.smd.blocks);
  c.smd.n = tree.get("smd.n", c.smd.n);
  c.smd.steps = tree.get("smd.steps", c.smd.steps);
  c.smd.schedule = tree.get("smd.schedule", c.smd.schedule);
  c.smd.gamma_factor = tree.get("smd.gamma_factor", c.smd.gamma_factor);
  c.smd.alpha = tree.get("smd.alpha", c.smd.alpha);
  c.smd.beta = tree.get("smd.beta", c.smd.beta);
  if (auto r = tree.get_optional<std::string>("smd.regularizers"))
    c.smd.regularizers = split_list(*r);
  return c;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open config '" + path + "'");
  return parse_config(is);
}

StepSizeRule make_rule(const ExperimentConfig& cfg, RuleKind kind, double delta) {
  const double eta = cfg.effective_eta();
  switch (kind) {
    case RuleKind::Rule1:
      return cfg.stop == StopKind::APriori ? apriori_constant(eta) : rule1(cfg.tau, eta);
    case RuleKind::Rule2:
      return rule2(cfg.tau, eta, cfg.gamma_bar, cfg.cap);
    case RuleKind::Rule3:
      return rule3(delta, cfg.tau, eta, cfg.gamma0, cfg.gamma_bar, cfg.cap);
  }
  throw std::invalid_argument("unknown rule");
}

StoppingRule make_stop(const ExperimentConfig& cfg, double delta) {
  switch (cfg.stop) {
    case StopKind::Discrepancy: return Discrepancy{cfg.tau, delta};
    case StopKind::APriori: return APriori{cfg.apriori_c, delta};
    case StopKind::MaxIter: return MaxIter{cfg.k_max};
  }
  throw std::invalid_argument("unknown stopping rule");
}

void validate(const ExperimentConfig& cfg) {
  if (cfg.problem == Problem::SmdSynthetic) {
    if (cfg.smd.blocks < 1 || cfg.smd.n < 2 || cfg.smd.steps < 1)
      throw std::invalid_argument("smd needs blocks >= 1, n >= 2, steps >= 1");
    if (cfg.smd.schedule != "constant" && cfg.smd.schedule != "polynomial")
      throw std::invalid_argument("smd schedule must be constant or polynomial");
    if (!(cfg.smd.gamma_factor > 0.0 && cfg.smd.gamma_factor < 2.0))
      throw std::invalid_argument("smd gamma_factor must lie in (0, 2)");
    if (cfg.seeds.empty()) throw std::invalid_argument("no seeds");
    return;
  }
  if (cfg.rules.empty()) throw std::invalid_argument("no step-size rules selected");
  if (cfg.deltas.empty()) throw std::invalid_argument("no noise levels");
  if (cfg.seeds.empty()) throw std::invalid_argument("no seeds");
  if (cfg.kernel_storage != "separable" && cfg.kernel_storage != "dense")
    throw std::invalid_argument("kernel_storage must be separable or dense");
  if (cfg.problem == Problem::PdeCoefficient) {
    for (auto r : cfg.rules)
      if (r == RuleKind::Rule1)
        throw std::invalid_argument(
            "rule1 needs an analytic operator bound; the pde problem offers rule2/rule3");
  }
  const Regularizer R = cfg.problem == Problem::EntropyIntegral
                            ? Regularizer::entropy_simplex()
                            : Regularizer::unconstrained_quadratic();
  for (double d : cfg.deltas) {
    if (!(d > 0.0)) throw std::invalid_argument("noise levels must be positive");
    for (auto r : cfg.rules) validate(make_rule(cfg, r, d), make_stop(cfg, d), R);
  }
}

}  // namespace mlw
