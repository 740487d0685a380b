#include "mlw/smd.hpp"

#include <algorithm>
#include <cmath>
#include <fmt/format.h>
#include <ostream>

namespace mlw {

namespace {

std::string fmt_opt(const std::optional<double>& v) {
  return v ? fmt::format("{:.17g}", *v) : std::string();
}

double default_dual_magnitude(const Regularizer& R) {
  if (std::holds_alternative<EntropySimplex>(R.variant())) return 2.0;
  if (const auto* e = std::get_if<ElasticNet>(&R.variant())) return e->beta + 1.0;
  return 1.0;
}

}  // namespace

SystemProblem::SystemProblem(std::vector<ForwardOperator> blocks,
                             std::vector<GridFunction> data)
    : blocks_(std::move(blocks)), data_(std::move(data)) {
  if (blocks_.empty()) throw std::invalid_argument("system needs at least one block");
  if (blocks_.size() != data_.size())
    throw std::invalid_argument("system: block/data count mismatch");
  for (std::size_t i = 0; i < blocks_.size(); ++i) {
    require_same_grid(blocks_[i].input_grid(), blocks_[0].input_grid(),
                      "system: block input grids");
    require_same_grid(data_[i].grid(), blocks_[i].output_grid(), "system: block data");
  }
}

double SystemProblem::norm_bound(RateNorm from) const {
  double L = 0.0;
  for (const auto& b : blocks_) L = std::max(L, b.norm_bound(from));
  return L;
}

double schedule_step(const StepSchedule& s, long k) {
  if (const auto* c = std::get_if<ConstantSchedule>(&s)) return c->gamma;
  const auto& p = std::get<PolynomialSchedule>(s);
  return p.gamma0 * std::pow(static_cast<double>(k + 1), -p.alpha);
}

double schedule_sup(const StepSchedule& s) { return schedule_step(s, 0); }

std::vector<double> partial_sums(const StepSchedule& s, long k_max) {
  std::vector<double> out(static_cast<std::size_t>(k_max + 1));
  double acc = 0.0;
  for (long k = 0; k <= k_max; ++k) {
    acc += schedule_step(s, k);
    out[static_cast<std::size_t>(k)] = acc;
  }
  return out;
}

void check_schedule(const StepSchedule& s, const Regularizer& r, double L,
                    double eta) {
  if (const auto* p = std::get_if<PolynomialSchedule>(&s)) {
    if (!(p->alpha > 0.0 && p->alpha < 1.0))
      throw ScheduleViolation("polynomial schedule needs 0 < alpha < 1");
  }
  const double sup = schedule_sup(s);
  const double limit = 4.0 * r.sigma() * (1.0 - eta) / (L * L);
  if (!(sup > 0.0))
    throw ScheduleViolation("step schedule must be positive");
  if (!(sup < limit))
    throw ScheduleViolation(fmt::format(
        "sup gamma_k = {} violates sup gamma_k < 4 sigma (1 - eta)/L^2 = {}", sup,
        limit));
}

SmdStepOutcome smd_step(const SmdState& state, const SystemProblem& prob,
                        const Regularizer& R, const StepSchedule& sched, long k,
                        Engine& rng) {
  const auto i = static_cast<std::size_t>(uniform_index(rng, prob.size()));
  const ForwardOperator& Fi = prob.block(i);
  const auto at = Fi.evaluate(state.x);
  GridFunction r = at.value - prob.data(i);
  const GridFunction g = Fi.deriv_adjoint_apply(at, r);
  GridFunction xi = state.xi;
  xi.axpy(-schedule_step(sched, k), g);
  GridFunction x = mirror_map(R, xi);
  const double rn = norm_l2(r);
  return {{std::move(x), std::move(xi)}, i, rn, std::move(r)};
}

SmdRun smd_run(const SystemProblem& prob, const Regularizer& R,
               const StepSchedule& sched, long k_max, std::uint64_t seed,
               const SmdOptions& opts) {
  const double L = opts.L ? *opts.L : prob.norm_bound(R.rate_norm());
  check_schedule(sched, R, L, opts.eta);
  if (opts.lambda_tracking) {
    for (std::size_t i = 0; i < prob.size(); ++i)
      if (!prob.block(i).is_linear())
        throw std::invalid_argument("lambda tracking needs linear blocks");
  }

  const GridFunction xi0 = opts.xi0 ? *opts.xi0 : GridFunction(prob.input_grid());
  SmdState st{mirror_map(R, xi0), xi0};
  std::vector<GridFunction> lambda;
  if (opts.lambda_tracking)
    for (std::size_t i = 0; i < prob.size(); ++i)
      lambda.emplace_back(prob.block(i).output_grid());

  Engine rng(seed);
  SmdRun out{seed, st.x, st.xi, {}};
  out.records.reserve(static_cast<std::size_t>(k_max + 1));
  double s = 0.0;
  for (long k = 0; k <= k_max; ++k) {
    SmdRecord rec;
    rec.k = k;
    rec.gamma = schedule_step(sched, k);
    s += rec.gamma;
    rec.s = s;
    if (opts.x_truth) {
      rec.bregman = bregman(R, {st.x, st.xi}, *opts.x_truth);
      rec.s_bregman = s * *rec.bregman;
    }
    if (opts.lambda_tracking) {
      GridFunction d = st.xi - xi0;
      for (std::size_t i = 0; i < prob.size(); ++i)
        d -= prob.block(i).deriv_adjoint_apply(st.x, lambda[i]);
      rec.lambda_defect = norm_l2(d);
    }
    if (k < k_max) {
      auto step = smd_step(st, prob, R, sched, k, rng);
      rec.block = step.block;
      rec.block_residual = step.block_residual;
      if (opts.lambda_tracking) lambda[step.block].axpy(-rec.gamma, step.step_residual);
      st = std::move(step.next);
    }
    out.records.push_back(rec);
  }
  out.x = std::move(st.x);
  out.xi = std::move(st.xi);
  return out;
}

SourcedInstance build_sourced_instance(std::size_t N, std::size_t n,
                                       const Regularizer& R, std::uint64_t seed,
                                       std::optional<double> dual_magnitude) {
  if (N < 1 || n < 2) throw std::invalid_argument("sourced instance needs N >= 1, n >= 2");
  const Grid grid = Grid::interval(n);
  Engine eng(seed);

  std::vector<ForwardOperator> blocks;
  std::vector<GridFunction> lambda;
  for (std::size_t i = 0; i < N; ++i) {
    const double shift = 0.6 * uniform01(eng) - 0.3;
    const double width = 0.05 + 0.1 * uniform01(eng);
    const double amp = 0.5 + uniform01(eng);
    auto op = DenseOperator::from_kernel(grid, grid, [=](double t, double s) {
      const double d = s - t - shift;
      return amp * std::exp(-d * d / (2.0 * width * width));
    });
    blocks.push_back(ForwardOperator::linear(std::move(op)));
    GridFunction l(grid);
    for (double& v : l.values()) v = standard_normal(eng);
    lambda.push_back(std::move(l));
  }

  const GridFunction xi0(grid);
  GridFunction dxi(grid);
  for (std::size_t i = 0; i < N; ++i) dxi += blocks[i].deriv_adjoint_apply(xi0, lambda[i]);
  const double target = dual_magnitude.value_or(default_dual_magnitude(R));
  const double scale = target == 0.0 ? 0.0 : target / norm_max(dxi);
  for (auto& l : lambda) l *= scale;
  dxi = GridFunction(grid);
  for (std::size_t i = 0; i < N; ++i) dxi += blocks[i].deriv_adjoint_apply(xi0, lambda[i]);

  GridFunction xi_truth = xi0 + dxi;
  GridFunction x_truth = mirror_map(R, xi_truth);
  std::vector<GridFunction> data;
  for (const auto& b : blocks) data.push_back(b.apply(x_truth));
  return {SystemProblem(std::move(blocks), std::move(data)), std::move(x_truth),
          std::move(xi_truth), xi0, std::move(lambda)};
}

void write_smd_csv(std::ostream& os, const std::vector<SmdRecord>& records) {
  os << "k,i_k,gamma_k,s_k,delta_k,s_k_delta_k\n";
  for (const auto& r : records) {
    os << fmt::format("{},{},{:.17g},{:.17g},{},{}\n", r.k,
                      r.block ? std::to_string(*r.block + 1) : std::string(),
                      r.gamma, r.s, fmt_opt(r.bregman), fmt_opt(r.s_bregman));
  }
}

}  // namespace mlw
