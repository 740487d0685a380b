#include "mlw/solver.hpp"

#include <cmath>
#include <fmt/format.h>
#include <ostream>

namespace mlw {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

double combine(double ratio, double gamma_bar, CapMode cap) {
  return cap == CapMode::Min ? std::min(ratio, gamma_bar)
                             : std::max(ratio, gamma_bar);
}

bool adaptive_branch(const AdaptiveDiscrepancy& a, double residual) {
  return residual > 0.0 && residual >= a.tau * a.delta;
}

bool needs_bound_now(const StepSizeRule& rule, double residual) {
  return std::visit(
      overloaded{
          [](const ConstantStep&) { return true; },
          [](const MinimalErrorCapped&) { return false; },
          [&](const AdaptiveDiscrepancy& a) { return !adaptive_branch(a, residual); },
      },
      rule);
}

std::string fmt_opt(const std::optional<double>& v) {
  return v ? fmt::format("{:.17g}", *v) : std::string();
}

}  // namespace

double discrepancy_gamma(double tau, double eta) {
  return 1.98 * (1.0 - eta - (1.0 + eta) / tau);
}

StepSizeRule rule1(double tau, double eta) {
  return ConstantStep{discrepancy_gamma(tau, eta)};
}

StepSizeRule rule2(double tau, double eta, double gamma_bar, CapMode cap) {
  return MinimalErrorCapped{discrepancy_gamma(tau, eta), gamma_bar, cap};
}

StepSizeRule rule3(double delta, double tau, double eta, double gamma0,
                   double gamma_bar, CapMode cap) {
  return AdaptiveDiscrepancy{gamma0, gamma_bar, tau, eta, delta, cap};
}

StepSizeRule apriori_constant(double eta) { return ConstantStep{1.98 * (1.0 - eta)}; }

StepResult step_size(const StepSizeRule& rule, double residual, double grad_norm,
                     double L) {
  return std::visit(
      overloaded{
          [&](const ConstantStep& c) { return StepResult{c.gamma / (L * L), false}; },
          [&](const MinimalErrorCapped& m) {
            if (grad_norm == 0.0) return StepResult{m.gamma_bar, residual > 0.0};
            const double ratio =
                m.gamma * residual * residual / (grad_norm * grad_norm);
            return StepResult{combine(ratio, m.gamma_bar, m.cap), false};
          },
          [&](const AdaptiveDiscrepancy& a) {
            if (!adaptive_branch(a, residual))
              return StepResult{
                  combine(a.gamma0 * (1.0 - a.eta) / (L * L), a.gamma_bar, a.cap),
                  false};
            if (grad_norm == 0.0) return StepResult{a.gamma_bar, true};
            const double ratio =
                a.gamma0 * ((1.0 - a.eta) * residual - (1.0 + a.eta) * a.delta) *
                residual / (grad_norm * grad_norm);
            return StepResult{combine(ratio, a.gamma_bar, a.cap), false};
          },
      },
      rule);
}

std::pair<double, double> step_bounds(const StepSizeRule& rule, double L) {
  const double L2 = L * L;
  return std::visit(
      overloaded{
          [&](const ConstantStep& c) { return std::pair{c.gamma / L2, c.gamma / L2}; },
          [&](const MinimalErrorCapped& m) {
            return std::pair{std::min(m.gamma / L2, m.gamma_bar), m.gamma_bar};
          },
          [&](const AdaptiveDiscrepancy& a) {
            const double lo =
                a.gamma0 * (1.0 - a.eta - (1.0 + a.eta) / a.tau) / L2;
            return std::pair{std::min(lo, a.gamma_bar), a.gamma_bar};
          },
      },
      rule);
}

bool rule_needs_bound(const StepSizeRule& rule) {
  return !std::holds_alternative<MinimalErrorCapped>(rule);
}

long apriori_index(const APriori& a) {
  return static_cast<long>(std::floor(a.c / a.delta));
}

void validate(const StepSizeRule& rule, const StoppingRule& stop,
              const Regularizer& r) {
  const double four_sigma = 4.0 * r.sigma();
  auto fail = [](const std::string& msg) { throw std::invalid_argument(msg); };
  std::visit(
      overloaded{
          [&](const ConstantStep& c) {
            if (!(c.gamma > 0.0 && c.gamma < four_sigma))
              fail(fmt::format("constant step needs 0 < gamma < 4 sigma, got {}", c.gamma));
          },
          [&](const MinimalErrorCapped& m) {
            if (!(m.gamma > 0.0 && m.gamma < four_sigma))
              fail(fmt::format("rule 2 needs 0 < gamma < 4 sigma, got {}", m.gamma));
            if (!(m.gamma_bar > 0.0)) fail("rule 2 needs gamma_bar > 0");
          },
          [&](const AdaptiveDiscrepancy& a) {
            if (!(a.gamma0 > 0.0 && a.gamma0 < four_sigma))
              fail(fmt::format("rule 3 needs 0 < gamma0 < 4 sigma, got {}", a.gamma0));
            if (!(a.gamma_bar > 0.0)) fail("rule 3 needs gamma_bar > 0");
            if (!(a.eta >= 0.0 && a.eta < 1.0)) fail("rule 3 needs 0 <= eta < 1");
            if (!(a.tau > (1.0 + a.eta) / (1.0 - a.eta)))
              fail("rule 3 needs tau > (1 + eta)/(1 - eta)");
            if (!(a.delta >= 0.0)) fail("rule 3 needs delta >= 0");
            if (const auto* d = std::get_if<Discrepancy>(&stop)) {
              if (d->tau != a.tau || d->delta != a.delta)
                fail("rule 3 and the discrepancy principle disagree on tau/delta");
            }
          },
      },
      rule);
  std::visit(overloaded{
                 [&](const APriori& a) {
                   if (!(a.c > 0.0 && a.delta > 0.0))
                     fail("a-priori stopping needs c > 0 and delta > 0");
                 },
                 [&](const Discrepancy& d) {
                   if (!(d.tau > 1.0)) fail("discrepancy principle needs tau > 1");
                   if (!(d.delta >= 0.0)) fail("discrepancy principle needs delta >= 0");
                 },
                 [&](const MaxIter& m) {
                   if (m.k_max < 0) fail("max-iter stopping needs k_max >= 0");
                 },
             },
             stop);
}

const char* to_string(StopReason r) {
  switch (r) {
    case StopReason::Discrepancy: return "discrepancy";
    case StopReason::APrioriBudget: return "apriori";
    case StopReason::MaxIter: return "maxiter";
  }
  return "unknown";
}

MaxIterExceeded::MaxIterExceeded(RunResult p)
    : std::runtime_error(fmt::format("safety cap of {} iterations exceeded",
                                     p.k_stop)),
      partial(std::move(p)) {}

StepOutcome iterate_once(const IterateState& state, const ForwardOperator& F,
                         const Regularizer& R, const GridFunction& y_delta,
                         const StepSizeRule& rule, double L) {
  const auto at = F.evaluate(state.x);
  const GridFunction r = at.value - y_delta;
  const GridFunction g = F.deriv_adjoint_apply(at, r);
  IterateRecord rec;
  rec.residual = norm_l2(r);
  const StepResult st = step_size(rule, rec.residual, dual_norm_of(R, g), L);
  rec.step = st.value;
  rec.degenerate = st.degenerate;
  GridFunction xi = state.xi;
  xi.axpy(-st.value, g);
  GridFunction x = mirror_map(R, xi);
  return {{std::move(x), std::move(xi)}, rec};
}

RunResult run(const ForwardOperator& F, const Regularizer& R,
              const GridFunction& y_delta, const StepSizeRule& rule,
              const StoppingRule& stop, const RunOptions& opts) {
  validate(rule, stop, R);
  require_same_grid(y_delta.grid(), F.output_grid(), "run: data");
  if (opts.lambda_tracking && !F.is_linear())
    throw std::invalid_argument("lambda tracking needs a linear operator");

  const GridFunction xi0 = opts.xi0 ? *opts.xi0 : GridFunction(F.input_grid());
  RunResult res{mirror_map(R, xi0), xi0, 0, StopReason::MaxIter, {}};
  std::optional<double> L = opts.L;
  std::optional<GridFunction> lambda;
  if (opts.lambda_tracking) lambda.emplace(F.output_grid());

  const long k_target = std::visit(
      overloaded{
          [](const APriori& a) { return apriori_index(a); },
          [](const Discrepancy&) { return -1L; },
          [](const MaxIter& m) { return m.k_max; },
      },
      stop);
  const auto* dp = std::get_if<Discrepancy>(&stop);

  for (long k = 0;; ++k) {
    const auto at = F.evaluate(res.x);
    const GridFunction r = at.value - y_delta;
    IterateRecord rec;
    rec.k = k;
    rec.residual = norm_l2(r);
    if (opts.x_truth) {
      rec.bregman = bregman(R, {res.x, res.xi}, *opts.x_truth);
      rec.error = rate_norm_of(R, res.x - *opts.x_truth);
    }
    if (lambda) {
      GridFunction d = res.xi - xi0;
      d -= F.deriv_adjoint_apply(at, *lambda);
      rec.lambda_defect = norm_l2(d);
      rec.xi_norm = norm_l2(res.xi);
    }

    bool done = false;
    if (dp && rec.residual <= dp->tau * dp->delta) {
      res.reason = StopReason::Discrepancy;
      done = true;
    } else if (k == k_target) {
      res.reason = std::holds_alternative<APriori>(stop) ? StopReason::APrioriBudget
                                                         : StopReason::MaxIter;
      done = true;
    }
    if (done) {
      res.k_stop = k;
      res.records.push_back(rec);
      return res;
    }
    if (k >= opts.safety_cap) {
      res.k_stop = k;
      res.records.push_back(rec);
      throw MaxIterExceeded(std::move(res));
    }

    const GridFunction g = F.deriv_adjoint_apply(at, r);
    if (!L && needs_bound_now(rule, rec.residual)) L = F.norm_bound(R.rate_norm());
    const StepResult st =
        step_size(rule, rec.residual, dual_norm_of(R, g), L.value_or(0.0));
    rec.step = st.value;
    rec.degenerate = st.degenerate;
    res.records.push_back(rec);

    res.xi.axpy(-st.value, g);
    res.x = mirror_map(R, res.xi);
    if (lambda) lambda->axpy(-st.value, r);
  }
}

void write_iterates_csv(std::ostream& os, const std::vector<IterateRecord>& records) {
  os << "k,residual,step,bregman,error,lambda_defect\n";
  for (const auto& r : records) {
    os << fmt::format("{},{:.17g},{},{},{},{}\n", r.k, r.residual, fmt_opt(r.step),
                      fmt_opt(r.bregman), fmt_opt(r.error), fmt_opt(r.lambda_defect));
  }
}

}  // namespace mlw
