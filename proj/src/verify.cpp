#include "mlw/verify.hpp"

#include <boost/math/tools/minima.hpp>
#include <fmt/format.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <ostream>

#include "mlw/convex.hpp"
#include "mlw/experiments.hpp"
#include "mlw/forward.hpp"
#include "mlw/rng.hpp"
#include "mlw/sweep.hpp"

namespace mlw {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

GridFunction gaussian(const Grid& g, Engine& eng, double scale = 1.0) {
  GridFunction u(g);
  for (auto& v : u.values()) v = scale * standard_normal(eng);
  return u;
}

GridFunction uniform(const Grid& g, Engine& eng, double lo, double hi) {
  GridFunction u(g);
  for (auto& v : u.values()) v = lo + (hi - lo) * uniform01(eng);
  return u;
}

CheckResult upper(std::string name, double observed, double bound) {
  return {std::move(name), observed <= bound, observed, bound};
}

double adjoint_gap(const ForwardOperator& F, const ForwardOperator::Point& at,
                   const GridFunction& h, const GridFunction& w) {
  const GridFunction Fh = F.deriv_apply(at, h);
  const GridFunction Fw = F.deriv_adjoint_apply(at, w);
  return std::abs(inner(Fh, w) - inner(h, Fw)) / (norm_l2(Fh) * norm_l2(w));
}

struct Variant {
  std::string name;
  Regularizer R;
  double dual_scale;
};

std::vector<Variant> variants(const Grid& g, Engine& eng) {
  return {
      {"quadratic", Regularizer::unconstrained_quadratic(), 1.0},
      {"quadratic_box", Regularizer::quadratic_box(uniform(g, eng, -0.5, 0.5)), 1.0},
      {"elastic_net", Regularizer::elastic_net(0.3), 1.0},
      {"entropy_simplex", Regularizer::entropy_simplex(), 2.0},
  };
}

/// Smallest x of R(x) - <xi, x> on one node, by Brent's method.
double node_argmin(const Regularizer& R, double xi, double lower) {
  const double M = std::abs(xi) + 10.0;
  const int bits = std::numeric_limits<double>::digits;
  return std::visit(
      overloaded{
          [&](const QuadraticBox& b) {
            const double lo = b.lower ? lower : -M;
            return boost::math::tools::brent_find_minima(
                       [&](double x) { return 0.5 * x * x - xi * x; }, lo, M, bits)
                .first;
          },
          [&](const ElasticNet& e) {
            return boost::math::tools::brent_find_minima(
                       [&](double x) { return 0.5 * x * x + e.beta * std::abs(x) - xi * x; },
                       -M, M, bits)
                .first;
          },
          [&](const EntropySimplex&) { return std::numeric_limits<double>::quiet_NaN(); },
      },
      R.variant());
}

/// Minimizes sum p log(p/w) - <xi, p> over the 3-point simplex by repeated
/// refinement of a lattice around the best point.
std::array<double, 3> simplex_lattice_argmin(const std::array<double, 3>& w,
                                             const std::array<double, 3>& xi) {
  auto obj = [&](double p0, double p1) {
    const double p2 = 1.0 - p0 - p1;
    if (p0 <= 0.0 || p1 <= 0.0 || p2 <= 0.0) return std::numeric_limits<double>::infinity();
    const double p[3] = {p0, p1, p2};
    double s = 0.0;
    for (int i = 0; i < 3; ++i) s += p[i] * std::log(p[i] / w[i]) - xi[i] * p[i];
    return s;
  };
  double c0 = 1.0 / 3.0, c1 = 1.0 / 3.0, step = 1.0 / 200.0;
  int radius = 200;
  while (step > 1e-12) {
    double best = obj(c0, c1), b0 = c0, b1 = c1;
    for (int i = -radius; i <= radius; ++i)
      for (int j = -radius; j <= radius; ++j) {
        const double v = obj(c0 + i * step, c1 + j * step);
        if (v < best) {
          best = v;
          b0 = c0 + i * step;
          b1 = c1 + j * step;
        }
      }
    c0 = b0;
    c1 = b1;
    step /= 4.0;
    radius = 8;
  }
  return {c0 / w[0], c1 / w[1], (1.0 - c0 - c1) / w[2]};
}

}  // namespace

std::vector<CheckResult> verify_adjoints(const VerifyOptions& opts) {
  Engine eng(opts.seed);
  std::vector<CheckResult> out;
  const std::size_t n = opts.fast ? 200 : 1000;
  const Grid g = Grid::interval(n);

  const auto phi = [](double t, double s) { return 1.0 + t + s; };
  const ForwardOperator dense = ForwardOperator::linear(DenseOperator::from_kernel(g, g, phi));
  const ForwardOperator sep =
      setup_entropy_experiment(std::max<std::size_t>(n, 100)).F;
  for (const auto* F : {&dense, &sep}) {
    const auto at = F->evaluate(GridFunction(g));
    double worst = 0.0;
    for (int i = 0; i < opts.cases; ++i)
      worst = std::max(worst, adjoint_gap(*F, at, gaussian(g, eng), gaussian(g, eng)));
    out.push_back(upper(F == &dense ? "adjoint_dense_integral" : "adjoint_separable_integral",
                        worst, 1e-9));
  }

  const Experiment pde = setup_pde_experiment(opts.fast ? 16 : 32);
  const Grid& sg = pde.F.input_grid();
  const auto at = pde.F.evaluate(pde.x_truth);
  double worst = 0.0;
  for (int i = 0; i < opts.cases; ++i)
    worst = std::max(worst, adjoint_gap(pde.F, at, gaussian(sg, eng), gaussian(sg, eng)));
  out.push_back(upper("adjoint_elliptic", worst, 1e-9));
  return out;
}

std::vector<CheckResult> verify_taylor(const VerifyOptions& opts) {
  Engine eng(opts.seed + 7);
  const std::size_t n = opts.fast ? 16 : 32;
  const Experiment pde = setup_pde_experiment(n);
  const auto& ec = std::get<EllipticCoefficient>(pde.F.variant());
  const ForwardOperator F = ForwardOperator::elliptic(ec.f, ec.g, 1e-14);
  const Grid& g = F.input_grid();

  // Nonnegative direction keeps c + eps h inside the admissible set.
  GridFunction h = uniform(g, eng, 0.0, 1.0);
  const auto at = F.evaluate(pde.x_truth);
  const GridFunction dh = F.deriv_apply(at, h);

  std::vector<double> eps, rem;
  for (int j = 0; j < 6; ++j) {
    const double e = 0.5 * std::pow(0.5, j);
    GridFunction c = pde.x_truth;
    c.axpy(e, h);
    GridFunction r = F.apply(c) - at.value;
    r.axpy(-e, dh);
    eps.push_back(e);
    rem.push_back(norm_l2(r));
  }
  const double order = loglog_slope(eps, rem).value_or(0.0);
  CheckResult c{"taylor_order_elliptic", order >= 1.9 && order <= 2.1, order, 2.0};
  return {c};
}

std::vector<CheckResult> verify_mirror_oracles(const VerifyOptions& opts) {
  Engine eng(opts.seed + 11);
  std::vector<CheckResult> out;
  const Grid g = Grid::interval(50);
  for (const auto& v : variants(g, eng)) {
    double worst = 0.0;
    if (std::holds_alternative<EntropySimplex>(v.R.variant())) {
      const Grid g3 = Grid::interval(2);
      const auto w = g3.weights();
      const int cases = opts.fast ? 10 : std::min(opts.cases, 30);
      for (int i = 0; i < cases; ++i) {
        const GridFunction xi = uniform(g3, eng, -3.0, 3.0);
        const GridFunction x = mirror_map(v.R, xi);
        const auto ref = simplex_lattice_argmin({w[0], w[1], w[2]}, {xi[0], xi[1], xi[2]});
        for (int j = 0; j < 3; ++j) worst = std::max(worst, std::abs(x[j] - ref[j]));
      }
    } else {
      const auto* box = std::get_if<QuadraticBox>(&v.R.variant());
      for (int i = 0; i < opts.cases; ++i) {
        const GridFunction xi = gaussian(g, eng, 2.0);
        const GridFunction x = mirror_map(v.R, xi);
        for (std::size_t j = 0; j < g.size(); ++j) {
          const double lower = box && box->lower ? (*box->lower)[j] : 0.0;
          worst = std::max(worst, std::abs(x[j] - node_argmin(v.R, xi[j], lower)));
        }
      }
    }
    out.push_back(upper("mirror_argmin_" + v.name, worst, 1e-6));
  }
  return out;
}

std::vector<CheckResult> verify_convex_identities(const VerifyOptions& opts) {
  Engine eng(opts.seed + 13);
  std::vector<CheckResult> out;
  const Grid g = Grid::interval(50);
  for (const auto& v : variants(g, eng)) {
    const Regularizer& R = v.R;
    const double s = R.sigma();
    double three_point = 0.0, strong = 0.0, fenchel = 0.0, lipschitz = 0.0, dual_upper = 0.0;
    for (int i = 0; i < opts.cases; ++i) {
      const auto p0 = PrimalDualPair::from_dual(R, gaussian(g, eng, v.dual_scale));
      const auto p1 = PrimalDualPair::from_dual(R, gaussian(g, eng, v.dual_scale));
      const auto p2 = PrimalDualPair::from_dual(R, gaussian(g, eng, v.dual_scale));

      // D^{xi2}(x, x2) - D^{xi1}(x, x1) = D^{xi2}(x1, x2) + <xi2 - xi1, x1 - x>
      const double a = bregman(R, p2, p0.x), b = bregman(R, p1, p0.x), c = bregman(R, p2, p1.x);
      const double d = inner(p2.xi - p1.xi, p1.x - p0.x);
      const double scale = 1.0 + std::max({std::abs(a), std::abs(b), std::abs(c), std::abs(d)});
      three_point = std::max(three_point, std::abs((a - b) - (c + d)) / scale);

      // D^xi(xbar, x) >= sigma ||x - xbar||^2
      const double dist = rate_norm_of(R, p1.x - p0.x);
      const double D10 = bregman(R, p0, p1.x);
      strong = std::max(strong, s * dist * dist - D10);

      // R(x) + R*(xi) = <xi, x>
      const double rc = conjugate_value(R, p0.xi);
      fenchel = std::max(fenchel, std::abs(value(R, p0.x) + rc - inner(p0.xi, p0.x)) /
                                      (1.0 + std::abs(rc)));

      // ||grad R*(xi) - grad R*(eta)|| <= ||xi - eta||_* / (2 sigma)
      const double dual = dual_norm_of(R, p1.xi - p0.xi);
      lipschitz = std::max(lipschitz, dist - dual / (2.0 * s));

      // D^xi(xbar, x) <= ||xi - xibar||_*^2 / (4 sigma)
      dual_upper = std::max(dual_upper, D10 - dual * dual / (4.0 * s));
    }
    out.push_back(upper("three_point_" + v.name, three_point, 1e-8));
    out.push_back(upper("strong_convexity_" + v.name, strong, 1e-12));
    out.push_back(upper("fenchel_" + v.name, fenchel, 1e-8));
    out.push_back(upper("mirror_lipschitz_" + v.name, lipschitz, 1e-12));
    out.push_back(upper("dual_upper_bound_" + v.name, dual_upper, 1e-12));
  }
  return out;
}

std::vector<CheckResult> run_verification(const VerifyOptions& opts) {
  std::vector<CheckResult> all;
  for (auto* suite : {verify_adjoints, verify_taylor, verify_mirror_oracles,
                      verify_convex_identities}) {
    auto part = suite(opts);
    all.insert(all.end(), part.begin(), part.end());
  }
  return all;
}

void print_checks(std::ostream& os, const std::vector<CheckResult>& checks) {
  for (const auto& c : checks)
    os << fmt::format("{} {} observed={:.3e} bound={:.3e}\n", c.pass ? "PASS" : "FAIL", c.name,
                      c.observed, c.bound);
}

}  // namespace mlw
