#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "mlw/config.hpp"
#include "mlw/experiments.hpp"
#include "mlw/sweep.hpp"
#include "support.hpp"

using namespace mlw;
namespace fs = std::filesystem;

namespace {

ExperimentConfig parse(const std::string& text) {
  std::istringstream is(text);
  return parse_config(is);
}

ExperimentConfig small_entropy() {
  ExperimentConfig c = default_config(Problem::EntropyIntegral);
  c.n = 200;
  c.deltas = {5e-2, 5e-3};
  c.seeds = {1, 2, 3};
  return c;
}

std::string slurp(const fs::path& p) {
  std::ifstream is(p);
  std::stringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

fs::path scratch(const std::string& name) {
  auto p = fs::temp_directory_path() / ("mlw_test_bench_" + name);
  fs::remove_all(p);
  return p;
}

}  // namespace

TEST_CASE("entropy truth") {
  const double a = entropy_exponent();
  // root computed to 30 digits with an arbitrary-precision solver
  CHECK(std::abs(a - 0.49490759325588453774) <= 1e-15);
  // the published digits 0.4949075935 agree to nine decimals only
  CHECK(std::abs(a - 0.4949075935) <= 1e-9);
  CHECK(std::abs(std::exp(1.5 * a - 1) * (std::exp(a) - 1) / a - 1.0) <= 1e-14);

  const Grid g = Grid::interval(5000);
  const auto x = GridFunction::sample(g, entropy_truth);
  CHECK(std::abs(inner(x, GridFunction(g, 1.0)) - 1.0) <= 1e-8);

  // 1 + log x = A*(a 1)
  const auto ex = setup_entropy_experiment(5000);
  GridFunction lhs(g);
  for (std::size_t i = 0; i < g.size(); ++i) lhs[i] = 1.0 + std::log(x[i]);
  const auto rhs = ex.F.deriv_adjoint_apply(x, GridFunction(g, a));
  CHECK(norm_l2(lhs - rhs) <= 1e-8);

  CHECK(std::abs(norm_l1(ex.x_truth) - 1.0) <= 1e-12);
  CHECK(norm_max(ex.xi0) == 0.0);
  CHECK(ex.eta == 0.0);
  CHECK_THROWS_AS(setup_entropy_experiment(99), std::invalid_argument);
}

TEST_CASE("pde truth and setup") {
  CHECK(pde_truth(0.0, 0.0) == 1.0);
  CHECK(pde_truth(0.4, 0.0) == 0.0);
  CHECK(pde_truth(0.2, 0.2) == doctest::Approx(std::pow(1 - 9 * 0.08, 2)));
  const auto ex = setup_pde_experiment(16);
  for (double c : ex.x_truth.values()) CHECK(c >= 0.0);
  for (std::size_t i = 0; i < ex.x_truth.size(); ++i) {
    const auto [x, y] = ex.x_truth.grid().point(i);
    if (9 * (x * x + y * y) >= 1) CHECK(ex.x_truth[i] == 0.0);
  }
  CHECK(ex.eta == 0.04);
  CHECK(ex.L > 0.0);
  CHECK_THROWS_AS(setup_pde_experiment(20), std::invalid_argument);
}

TEST_CASE("config parsing") {
  const auto c = parse(
      "[experiment]\nproblem = pde_coefficient\nn = 32\n"
      "[rule]\nrules = rule3, rule2\ntau = 1.2\ncap_mode = max\n"
      "[stopping]\nkind = maxiter\nk_max = 12\n"
      "[noise]\ndeltas = 1e-2, 1e-3\nseeds = 4, 5\n"
      "[output]\ndir = somewhere\n");
  CHECK(c.problem == Problem::PdeCoefficient);
  CHECK(c.n == 32);
  CHECK(c.rules == std::vector<RuleKind>{RuleKind::Rule3, RuleKind::Rule2});
  CHECK(c.tau == 1.2);
  CHECK(c.cap == CapMode::Max);
  CHECK(c.stop == StopKind::MaxIter);
  CHECK(c.k_max == 12);
  CHECK(c.deltas == std::vector<double>{1e-2, 1e-3});
  CHECK(c.seeds == std::vector<std::uint64_t>{4, 5});
  CHECK(c.out_dir == "somewhere");
  CHECK(c.effective_eta() == 0.04);

  const auto d = parse("[experiment]\nproblem = entropy_integral\n");
  CHECK(d.seeds == std::vector<std::uint64_t>{1, 2, 3, 4, 5});
  CHECK(d.n == 5000);
  CHECK(d.grid_n(true) == 1000);
  CHECK(d.gamma_bar == 600.0);
  CHECK(d.effective_eta() == 0.0);

  CHECK_THROWS(parse("[experiment]\nproblem = heat\n"));
  CHECK_THROWS(parse("[experiment]\nproblem = entropy_integral\n[rule]\nrules = rule9\n"));
  CHECK_THROWS(parse("[experiment]\nn = 3\n"));
}

TEST_CASE("config validation") {
  auto c = small_entropy();
  CHECK_NOTHROW(validate(c));
  c.tau = 1.0;
  CHECK_THROWS_AS(validate(c), std::invalid_argument);
  c = small_entropy();
  c.deltas = {-1.0};
  CHECK_THROWS_AS(validate(c), std::invalid_argument);
  c = small_entropy();
  c.seeds.clear();
  CHECK_THROWS_AS(validate(c), std::invalid_argument);
  auto p = default_config(Problem::PdeCoefficient);
  CHECK_NOTHROW(validate(p));
  p.rules = {RuleKind::Rule1};
  CHECK_THROWS_AS(validate(p), std::invalid_argument);
}

TEST_CASE("a-priori stopping uses the tau-free constant for rule 1") {
  auto c = small_entropy();
  c.stop = StopKind::APriori;
  const auto r = make_rule(c, RuleKind::Rule1, 1e-2);
  CHECK(std::get<ConstantStep>(r).gamma == doctest::Approx(1.98));
  c.stop = StopKind::Discrepancy;
  CHECK(std::get<ConstantStep>(make_rule(c, RuleKind::Rule1, 1e-2)).gamma ==
        doctest::Approx(discrepancy_gamma(1.01, 0.0)));
  CHECK(std::get<APriori>([&] { c.stop = StopKind::APriori; return make_stop(c, 1e-3); }()).delta == 1e-3);
}

TEST_CASE("ratio is recomputed from err and delta") {
  Engine eng(1);
  for (int i = 0; i < 100; ++i) {
    RateRow r;
    r.delta = std::pow(10.0, -6 * uniform01(eng));
    r.err = uniform01(eng);
    CHECK(testing::rel_diff(r.ratio(), r.err / std::sqrt(r.delta)) <= 1e-12);
  }
}

TEST_CASE("least-squares slope of the published rule 1 errors") {
  const std::vector<double> d = {5e-2, 5e-3, 5e-4, 5e-5};
  const std::vector<double> e = {5.0723e-2, 5.0405e-3, 4.6703e-4, 8.2451e-5};
  const auto s = loglog_slope(d, e);
  REQUIRE(s);
  CHECK(*s == doctest::Approx(0.94001559).epsilon(1e-7));
  CHECK_FALSE(loglog_slope({1e-2}, {1e-3}));
}

TEST_CASE("plot data") {
  RateTable t;
  const std::vector<double> d = {5e-2, 5e-3, 5e-4, 5e-5};
  const std::vector<double> e = {5.0723e-2, 5.0405e-3, 4.6703e-4, 8.2451e-5};
  for (std::size_t i = 0; i < d.size(); ++i) t.rows.push_back({d[i], RuleKind::Rule1, 1.0, e[i], false});
  t.rows.push_back({1e-2, RuleKind::Rule2, 1.0, 1e-2, false});
  const auto dir = scratch("plot");
  const auto s = emit_plot_data(t, dir);
  CHECK(fs::exists(dir / "rate.csv"));
  CHECK(fs::exists(dir / "rate.gp"));
  CHECK(s.text.find("rule1 slope=0.9400") != std::string::npos);
  CHECK(s.text.find("rule2 slope=n/a") != std::string::npos);
  CHECK(slurp(dir / "summary.txt") == s.text);
  CHECK_THROWS_AS(emit_plot_data(RateTable{}, dir), std::invalid_argument);
  fs::remove_all(dir);
}

TEST_CASE("unwritable output path") {
  RateTable t;
  t.rows.push_back({1e-2, RuleKind::Rule1, 1.0, 1e-2, false});
  const auto file = scratch("blocker");
  std::ofstream(file) << "x";
  CHECK_THROWS(emit_plot_data(t, file / "sub"));
  fs::remove_all(file);
}

TEST_CASE("aggregation takes medians and flags errored cells") {
  std::vector<CellResult> cells(4);
  for (int i = 0; i < 3; ++i) {
    cells[i].rule = RuleKind::Rule2;
    cells[i].delta = 1e-2;
    cells[i].seed = i + 1;
    cells[i].iter = 10 * (i + 1);
    cells[i].err = 0.1 * (3 - i);
  }
  cells[3] = cells[2];
  cells[3].delta = 1e-3;
  cells[3].flagged = true;
  const auto t = aggregate(cells);
  REQUIRE(t.rows.size() == 2);
  CHECK(t.rows[0].iter == 20.0);
  CHECK(t.rows[0].err == doctest::Approx(0.2));
  CHECK_FALSE(t.rows[0].flagged);
  CHECK(t.rows[1].flagged);
  CHECK(std::isnan(t.rows[1].err));
}

TEST_CASE("sweep: ordering, immediate stop, flagged cells, reproducible CSV") {
  auto c = small_entropy();
  const auto ex = make_experiment(c, false);
  const auto a = run_rate_sweep(c, ex);
  REQUIRE(a.table.rows.size() == 6);
  CHECK(a.cells.size() == 18);
  for (const auto& row : a.table.rows) {
    CHECK_FALSE(row.flagged);
    CHECK(row.ratio() < 0.5);
  }
  const auto b = run_rate_sweep(c, ex);
  std::ostringstream sa, sb;
  write_table_csv(sa, a.table, "stamp-a");
  write_table_csv(sb, b.table, "stamp-b");
  const auto body = [](const std::string& s) { return s.substr(s.find('\n')); };
  CHECK(body(sa.str()) == body(sb.str()));
  CHECK(sa.str().rfind("# generated stamp-a\ndelta,rule,iter,err,ratio,flagged\n", 0) == 0);

  // noise larger than the signal: nothing to do
  auto big = c;
  big.deltas = {1e3};
  big.rules = {RuleKind::Rule2};
  const auto z = run_rate_sweep(big, ex);
  const double err0 = norm_l1(mirror_map(ex.R, ex.xi0) - ex.x_truth);
  CHECK(z.table.rows[0].iter == 0.0);
  CHECK(z.table.rows[0].err == doctest::Approx(err0).epsilon(1e-12));

  // a cell that hits the safety cap is flagged and the sweep carries on
  auto capped = c;
  capped.safety_cap = 3;
  capped.deltas = {5e-3};
  const auto f = run_rate_sweep(capped, ex);
  CHECK(f.table.rows.size() == 3);
  for (const auto& row : f.table.rows) CHECK(row.flagged);
  CHECK(f.cells.front().error.find("safety cap") != std::string::npos);
}

TEST_CASE("sweep writes iterate logs per rule") {
  auto c = small_entropy();
  c.rules = {RuleKind::Rule3};
  c.deltas = {5e-2};
  c.seeds = {2};
  const auto dir = scratch("iterates");
  SweepOptions o;
  o.iterates_dir = dir;
  run_rate_sweep(c, o);
  const auto log = dir / "rule3" / "iterates_0.05_2.csv";
  REQUIRE(fs::exists(log));
  CHECK(slurp(log).rfind("k,residual,step,bregman,error,lambda_defect\n", 0) == 0);
  fs::remove_all(dir);
}

TEST_CASE("smd study summary") {
  auto c = default_config(Problem::SmdSynthetic);
  c.smd.steps = 200;
  c.smd.n = 20;
  c.seeds = {1, 2};
  const auto dir = scratch("smd");
  const auto s = run_smd_study(c, false, dir);
  CHECK(s.paths.size() == 4);
  for (const auto& p : s.paths) {
    CHECK(p.monotone);
    CHECK(std::isfinite(p.max_s_bregman));
    CHECK(p.max_lambda_defect <= 1e-10);
  }
  CHECK(fs::exists(dir / "smd_entropy_simplex_1.csv"));
  CHECK(fs::exists(dir / "smd_elastic_net_2.csv"));
  fs::remove_all(dir);
  c.smd.gamma_factor = 2.0;
  CHECK_THROWS_AS(validate(c), std::invalid_argument);
}
