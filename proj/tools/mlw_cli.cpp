// Command-line driver: run, sweep, verify, smd.

#include <CLI11.hpp>
#include <fmt/format.h>
#include <json.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

#include "mlw/config.hpp"
#include "mlw/forward.hpp"
#include "mlw/smd.hpp"
#include "mlw/solver.hpp"
#include "mlw/sweep.hpp"
#include "mlw/verify.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Common {
  std::string config;
  std::string out;
  std::optional<std::uint64_t> seed;
  bool fast = false;
};

int fail(const std::string& kind, const std::string& message, int code) {
  std::cerr << json{{"status", "error"}, {"kind", kind}, {"message", message}}.dump()
            << std::endl;
  return code;
}

std::ofstream open_out(const fs::path& p) {
  std::ofstream os(p);
  if (!os) throw std::runtime_error("cannot write '" + p.string() + "'");
  return os;
}

mlw::ExperimentConfig load(const Common& c) {
  mlw::ExperimentConfig cfg = mlw::load_config(c.config);
  if (c.seed) cfg.seeds = {*c.seed};
  if (!c.out.empty()) cfg.out_dir = c.out;
  mlw::validate(cfg);
  return cfg;
}

int cmd_run(const Common& c, std::optional<double> delta, std::optional<std::string> rule) {
  mlw::ExperimentConfig cfg = load(c);
  const double d = delta.value_or(cfg.deltas.front());
  const mlw::RuleKind r = rule ? mlw::parse_rule(*rule) : cfg.rules.front();
  cfg.deltas = {d};
  cfg.rules = {r};
  mlw::validate(cfg);
  const std::uint64_t seed = cfg.seeds.front();

  const mlw::Experiment ex = mlw::make_experiment(cfg, c.fast);
  const mlw::CellResult cell = mlw::run_cell(ex, cfg, r, d, seed, true);
  fs::create_directories(cfg.out_dir);
  {
    auto os = open_out(fs::path(cfg.out_dir) /
                       fmt::format("iterates_{}_{}.csv", mlw::delta_tag(d), seed));
    mlw::write_iterates_csv(os, cell.records);
  }
  if (cell.flagged) return fail("run_failed", cell.error, 3);
  std::cout << fmt::format("rule={} delta={:g} seed={} iter={} err={:.6e} ratio={:.6f}\n",
                           mlw::to_string(r), d, seed, cell.iter, cell.err,
                           cell.err / std::sqrt(d));
  return 0;
}

int cmd_sweep(const Common& c) {
  const mlw::ExperimentConfig cfg = load(c);
  const fs::path out = cfg.out_dir;
  fs::create_directories(out);
  mlw::SweepOptions opts;
  opts.fast = c.fast;
  opts.iterates_dir = out;
  const mlw::SweepResult res = mlw::run_rate_sweep(cfg, opts);
  {
    auto os = open_out(out / "table.csv");
    mlw::write_table_csv(os, res.table, mlw::utc_timestamp());
  }
  {
    auto os = open_out(out / "cells.csv");
    mlw::write_cells_csv(os, res.cells);
  }
  const mlw::PlotSummary s = mlw::emit_plot_data(res.table, out);
  std::size_t flagged = 0;
  for (const auto& row : res.table.rows) {
    flagged += row.flagged;
    std::cout << fmt::format("{} delta={:g} iter={:g} err={:.4e} ratio={:.4f}{}\n",
                             mlw::to_string(row.rule), row.delta, row.iter, row.err,
                             row.ratio(), row.flagged ? " FLAGGED" : "");
  }
  std::cout << s.text;
  if (flagged) std::cout << fmt::format("{} flagged row(s), see cells.csv\n", flagged);
  return 0;
}

int cmd_verify(const Common& c) {
  mlw::VerifyOptions opts;
  opts.fast = c.fast;
  opts.seed = c.seed.value_or(1);
  const auto checks = mlw::run_verification(opts);
  mlw::print_checks(std::cout, checks);
  if (!c.out.empty()) {
    fs::create_directories(c.out);
    auto os = open_out(fs::path(c.out) / "verify.txt");
    mlw::print_checks(os, checks);
  }
  for (const auto& ch : checks)
    if (!ch.pass) return fail("verification_failed", ch.name, 1);
  return 0;
}

int cmd_smd(const Common& c) {
  const mlw::ExperimentConfig cfg = load(c);
  if (cfg.problem != mlw::Problem::SmdSynthetic)
    return fail("invalid_config", "the smd subcommand needs problem = smd_synthetic", 2);
  const fs::path out = cfg.out_dir;
  const mlw::SmdStudy study = mlw::run_smd_study(cfg, c.fast, out);
  {
    auto os = open_out(out / "smd_summary.csv");
    mlw::write_smd_summary(os, study);
  }
  mlw::write_smd_summary(std::cout, study);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Mirror-descent Landweber iteration: experiments and checks"};
  app.require_subcommand(1);

  Common common;
  std::optional<double> delta;
  std::optional<std::string> rule;
  auto add_common = [&](CLI::App* sub, bool need_config) {
    auto* opt = sub->add_option("--config", common.config, "experiment file (INI)");
    if (need_config) opt->required()->check(CLI::ExistingFile);
    sub->add_option("--out", common.out, "output directory (overrides the config)");
    sub->add_option("--seed", common.seed, "use this single seed");
    sub->add_flag("--fast", common.fast, "coarse grids and shorter runs");
  };

  auto* run = app.add_subcommand("run", "one (rule, delta, seed) solve");
  add_common(run, true);
  run->add_option("--delta", delta, "noise level (default: first in config)");
  run->add_option("--rule", rule, "rule1 | rule2 | rule3 (default: first in config)");
  auto* sweep = app.add_subcommand("sweep", "rate table over rules, noise levels and seeds");
  add_common(sweep, true);
  auto* verify = app.add_subcommand("verify", "oracle and identity checks");
  add_common(verify, false);
  auto* smd = app.add_subcommand("smd", "stochastic mirror descent rate study");
  add_common(smd, true);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return fail("usage", e.what(), 2);
  }

  try {
    if (*run) return cmd_run(common, delta, rule);
    if (*sweep) return cmd_sweep(common);
    if (*verify) return cmd_verify(common);
    if (*smd) return cmd_smd(common);
  } catch (const mlw::ScheduleViolation& e) {
    return fail("schedule_violation", e.what(), 2);
  } catch (const mlw::CgNonConvergence& e) {
    return fail("cg_nonconvergence", e.what(), 3);
  } catch (const std::invalid_argument& e) {
    return fail("invalid_argument", e.what(), 2);
  } catch (const std::exception& e) {
    return fail("runtime_error", e.what(), 1);
  }
  return fail("usage", "no subcommand", 2);
}
