#include "mlw/sweep.hpp"

#include <fmt/chrono.h>
#include <fmt/format.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <limits>
#include <ostream>
#include <stdexcept>

namespace mlw {

namespace fs = std::filesystem;

namespace {

double median(std::vector<double> v) {
  if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::sort(v.begin(), v.end());
  const std::size_t m = v.size() / 2;
  return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

std::ofstream open_for_write(const fs::path& p) {
  std::ofstream os(p);
  if (!os) throw std::runtime_error("cannot write '" + p.string() + "'");
  return os;
}

}  // namespace

double RateRow::ratio() const { return err / std::sqrt(delta); }

std::vector<RateRow> RateTable::for_rule(RuleKind r) const {
  std::vector<RateRow> out;
  for (const auto& row : rows)
    if (row.rule == r) out.push_back(row);
  return out;
}

std::string utc_timestamp() {
  return fmt::format("{:%Y-%m-%dT%H:%M:%SZ}",
                     fmt::gmtime(std::chrono::system_clock::to_time_t(
                         std::chrono::system_clock::now())));
}

std::string delta_tag(double delta) { return fmt::format("{:g}", delta); }

Experiment make_experiment(const ExperimentConfig& cfg, bool fast) {
  const std::size_t n = cfg.grid_n(fast);
  switch (cfg.problem) {
    case Problem::EntropyIntegral:
      return setup_entropy_experiment(n, cfg.kernel_storage == "dense"
                                             ? KernelStorage::Dense
                                             : KernelStorage::Separable);
    case Problem::PdeCoefficient: {
      PdeSetup s;
      s.lo = cfg.domain_lo;
      s.hi = cfg.domain_hi;
      Experiment ex = setup_pde_experiment(n, s);
      ex.eta = cfg.effective_eta();
      return ex;
    }
    case Problem::SmdSynthetic:
      break;
  }
  throw std::invalid_argument("the smd problem has no rate-sweep experiment");
}

CellResult run_cell(const Experiment& ex, const ExperimentConfig& cfg, RuleKind rule,
                    double delta, std::uint64_t seed, bool keep_records) {
  CellResult c;
  c.rule = rule;
  c.delta = delta;
  c.seed = seed;
  RunOptions opts;
  opts.xi0 = ex.xi0;
  opts.x_truth = ex.x_truth;
  opts.lambda_tracking = ex.F.is_linear();
  opts.L = ex.L;
  opts.safety_cap = cfg.safety_cap;

  auto take = [&](RunResult& r) {
    c.iter = r.k_stop;
    if (!r.records.empty()) {
      c.err = r.records.back().error.value_or(std::numeric_limits<double>::quiet_NaN());
      c.final_bregman = r.records.back().bregman;
    }
    if (keep_records) c.records = std::move(r.records);
  };
  try {
    const GridFunction y = add_noise(ex.y_exact, delta, seed);
    RunResult r = run(ex.F, ex.R, y, make_rule(cfg, rule, delta), make_stop(cfg, delta), opts);
    take(r);
  } catch (MaxIterExceeded& e) {
    c.flagged = true;
    c.error = e.what();
    take(e.partial);
  } catch (const std::exception& e) {
    c.flagged = true;
    c.error = e.what();
    c.err = std::numeric_limits<double>::quiet_NaN();
  }
  return c;
}

RateTable aggregate(const std::vector<CellResult>& cells) {
  RateTable t;
  for (std::size_t i = 0; i < cells.size();) {
    std::size_t j = i;
    std::vector<double> iters, errs;
    bool flagged = false;
    while (j < cells.size() && cells[j].rule == cells[i].rule &&
           cells[j].delta == cells[i].delta) {
      if (cells[j].flagged) {
        flagged = true;
      } else {
        iters.push_back(static_cast<double>(cells[j].iter));
        errs.push_back(cells[j].err);
      }
      ++j;
    }
    t.rows.push_back({cells[i].delta, cells[i].rule, median(iters), median(errs), flagged});
    i = j;
  }
  return t;
}

SweepResult run_rate_sweep(const ExperimentConfig& cfg, const Experiment& ex,
                           const SweepOptions& opts) {
  validate(cfg);
  struct Job {
    RuleKind rule;
    double delta;
    std::uint64_t seed;
  };
  std::vector<Job> jobs;
  for (auto r : cfg.rules)
    for (double d : cfg.deltas)
      for (auto s : cfg.seeds) jobs.push_back({r, d, s});

  const bool keep = opts.keep_records || opts.iterates_dir.has_value();
  std::vector<CellResult> cells(jobs.size());
  // Each cell owns its state and noise stream, so the order of completion
  // does not affect the results; aggregation below runs in job order.
#pragma omp parallel for schedule(dynamic, 1)
  for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(jobs.size()); ++i) {
    const Job& j = jobs[i];
    cells[i] = run_cell(ex, cfg, j.rule, j.delta, j.seed, keep);
  }

  if (opts.iterates_dir) {
    for (auto& c : cells) {
      const fs::path dir = *opts.iterates_dir / to_string(c.rule);
      fs::create_directories(dir);
      auto os = open_for_write(dir / fmt::format("iterates_{}_{}.csv", delta_tag(c.delta), c.seed));
      write_iterates_csv(os, c.records);
      if (!opts.keep_records) c.records.clear();
    }
  }
  SweepResult res{aggregate(cells), std::move(cells)};
  return res;
}

SweepResult run_rate_sweep(const ExperimentConfig& cfg, const SweepOptions& opts) {
  validate(cfg);
  const Experiment ex = make_experiment(cfg, opts.fast);
  return run_rate_sweep(cfg, ex, opts);
}

void write_table_csv(std::ostream& os, const RateTable& t, const std::string& stamp) {
  os << "# generated " << stamp << "\n";
  os << "delta,rule,iter,err,ratio,flagged\n";
  for (const auto& r : t.rows)
    os << fmt::format("{:g},{},{:g},{:.10e},{:.6f},{}\n", r.delta, to_string(r.rule), r.iter,
                      r.err, r.ratio(), r.flagged ? 1 : 0);
}

void write_cells_csv(std::ostream& os, const std::vector<CellResult>& cells) {
  os << "delta,rule,seed,iter,err,ratio,flagged,error\n";
  for (const auto& c : cells)
    os << fmt::format("{:g},{},{},{},{:.10e},{:.6f},{},\"{}\"\n", c.delta, to_string(c.rule),
                      c.seed, c.iter, c.err, c.err / std::sqrt(c.delta), c.flagged ? 1 : 0,
                      c.error);
}

std::optional<double> loglog_slope(const std::vector<double>& deltas,
                                   const std::vector<double>& errs) {
  if (deltas.size() != errs.size())
    throw std::invalid_argument("loglog_slope: size mismatch");
  const std::size_t n = deltas.size();
  if (n < 2) return std::nullopt;
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += std::log(deltas[i]);
    my += std::log(errs[i]);
  }
  mx /= n;
  my /= n;
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = std::log(deltas[i]) - mx;
    sxy += dx * (std::log(errs[i]) - my);
    sxx += dx * dx;
  }
  if (sxx == 0.0) return std::nullopt;
  return sxy / sxx;
}

PlotSummary emit_plot_data(const RateTable& t, const fs::path& dir) {
  if (t.rows.empty()) throw std::invalid_argument("emit_plot_data: empty table");
  fs::create_directories(dir);

  std::vector<RuleKind> rules;
  for (const auto& r : t.rows)
    if (std::find(rules.begin(), rules.end(), r.rule) == rules.end()) rules.push_back(r.rule);

  {
    auto os = open_for_write(dir / "rate.csv");
    os << "rule,delta,err,log_delta,log_err\n";
    for (const auto& r : t.rows)
      os << fmt::format("{},{:g},{:.10e},{:.10f},{:.10f}\n", to_string(r.rule), r.delta, r.err,
                        std::log10(r.delta), std::log10(r.err));
  }

  PlotSummary s;
  for (auto rule : rules) {
    std::vector<double> d, e;
    for (const auto& r : t.for_rule(rule)) {
      d.push_back(r.delta);
      e.push_back(r.err);
    }
    const auto slope = loglog_slope(d, e);
    s.slopes.emplace_back(rule, slope);
    s.text += fmt::format("{} slope={}\n", to_string(rule),
                          slope ? fmt::format("{:.4f}", *slope) : std::string("n/a"));
  }
  {
    auto os = open_for_write(dir / "summary.txt");
    os << s.text;
  }
  {
    auto os = open_for_write(dir / "rate.gp");
    os << "set datafile separator ','\n"
          "set key top left\n"
          "set xlabel 'log10 delta'\n"
          "set ylabel 'log10 err'\n"
          "set terminal pngcairo size 800,600\n"
          "set output 'rate.png'\n"
          "plot ";
    for (std::size_t i = 0; i < rules.size(); ++i) {
      os << fmt::format("{}'rate.csv' using (stringcolumn(1) eq '{}' ? $4 : 1/0):5 "
                        "with linespoints title '{}'",
                        i ? ", \\\n     " : "", to_string(rules[i]), to_string(rules[i]));
    }
    os << "\n";
  }
  return s;
}

Regularizer make_regularizer(const std::string& name, double beta) {
  if (name == "entropy_simplex") return Regularizer::entropy_simplex();
  if (name == "elastic_net") return Regularizer::elastic_net(beta);
  if (name == "quadratic") return Regularizer::unconstrained_quadratic();
  throw std::invalid_argument("unknown regularizer '" + name + "'");
}

SmdStudy run_smd_study(const ExperimentConfig& cfg, bool fast,
                       const std::optional<fs::path>& out) {
  validate(cfg);
  const long steps = fast ? std::min<long>(cfg.smd.steps, 1000) : cfg.smd.steps;
  if (out) fs::create_directories(*out);

  SmdStudy study;
  for (const auto& name : cfg.smd.regularizers) {
    const Regularizer R = make_regularizer(name, cfg.smd.beta);
    const std::size_t base = study.paths.size();
    study.paths.resize(base + cfg.seeds.size());
    std::vector<std::vector<SmdRecord>> logs(cfg.seeds.size());
#pragma omp parallel for schedule(dynamic, 1)
    for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(cfg.seeds.size()); ++i) {
      const std::uint64_t seed = cfg.seeds[i];
      SourcedInstance inst = build_sourced_instance(cfg.smd.blocks, cfg.smd.n, R, seed);
      const double L = inst.problem.norm_bound(R.rate_norm());
      const double g = cfg.smd.gamma_factor / (L * L);
      StepSchedule sched = cfg.smd.schedule == "polynomial"
                               ? StepSchedule{PolynomialSchedule{g, cfg.smd.alpha}}
                               : StepSchedule{ConstantSchedule{g}};
      SmdOptions o;
      o.x_truth = inst.x_truth;
      o.xi0 = inst.xi0;
      o.lambda_tracking = true;
      o.L = L;
      SmdRun run = smd_run(inst.problem, R, sched, steps, seed, o);

      SmdPathSummary p;
      p.regularizer = name;
      p.seed = seed;
      p.gamma = g;
      p.L = L;
      const auto& rec = run.records;
      for (std::size_t k = 0; k < rec.size(); ++k) {
        const double sb = rec[k].s_bregman.value_or(0.0);
        p.max_s_bregman = std::max(p.max_s_bregman, sb);
        p.max_lambda_defect = std::max(p.max_lambda_defect, rec[k].lambda_defect.value_or(0.0));
        if (k > 0) {
          const double inc = *rec[k].bregman - *rec[k - 1].bregman;
          p.max_increase = std::max(p.max_increase, inc);
          if (inc > 1e-10) p.monotone = false;
        }
      }
      p.s_bregman_100 = rec[std::min<std::size_t>(100, rec.size() - 1)].s_bregman.value_or(0.0);
      p.s_bregman_final = rec.back().s_bregman.value_or(0.0);
      study.paths[base + i] = p;
      logs[i] = std::move(run.records);
    }
    if (out) {
      for (std::size_t i = 0; i < cfg.seeds.size(); ++i) {
        auto os = open_for_write(*out / fmt::format("smd_{}_{}.csv", name, cfg.seeds[i]));
        write_smd_csv(os, logs[i]);
      }
    }
  }
  return study;
}

void write_smd_summary(std::ostream& os, const SmdStudy& s) {
  os << "regularizer,seed,gamma,L,monotone,max_increase,s_delta_100,s_delta_final,"
        "max_s_delta,max_lambda_defect\n";
  for (const auto& p : s.paths)
    os << fmt::format("{},{},{:.10e},{:.10e},{},{:.3e},{:.10e},{:.10e},{:.10e},{:.3e}\n",
                      p.regularizer, p.seed, p.gamma, p.L, p.monotone ? 1 : 0, p.max_increase,
                      p.s_bregman_100, p.s_bregman_final, p.max_s_bregman,
                      p.max_lambda_defect);
}

}  // namespace mlw
