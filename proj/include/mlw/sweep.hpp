#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "mlw/config.hpp"
#include "mlw/experiments.hpp"
#include "mlw/smd.hpp"
#include "mlw/solver.hpp"

namespace mlw {

/// Outcome of one (rule, delta, seed) solve.
struct CellResult {
  RuleKind rule = RuleKind::Rule1;
  double delta = 0.0;
  std::uint64_t seed = 0;
  long iter = 0;
  double err = 0.0;
  std::optional<double> final_bregman;
  bool flagged = false;
  std::string error;  // message when flagged
  std::vector<IterateRecord> records;
};

struct RateRow {
  double delta = 0.0;
  RuleKind rule = RuleKind::Rule1;
  double iter = 0.0;  // median over seeds; may be a half-integer
  double err = 0.0;   // median over seeds
  bool flagged = false;

  double ratio() const;
};

struct RateTable {
  std::vector<RateRow> rows;

  std::vector<RateRow> for_rule(RuleKind r) const;
};

struct SweepOptions {
  bool fast = false;
  bool keep_records = false;
  /// Writes iterates_<delta>_<seed>.csv under <dir>/<rule>/ when set.
  std::optional<std::filesystem::path> iterates_dir;
};

struct SweepResult {
  RateTable table;
  std::vector<CellResult> cells;  // ordered by (rule, delta, seed)
};

Experiment make_experiment(const ExperimentConfig& cfg, bool fast);

/// y_delta = y + delta e / ||e|| with e drawn from the seed, then one run.
/// Errors are caught and reported through the flag.
CellResult run_cell(const Experiment& ex, const ExperimentConfig& cfg, RuleKind rule,
                    double delta, std::uint64_t seed, bool keep_records);

SweepResult run_rate_sweep(const ExperimentConfig& cfg, const Experiment& ex,
                           const SweepOptions& opts = {});
SweepResult run_rate_sweep(const ExperimentConfig& cfg, const SweepOptions& opts = {});

/// Median over the unflagged cells of each (rule, delta); a row is flagged
/// when any of its cells is.
RateTable aggregate(const std::vector<CellResult>& cells);

/// Leading "# generated <timestamp>" line, then delta,rule,iter,err,ratio,flagged.
void write_table_csv(std::ostream& os, const RateTable& t, const std::string& stamp);
void write_cells_csv(std::ostream& os, const std::vector<CellResult>& cells);

/// Least-squares slope of log err against log delta; empty below two points.
std::optional<double> loglog_slope(const std::vector<double>& deltas,
                                   const std::vector<double>& errs);

struct PlotSummary {
  std::vector<std::pair<RuleKind, std::optional<double>>> slopes;
  std::string text;
};

/// Writes rate.csv, rate.gp and summary.txt into dir.
PlotSummary emit_plot_data(const RateTable& t, const std::filesystem::path& dir);

std::string utc_timestamp();
std::string delta_tag(double delta);

struct SmdPathSummary {
  std::string regularizer;
  std::uint64_t seed = 0;
  double gamma = 0.0;
  double L = 0.0;
  bool monotone = true;
  double max_increase = 0.0;
  double s_bregman_100 = 0.0;
  double s_bregman_final = 0.0;
  double max_s_bregman = 0.0;
  double max_lambda_defect = 0.0;
};

struct SmdStudy {
  std::vector<SmdPathSummary> paths;
};

/// Sourced instances for each configured regularizer and seed, constant or
/// polynomial schedule. Writes smd_<regularizer>_<seed>.csv when out is set.
SmdStudy run_smd_study(const ExperimentConfig& cfg, bool fast,
                       const std::optional<std::filesystem::path>& out);
void write_smd_summary(std::ostream& os, const SmdStudy& s);

Regularizer make_regularizer(const std::string& name, double beta);

}  // namespace mlw
