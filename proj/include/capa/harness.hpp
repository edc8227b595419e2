#pragma once

// Batch experiment driver: sweeps x seeds x algorithms -> CSV traces.

#include <cstdint>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include "capa/dinkelbach.hpp"
#include "capa/scenario.hpp"

namespace capa::harness {

enum class Algorithm { cov, zf, spda_cov, spda_zf };
enum class Experiment { convergence, aperture_sweep, spread_sweep, users_sweep, ratefloor_sweep };

std::string_view name(Algorithm a);
std::string_view name(Experiment e);
Algorithm parse_algorithm(std::string_view s);
Experiment parse_experiment(std::string_view s);
const std::vector<Algorithm>& all_algorithms();
const std::vector<Experiment>& all_experiments();

/// What the sweep value of each experiment controls.
std::string_view sweep_quantity(Experiment e);

struct ExperimentSpec {
  Experiment experiment = Experiment::aperture_sweep;
  std::vector<double> grid;
  int realizations = 10;
  std::uint64_t first_seed = 1;
  std::vector<Algorithm> algorithms = all_algorithms();
  ScenarioConfig base;
  std::string out_dir = "results";
  int workers = 1;
  bool timing = false;
  double tol = 1e-4;  // BCD and Dinkelbach thresholds
  int max_outer = 100;

  void validate() const;

  /// Desk-scale defaults for each experiment (grid, G, K_g).
  static ExperimentSpec defaults(Experiment e);

  /// "[experiment]" and "[config]" sections; absent keys keep the defaults of
  /// the named experiment.
  std::string to_text() const;
  static ExperimentSpec from_text(std::string_view content, const std::string& origin = "<memory>");
  static ExperimentSpec load(const std::string& path);
};

/// Scenario configuration of one (sweep value, seed) point.
ScenarioConfig point_config(const ExperimentSpec& spec, double value, std::uint64_t seed);

struct RunRecord {
  Algorithm algorithm = Algorithm::cov;
  std::uint64_t seed = 0;
  double sweep_value = 0.0;
  std::string status = "ok";  // ok, max_outer, or the error kind
  std::string message;
  DinkelbachRun run;
  double wall_ms = 0.0;

  bool ok() const { return status == "ok"; }
};

/// Builds the scenario and the system for `algorithm`, then runs Dinkelbach.
/// Library errors become a status; they never propagate.
RunRecord execute(const ExperimentSpec& spec, Algorithm algorithm, double value, std::uint64_t seed);

std::string_view trace_header();

/// Appends the inner, outer, and final rows of one run.
void append_trace_rows(std::string& out, const ExperimentSpec& spec, const RunRecord& rec);

/// Ten significant digits.
std::string format_value(double v);

using Progress = std::function<void(const RunRecord&, std::size_t done, std::size_t total)>;

/// Runs every point on `spec.workers` threads.  When `spec.out_dir` is not
/// empty the trace goes to <out_dir>/<experiment>.csv, flushed after each run
/// in task order, with the experiment file next to it and summary.csv refreshed at the end.
std::vector<RunRecord> run_experiment(const ExperimentSpec& spec, const Progress& progress = {});

struct SummaryRow {
  std::string experiment;
  std::string algorithm;
  double sweep_value = 0.0;
  int runs = 0;
  int failures = 0;
  double mean_ee = 0.0;     // over successful runs
  double mean_outer = 0.0;  // over successful runs
};

std::vector<SummaryRow> summarize_records(const ExperimentSpec& spec, const std::vector<RunRecord>& records);

/// Reads the final rows of every trace CSV in `dir`.
std::vector<SummaryRow> summarize_dir(const std::string& dir);
std::vector<SummaryRow> summarize_csv(std::string_view content, const std::string& origin);

std::string_view summary_header();
std::string summary_csv(const std::vector<SummaryRow>& rows);
std::string summary_table(const std::vector<SummaryRow>& rows);

}  // namespace capa::harness
