#include <cstdio>
#include <cstdlib>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "capa/errors.hpp"
#include "capa/harness.hpp"

using namespace capa;

namespace {

struct RunFlags {
  std::string experiment;
  std::string config;
  std::vector<double> grid;
  int realizations = 0;
  long long first_seed = -1;
  std::vector<std::string> algorithms;
  std::string out_dir;
  int workers = 0;
  bool timing = false;
  double tol = 0.0;
  int max_outer = 0;
  int groups = 0;
  int users_per_group = 0;
  double aperture_area = 0.0;
  double spread = -1.0;
  double power_budget = 0.0;
  double noise = 0.0;
  std::vector<double> rate_floor;
  int grid_order = 0;
  double wavelength = 0.0;
  bool quiet = false;
};

harness::ExperimentSpec build_spec(const RunFlags& f) {
  harness::ExperimentSpec s = f.config.empty() ? harness::ExperimentSpec::defaults(harness::parse_experiment(f.experiment))
                                               : harness::ExperimentSpec::load(f.config);
  if (!f.config.empty() && harness::name(s.experiment) != f.experiment)
    throw ValidationError("config file describes '" + std::string(harness::name(s.experiment)) + "', not '" +
                          f.experiment + "'");
  if (const char* env = std::getenv("CAPA_OUT_DIR"); env && *env) s.out_dir = env;
  if (!f.out_dir.empty()) s.out_dir = f.out_dir;
  if (!f.grid.empty()) s.grid = f.grid;
  if (f.realizations) s.realizations = f.realizations;
  if (f.first_seed >= 0) s.first_seed = static_cast<std::uint64_t>(f.first_seed);
  if (!f.algorithms.empty()) {
    s.algorithms.clear();
    for (const auto& a : f.algorithms) s.algorithms.push_back(harness::parse_algorithm(a));
  }
  if (f.workers) s.workers = f.workers;
  if (f.timing) s.timing = true;
  if (f.tol > 0.0) s.tol = f.tol;
  if (f.max_outer) s.max_outer = f.max_outer;
  if (f.groups) s.base.num_groups = f.groups;
  if (f.users_per_group) s.base.users_per_group = f.users_per_group;
  if (f.aperture_area > 0.0) s.base.aperture = Aperture::square(f.aperture_area);
  if (f.spread >= 0.0) s.base.spread_radius = f.spread;
  if (f.power_budget > 0.0) s.base.power_budget = f.power_budget;
  if (f.noise > 0.0) s.base.noise_variance = f.noise;
  if (!f.rate_floor.empty()) s.base.rate_floors = f.rate_floor;
  if (f.grid_order) s.base.grid_order = f.grid_order;
  if (f.wavelength > 0.0) s.base.radio.wavelength = f.wavelength;
  s.validate();
  return s;
}

int do_run(const RunFlags& f) {
  const harness::ExperimentSpec spec = build_spec(f);
  const auto records = harness::run_experiment(spec, [&](const harness::RunRecord& r, std::size_t done, std::size_t total) {
    if (f.quiet) return;
    std::fprintf(stderr, "[%zu/%zu] %s %s=%s seed=%llu %s ee=%s outer=%d%s%s\n", done, total,
                 std::string(harness::name(r.algorithm)).c_str(), std::string(harness::sweep_quantity(spec.experiment)).c_str(),
                 harness::format_value(r.sweep_value).c_str(), static_cast<unsigned long long>(r.seed), r.status.c_str(),
                 harness::format_value(r.ok() ? r.run.report.ee : std::nan("")).c_str(), r.run.outer_iterations(),
                 r.message.empty() ? "" : ": ", r.message.c_str());
  });
  std::cout << harness::summary_table(harness::summarize_records(spec, records));
  if (!spec.out_dir.empty())
    std::cout << "trace: " << spec.out_dir << '/' << harness::name(spec.experiment) << ".csv\n";
  return 0;
}

int do_summarize(const std::string& dir, bool write) {
  const auto rows = harness::summarize_dir(dir);
  std::cout << harness::summary_table(rows);
  if (write && !rows.empty()) {
    std::FILE* out = std::fopen((dir + "/summary.csv").c_str(), "wb");
    if (!out) throw Error("cannot write " + dir + "/summary.csv");
    const std::string csv = harness::summary_csv(rows);
    std::fwrite(csv.data(), 1, csv.size(), out);
    std::fclose(out);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"CAPA multi-group multicast energy-efficiency experiments"};
  app.require_subcommand(1);

  RunFlags f;
  auto* run = app.add_subcommand("run", "Run one experiment and write CSV traces");
  run->add_option("experiment", f.experiment, "convergence | aperture-sweep | spread-sweep | users-sweep | ratefloor-sweep")
      ->required();
  run->add_option("-c,--config", f.config, "Experiment file ([experiment] and [config] sections)")->check(CLI::ExistingFile);
  run->add_option("--grid", f.grid, "Sweep values");
  run->add_option("-n,--realizations", f.realizations, "Seeds per sweep point")->check(CLI::PositiveNumber);
  run->add_option("--first-seed", f.first_seed, "First seed")->check(CLI::NonNegativeNumber);
  run->add_option("-a,--algorithms", f.algorithms, "Any of cov, zf, spda-cov, spda-zf");
  run->add_option("-o,--out", f.out_dir, "Output directory (default results, or $CAPA_OUT_DIR)");
  run->add_option("-j,--workers", f.workers, "Worker threads")->check(CLI::PositiveNumber);
  run->add_flag("--timing", f.timing, "Record wall-clock milliseconds (CSV no longer byte-reproducible)");
  run->add_option("--tol", f.tol, "BCD and Dinkelbach threshold")->check(CLI::PositiveNumber);
  run->add_option("--max-outer", f.max_outer, "Dinkelbach iteration cap")->check(CLI::PositiveNumber);
  run->add_option("-G,--groups", f.groups, "Number of groups")->check(CLI::PositiveNumber);
  run->add_option("-K,--users-per-group", f.users_per_group, "Users per group")->check(CLI::PositiveNumber);
  run->add_option("--aperture-area", f.aperture_area, "Square aperture area, m^2")->check(CLI::PositiveNumber);
  run->add_option("--spread", f.spread, "Users' spread radius, m")->check(CLI::NonNegativeNumber);
  run->add_option("--power-budget", f.power_budget, "Transmit power budget, mA^2")->check(CLI::PositiveNumber);
  run->add_option("--noise", f.noise, "Noise variance, V^2/m^2")->check(CLI::PositiveNumber);
  run->add_option("--rate-floor", f.rate_floor, "Per-group rate floors, bit/s/Hz (one value broadcasts)");
  run->add_option("--grid-order", f.grid_order, "Gauss-Legendre points per axis")->check(CLI::PositiveNumber);
  run->add_option("--wavelength", f.wavelength, "Wavelength, m")->check(CLI::PositiveNumber);
  run->add_flag("-q,--quiet", f.quiet, "No per-run progress lines");

  std::string dir;
  bool no_write = false;
  auto* sum = app.add_subcommand("summarize", "Mean EE, mean outer iterations, and failures per sweep point");
  sum->add_option("dir", dir, "Directory holding trace CSVs")->required();
  sum->add_flag("--no-write", no_write, "Print only; do not write summary.csv");

  CLI11_PARSE(app, argc, argv);
  try {
    if (*run) return do_run(f);
    return do_summarize(dir, !no_write);
  } catch (const capa::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  }
}
