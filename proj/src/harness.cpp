#include "capa/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <condition_variable>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <optional>
#include <sstream>
#include <thread>
#include <tuple>

#include "capa/errors.hpp"
#include "capa/spda.hpp"
#include "capa/system.hpp"
#include "capa/textfmt.hpp"

namespace capa::harness {

namespace fs = std::filesystem;

namespace {

constexpr std::string_view kAlgorithmNames[] = {"cov", "zf", "spda-cov", "spda-zf"};
constexpr std::string_view kExperimentNames[] = {"convergence", "aperture-sweep", "spread-sweep", "users-sweep",
                                                 "ratefloor-sweep"};

std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    out.emplace_back(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

std::vector<std::string> tokens(std::string_view s) {
  std::vector<std::string> out;
  std::istringstream in{std::string(s)};
  for (std::string t; in >> t;) out.push_back(t);
  return out;
}

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw ParseError(p.string() + ": cannot open file");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

double sum_rate_of(const std::vector<double>& r) {
  double s = 0.0;
  for (double v : r) s += std::log2(1.0 + std::max(0.0, v));
  return s;
}

std::string join_values(const std::vector<double>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out.push_back(';');
    out += format_value(v[i]);
  }
  return out;
}

std::string status_of(const std::exception& e) {
  if (dynamic_cast<const InfeasibleProblem*>(&e)) return "infeasible_problem";
  if (dynamic_cast<const InfeasibleGeometry*>(&e)) return "infeasible_geometry";
  if (dynamic_cast<const NumericalConditioning*>(&e)) return "numerical_conditioning";
  if (dynamic_cast<const ValidationError*>(&e)) return "validation_error";
  if (dynamic_cast<const DegenerateDistance*>(&e)) return "degenerate_distance";
  return "error";
}

}  // namespace

std::string_view name(Algorithm a) { return kAlgorithmNames[static_cast<int>(a)]; }
std::string_view name(Experiment e) { return kExperimentNames[static_cast<int>(e)]; }

Algorithm parse_algorithm(std::string_view s) {
  for (Algorithm a : all_algorithms())
    if (name(a) == s) return a;
  throw ValidationError("unknown algorithm '" + std::string(s) + "' (expected cov, zf, spda-cov, spda-zf)");
}

Experiment parse_experiment(std::string_view s) {
  for (Experiment e : all_experiments())
    if (name(e) == s) return e;
  throw ValidationError("unknown experiment '" + std::string(s) +
                        "' (expected convergence, aperture-sweep, spread-sweep, users-sweep, ratefloor-sweep)");
}

const std::vector<Algorithm>& all_algorithms() {
  static const std::vector<Algorithm> v{Algorithm::cov, Algorithm::zf, Algorithm::spda_cov, Algorithm::spda_zf};
  return v;
}

const std::vector<Experiment>& all_experiments() {
  static const std::vector<Experiment> v{Experiment::convergence, Experiment::aperture_sweep, Experiment::spread_sweep,
                                         Experiment::users_sweep, Experiment::ratefloor_sweep};
  return v;
}

std::string_view sweep_quantity(Experiment e) {
  switch (e) {
    case Experiment::convergence:
    case Experiment::aperture_sweep:
      return "aperture_area_m2";
    case Experiment::spread_sweep:
      return "spread_radius_m";
    case Experiment::users_sweep:
      return "num_groups";
    case Experiment::ratefloor_sweep:
      return "rate_floor_bps_hz";
  }
  return "value";
}

void ExperimentSpec::validate() const {
  if (grid.empty()) throw ValidationError("sweep grid must not be empty");
  if (realizations < 1) throw ValidationError("realizations must be at least 1");
  if (algorithms.empty()) throw ValidationError("at least one algorithm is required");
  if (workers < 1) throw ValidationError("workers must be at least 1");
  if (!(tol > 0.0)) throw ValidationError("tolerance must be positive");
  if (max_outer < 1) throw ValidationError("max_outer must be at least 1");
  for (double v : grid) {
    if (!std::isfinite(v)) throw ValidationError("sweep values must be finite");
    if (experiment == Experiment::users_sweep && (v < 1.0 || v != std::floor(v)))
      throw ValidationError("users-sweep values are group counts (integers >= 1)");
    if ((experiment == Experiment::convergence || experiment == Experiment::aperture_sweep) && !(v > 0.0))
      throw ValidationError("aperture areas must be positive");
    if (v < 0.0) throw ValidationError("sweep values must be nonnegative");
  }
  base.validate();
}

ExperimentSpec ExperimentSpec::defaults(Experiment e) {
  ExperimentSpec s;
  s.experiment = e;
  switch (e) {
    case Experiment::convergence:
      s.grid = {0.25, 0.5, 1.0};
      s.base.users_per_group = 3;
      break;
    case Experiment::aperture_sweep:
      s.grid = {0.0625, 0.25, 0.5, 1.0};
      s.base.users_per_group = 3;
      break;
    case Experiment::spread_sweep:
      s.grid = {0.25, 0.5, 1.0, 1.5, 2.0};
      s.base.users_per_group = 2;
      break;
    case Experiment::users_sweep:
      s.grid = {1, 2, 3, 4, 5};
      s.base.users_per_group = 2;
      break;
    case Experiment::ratefloor_sweep:
      s.grid = {0.5, 1.0, 1.5, 2.0};
      s.base.users_per_group = 2;
      break;
  }
  return s;
}

std::string ExperimentSpec::to_text() const {
  std::string out = "# desk scale: " + std::to_string(realizations) +
                    " realizations per point, M = " + std::to_string(base.grid_order) +
                    ", tolerance " + text::format_double(tol) + "\n[experiment]\n";
  out += "name = " + std::string(name(experiment)) + '\n';
  out += "grid =";
  for (double v : grid) out += ' ' + text::format_double(v);
  out += "\nrealizations = " + std::to_string(realizations) + '\n';
  out += "first_seed = " + std::to_string(first_seed) + '\n';
  out += "algorithms =";
  for (Algorithm a : algorithms) out += ' ' + std::string(name(a));
  out += "\nworkers = " + std::to_string(workers) + '\n';
  out += "timing = " + std::string(timing ? "1" : "0") + '\n';
  out += "tol = " + text::format_double(tol) + '\n';
  out += "max_outer = " + std::to_string(max_outer) + '\n';
  out += "\n[config]\n";
  base.write(out);
  return out;
}

ExperimentSpec ExperimentSpec::from_text(std::string_view content, const std::string& origin) {
  const text::Document doc = text::Document::parse(content, origin);
  const text::Section* ex = doc.find("experiment");
  if (!ex) doc.fail(0, "experiment", "missing [experiment] section");
  const text::Entry* nm = ex->find("name");
  if (!nm) doc.fail(ex->line, "name", "missing experiment name");
  ExperimentSpec s;
  try {
    s = defaults(parse_experiment(doc.get_string(*ex, "name")));
  } catch (const ValidationError& err) {
    doc.fail(nm->line, "name", err.what());
  }
  for (const auto& e : ex->entries) {
    if (e.key == "name") continue;
    if (e.key == "grid") {
      s.grid = doc.parse_doubles(e);
    } else if (e.key == "realizations") {
      s.realizations = static_cast<int>(doc.parse_int(e));
    } else if (e.key == "first_seed") {
      const auto v = doc.parse_int(e);
      if (v < 0) doc.fail(e.line, e.key, "seed must be nonnegative");
      s.first_seed = static_cast<std::uint64_t>(v);
    } else if (e.key == "algorithms") {
      s.algorithms.clear();
      try {
        for (const auto& t : tokens(e.value)) s.algorithms.push_back(parse_algorithm(t));
      } catch (const ValidationError& err) {
        doc.fail(e.line, e.key, err.what());
      }
    } else if (e.key == "workers") {
      s.workers = static_cast<int>(doc.parse_int(e));
    } else if (e.key == "timing") {
      s.timing = doc.parse_int(e) != 0;
    } else if (e.key == "tol") {
      s.tol = doc.parse_doubles(e).at(0);
    } else if (e.key == "max_outer") {
      s.max_outer = static_cast<int>(doc.parse_int(e));
    } else {
      doc.fail(e.line, e.key, "unknown key in [experiment]");
    }
  }
  if (const text::Section* cfg = doc.find("config")) {
    std::string base_text = "[config]\n";
    s.base.write(base_text);
    const text::Document base_doc = text::Document::parse(base_text, origin);
    text::Section merged = base_doc.sections().front();
    merged.line = cfg->line;
    merged.entries.insert(merged.entries.end(), cfg->entries.begin(), cfg->entries.end());
    s.base = ScenarioConfig::read(doc, merged);
  }
  try {
    s.validate();
  } catch (const ValidationError& err) {
    doc.fail(ex->line, "experiment", err.what());
  }
  return s;
}

ExperimentSpec ExperimentSpec::load(const std::string& path) { return from_text(read_file(path), path); }

ScenarioConfig point_config(const ExperimentSpec& spec, double value, std::uint64_t seed) {
  ScenarioConfig c = spec.base;
  c.seed = seed;
  switch (spec.experiment) {
    case Experiment::convergence:
    case Experiment::aperture_sweep:
      c.aperture = Aperture::square(value);
      break;
    case Experiment::spread_sweep:
      c.spread_radius = value;
      break;
    case Experiment::users_sweep:
      c.num_groups = static_cast<int>(value);
      break;
    case Experiment::ratefloor_sweep:
      c.rate_floors = {value};
      break;
  }
  return c;
}

RunRecord execute(const ExperimentSpec& spec, Algorithm algorithm, double value, std::uint64_t seed) {
  RunRecord rec;
  rec.algorithm = algorithm;
  rec.seed = seed;
  rec.sweep_value = value;
  const auto t0 = std::chrono::steady_clock::now();
  try {
    const Scenario sc = generate(point_config(spec, value, seed));
    const bool discrete = algorithm == Algorithm::spda_cov || algorithm == Algorithm::spda_zf;
    const MulticastSystem sys = discrete ? make_spda_system(sc) : make_capa_system(sc);
    DinkelbachOptions dopts;
    dopts.tol = spec.tol;
    dopts.max_outer = spec.max_outer;
    InnerSolver inner;
    if (algorithm == Algorithm::cov || algorithm == Algorithm::spda_cov) {
      CovOptions copts;
      copts.tol = spec.tol;
      inner = make_cov_solver(sys, copts);
    } else {
      ZfOptions zopts;
      zopts.tol = spec.tol;
      inner = make_zf_solver(sys, zopts);
    }
    rec.run = run(sys, inner, dopts);
    if (!rec.run.converged) {
      rec.status = "max_outer";
      rec.message = "outer iteration cap reached";
    }
  } catch (const std::exception& e) {
    rec.status = status_of(e);
    rec.message = e.what();
    rec.run = {};
  }
  rec.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
  return rec;
}

std::string_view trace_header() {
  return "experiment,algorithm,seed,sweep_value,row,outer_iter,inner_iter,eta,objective,group_rates,power,ee,wall_ms,"
         "status";
}

std::string format_value(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

void append_trace_rows(std::string& out, const ExperimentSpec& spec, const RunRecord& rec) {
  const std::string prefix = std::string(name(spec.experiment)) + ',' + std::string(name(rec.algorithm)) + ',' +
                             std::to_string(rec.seed) + ',' + format_value(rec.sweep_value) + ',';
  auto row = [&](std::string_view kind, int outer, int inner, double eta, double objective,
                 const std::vector<double>& rates, double power, double ee, double wall, std::string_view status) {
    out += prefix;
    out += kind;
    out += ',' + std::to_string(outer) + ',' + std::to_string(inner) + ',' + format_value(eta) + ',' +
           format_value(objective) + ',' + join_values(rates) + ',' + format_value(power) + ',' + format_value(ee) +
           ',' + format_value(wall) + ',';
    out += status;
    out += '\n';
  };
  const double wall = spec.timing ? rec.wall_ms : 0.0;
  int total_inner = 0;
  for (const auto& step : rec.run.steps) {
    int n = 0;
    for (const auto& it : step.inner.trace) {
      std::vector<double> rates;
      for (double r : it.r) rates.push_back(std::log2(1.0 + std::max(0.0, r)));
      const double sr = sum_rate_of(it.r);
      row("inner", step.outer, n, step.eta, it.objective, rates, it.power, it.power > 0 ? sr / it.power : 0.0, 0.0,
          "ok");
      ++n;
    }
    total_inner += n;
    row("outer", step.outer, n, step.eta, step.objective, step.group_rates, step.power, step.ee, 0.0, "ok");
  }
  if (rec.run.steps.empty()) {
    const double nan = std::nan("");
    row("final", 0, 0, nan, nan, {}, nan, nan, wall, rec.status);
  } else {
    const auto& last = rec.run.steps.back();
    row("final", rec.run.outer_iterations(), total_inner, rec.run.eta, last.objective, rec.run.report.group_rates,
        rec.run.report.power, rec.run.report.ee, wall, rec.status);
  }
}

std::vector<RunRecord> run_experiment(const ExperimentSpec& spec, const Progress& progress) {
  spec.validate();
  struct Task {
    double value;
    std::uint64_t seed;
    Algorithm algorithm;
  };
  std::vector<Task> tasks;
  for (double v : spec.grid)
    for (int i = 0; i < spec.realizations; ++i)
      for (Algorithm a : spec.algorithms) tasks.push_back({v, spec.first_seed + static_cast<std::uint64_t>(i), a});

  std::ofstream trace;
  fs::path trace_path;
  if (!spec.out_dir.empty()) {
    fs::create_directories(spec.out_dir);
    const std::string stem(name(spec.experiment));
    std::ofstream meta(fs::path(spec.out_dir) / (stem + ".txt"), std::ios::binary);
    meta << spec.to_text();
    trace_path = fs::path(spec.out_dir) / (stem + ".csv");
    trace.open(trace_path, std::ios::binary | std::ios::trunc);
    if (!trace) throw Error("cannot write " + trace_path.string());
    trace << trace_header() << '\n';
    trace.flush();
  }

  std::vector<std::optional<RunRecord>> slots(tasks.size());
  std::mutex m;
  std::condition_variable cv;
  std::size_t next_task = 0;

  auto worker = [&] {
    while (true) {
      std::size_t i;
      {
        std::lock_guard lock(m);
        if (next_task >= tasks.size()) return;
        i = next_task++;
      }
      RunRecord rec = execute(spec, tasks[i].algorithm, tasks[i].value, tasks[i].seed);
      {
        std::lock_guard lock(m);
        slots[i] = std::move(rec);
      }
      cv.notify_one();
    }
  };

  const auto n_threads = static_cast<std::size_t>(std::min<int>(spec.workers, static_cast<int>(tasks.size())));
  std::vector<std::thread> pool;
  for (std::size_t t = 0; t < n_threads; ++t) pool.emplace_back(worker);

  std::vector<RunRecord> records;
  records.reserve(tasks.size());
  for (std::size_t i = 0; i < tasks.size(); ++i) {
    RunRecord rec;
    {
      std::unique_lock lock(m);
      cv.wait(lock, [&] { return slots[i].has_value(); });
      rec = std::move(*slots[i]);
      slots[i].reset();
    }
    if (trace.is_open()) {
      std::string rows;
      append_trace_rows(rows, spec, rec);
      trace << rows;
      trace.flush();
    }
    if (progress) progress(rec, i + 1, tasks.size());
    records.push_back(std::move(rec));
  }
  for (auto& t : pool) t.join();

  if (trace.is_open()) {
    trace.close();
    std::ofstream summary(fs::path(spec.out_dir) / "summary.csv", std::ios::binary | std::ios::trunc);
    summary << summary_csv(summarize_dir(spec.out_dir));
  }
  return records;
}

namespace {

struct Accumulator {
  int runs = 0, failures = 0, ok = 0;
  double ee = 0.0, outer = 0.0;

  void add(bool success, double e, double o) {
    ++runs;
    if (!success) {
      ++failures;
      return;
    }
    ++ok;
    ee += e;
    outer += o;
  }
};

using Key = std::tuple<std::string, std::string, double>;

std::vector<SummaryRow> finish(const std::map<Key, Accumulator>& acc) {
  std::vector<SummaryRow> out;
  for (const auto& [k, a] : acc) {
    SummaryRow r;
    r.experiment = std::get<0>(k);
    r.algorithm = std::get<1>(k);
    r.sweep_value = std::get<2>(k);
    r.runs = a.runs;
    r.failures = a.failures;
    r.mean_ee = a.ok ? a.ee / a.ok : std::nan("");
    r.mean_outer = a.ok ? a.outer / a.ok : std::nan("");
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace

std::vector<SummaryRow> summarize_records(const ExperimentSpec& spec, const std::vector<RunRecord>& records) {
  std::map<Key, Accumulator> acc;
  for (const auto& rec : records)
    acc[{std::string(name(spec.experiment)), std::string(name(rec.algorithm)), rec.sweep_value}].add(
        rec.ok(), rec.run.report.ee, rec.run.outer_iterations());
  return finish(acc);
}

std::vector<SummaryRow> summarize_csv(std::string_view content, const std::string& origin) {
  std::map<Key, Accumulator> acc;
  std::istringstream in{std::string(content)};
  std::string line;
  if (!std::getline(in, line)) return {};
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != trace_header()) throw ParseError(origin + ":1: header does not match the trace schema");
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto f = split(line, ',');
    if (f.size() != 14) throw ParseError(origin + ":" + std::to_string(lineno) + ": expected 14 fields");
    if (f[4] != "final") continue;
    try {
      acc[{f[0], f[1], std::stod(f[3])}].add(f[13] == "ok", std::stod(f[11]), std::stod(f[5]));
    } catch (const std::logic_error&) {
      throw ParseError(origin + ":" + std::to_string(lineno) + ": malformed number");
    }
  }
  return finish(acc);
}

std::vector<SummaryRow> summarize_dir(const std::string& dir) {
  if (!fs::is_directory(dir)) throw ValidationError(dir + " is not a directory");
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir))
    if (entry.is_regular_file() && entry.path().extension() == ".csv" && entry.path().filename() != "summary.csv")
      files.push_back(entry.path());
  std::sort(files.begin(), files.end());
  std::vector<SummaryRow> out;
  for (const auto& p : files) {
    const std::string content = read_file(p);
    if (content.rfind(trace_header(), 0) != 0) continue;
    auto rows = summarize_csv(content, p.string());
    out.insert(out.end(), rows.begin(), rows.end());
  }
  return out;
}

std::string_view summary_header() { return "experiment,algorithm,sweep_value,runs,failures,mean_ee,mean_outer_iter"; }

std::string summary_csv(const std::vector<SummaryRow>& rows) {
  std::string out(summary_header());
  out.push_back('\n');
  for (const auto& r : rows)
    out += r.experiment + ',' + r.algorithm + ',' + format_value(r.sweep_value) + ',' + std::to_string(r.runs) + ',' +
           std::to_string(r.failures) + ',' + format_value(r.mean_ee) + ',' + format_value(r.mean_outer) + '\n';
  return out;
}

std::string summary_table(const std::vector<SummaryRow>& rows) {
  if (rows.empty()) return "summary: no runs found\n";
  char buf[256];
  std::snprintf(buf, sizeof buf, "%-16s %-9s %12s %5s %8s %16s %10s\n", "experiment", "algorithm", "sweep", "runs",
                "failures", "mean_ee", "mean_outer");
  std::string out = buf;
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, "%-16s %-9s %12s %5d %8d %16s %10s\n", r.experiment.c_str(), r.algorithm.c_str(),
                  format_value(r.sweep_value).c_str(), r.runs, r.failures, format_value(r.mean_ee).c_str(),
                  format_value(r.mean_outer).c_str());
    out += buf;
  }
  return out;
}

}  // namespace capa::harness
