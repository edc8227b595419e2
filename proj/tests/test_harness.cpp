#include "doctest.h"

#include <filesystem>
#include <fstream>
#include <sstream>

#include "capa/errors.hpp"
#include "capa/harness.hpp"

using namespace capa;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

fs::path fresh_dir(const std::string& name) {
  const fs::path d = fs::temp_directory_path() / name;
  fs::remove_all(d);
  return d;
}

harness::ExperimentSpec tiny(const fs::path& out) {
  harness::ExperimentSpec s = harness::ExperimentSpec::defaults(harness::Experiment::users_sweep);
  s.grid = {1, 2};
  s.realizations = 2;
  s.algorithms = {harness::Algorithm::zf, harness::Algorithm::spda_zf};
  s.out_dir = out.string();
  return s;
}

}  // namespace

TEST_SUITE("harness") {
  TEST_CASE("trace and summary headers are fixed") {
    CHECK(harness::trace_header() ==
          "experiment,algorithm,seed,sweep_value,row,outer_iter,inner_iter,eta,objective,group_rates,power,ee,wall_ms,status");
    CHECK(harness::summary_header() == "experiment,algorithm,sweep_value,runs,failures,mean_ee,mean_outer_iter");
    CHECK(harness::format_value(1.0 / 3.0) == "0.3333333333");
    CHECK(harness::format_value(123456789012.0) == "1.23456789e+11");
  }

  TEST_CASE("identical specs give byte-identical CSVs, written with two workers") {
    const fs::path a = fresh_dir("capa_h_a"), b = fresh_dir("capa_h_b");
    harness::ExperimentSpec sa = tiny(a), sb = tiny(b);
    sb.workers = 2;
    const auto ra = harness::run_experiment(sa);
    harness::run_experiment(sb);
    CHECK(ra.size() == 8);
    const std::string ta = slurp(a / "users-sweep.csv");
    CHECK(ta == slurp(b / "users-sweep.csv"));
    CHECK(ta.rfind(std::string(harness::trace_header()) + "\n", 0) == 0);
    CHECK(slurp(a / "summary.csv") == slurp(b / "summary.csv"));
    const auto rows = harness::summarize_dir(a.string());
    CHECK(rows.size() == 4);
    for (const auto& r : rows) {
      CHECK(r.runs == 2);
      CHECK(r.failures == 0);
      CHECK(r.mean_ee > 0.0);
    }
    CHECK(harness::ExperimentSpec::load((a / "users-sweep.txt").string()).to_text() == sa.to_text());
    fs::remove_all(a);
    fs::remove_all(b);
  }

  TEST_CASE("failed runs become status rows and the experiment continues") {
    const fs::path d = fresh_dir("capa_h_fail");
    harness::ExperimentSpec s = harness::ExperimentSpec::defaults(harness::Experiment::ratefloor_sweep);
    s.grid = {60.0, 0.5};
    s.realizations = 1;
    s.algorithms = {harness::Algorithm::zf};
    s.out_dir = d.string();
    const auto recs = harness::run_experiment(s);
    REQUIRE(recs.size() == 2);
    CHECK(recs[0].status == "infeasible_problem");
    CHECK(recs[1].ok());
    const std::string t = slurp(d / "ratefloor-sweep.csv");
    CHECK(t.find(",final,0,0,nan,nan,,nan,nan,0,infeasible_problem\n") != std::string::npos);
    const auto rows = harness::summarize_dir(d.string());
    REQUIRE(rows.size() == 2);
    CHECK(rows[0].sweep_value == 0.5);
    CHECK(rows[0].failures == 0);
    CHECK(rows[1].failures == 1);
    fs::remove_all(d);
  }

  TEST_CASE("summary means match a hand computation on a fixture") {
    std::string csv(harness::trace_header());
    csv += "\n";
    csv += "aperture-sweep,cov,1,0.25,inner,1,0,0,1,1,1,1,0,ok\n";
    csv += "aperture-sweep,cov,1,0.25,final,4,20,100,0,1;1,0.02,100,0,ok\n";
    csv += "aperture-sweep,cov,2,0.25,final,6,20,300,0,1;1,0.02,300,0,ok\n";
    csv += "aperture-sweep,cov,3,0.25,final,0,0,nan,nan,,nan,nan,0,infeasible_problem\n";
    const auto rows = harness::summarize_csv(csv, "fixture");
    REQUIRE(rows.size() == 1);
    CHECK(rows[0].runs == 3);
    CHECK(rows[0].failures == 1);
    CHECK(rows[0].mean_ee == 200.0);
    CHECK(rows[0].mean_outer == 5.0);
    CHECK(harness::summary_csv(rows) ==
          std::string(harness::summary_header()) + "\naperture-sweep,cov,0.25,3,1,200,5\n");
    CHECK_THROWS_AS(harness::summarize_csv("a,b\n", "bad"), ParseError);
  }

  TEST_CASE("empty directory gives an explicit empty summary") {
    const fs::path d = fresh_dir("capa_h_empty");
    fs::create_directories(d);
    const auto rows = harness::summarize_dir(d.string());
    CHECK(rows.empty());
    CHECK(harness::summary_table(rows) == "summary: no runs found\n");
    fs::remove_all(d);
    CHECK_THROWS_AS(harness::summarize_dir(d.string()), ValidationError);
  }

  TEST_CASE("experiment files: defaults, overrides, and errors") {
    const auto s = harness::ExperimentSpec::from_text(
        "[experiment]\nname = spread-sweep\ngrid = 0.5 1\nalgorithms = cov zf\n[config]\npower_budget = 10\n", "x");
    CHECK(s.experiment == harness::Experiment::spread_sweep);
    CHECK(s.grid == std::vector<double>{0.5, 1.0});
    CHECK(s.base.users_per_group == 2);
    CHECK(s.base.power_budget == 10.0);
    CHECK(s.algorithms.size() == 2);
    CHECK(harness::point_config(s, 1.0, 7).spread_radius == 1.0);
    CHECK(harness::point_config(s, 1.0, 7).seed == 7);
    CHECK_THROWS_AS(harness::ExperimentSpec::from_text("[experiment]\nname = nope\n", "x"), ParseError);
    CHECK_THROWS_AS(harness::ExperimentSpec::from_text("[experiment]\nname = users-sweep\ngrid = 0.5\n", "x"), ParseError);
    CHECK_THROWS_AS(harness::ExperimentSpec::from_text("[experiment]\nname = users-sweep\nfoo = 1\n", "x"), ParseError);
    CHECK_THROWS_AS(harness::ExperimentSpec::from_text("[experiment]\nname = users-sweep\nalgorithms = cov mmse\n", "x"),
                    ParseError);
    const auto ap = harness::ExperimentSpec::defaults(harness::Experiment::aperture_sweep);
    CHECK(harness::point_config(ap, 1.0, 1).aperture.len_x == doctest::Approx(1.0));
    CHECK(harness::point_config(harness::ExperimentSpec::defaults(harness::Experiment::users_sweep), 4, 1).num_groups == 4);
    CHECK(harness::point_config(harness::ExperimentSpec::defaults(harness::Experiment::ratefloor_sweep), 2, 1).rate_floor(0) == 2.0);
  }
}
