#include "doctest.h"

#include "capa/dinkelbach.hpp"
#include "capa/spda.hpp"
#include "support.hpp"

using namespace capa;

namespace {

void check_run(const MulticastSystem& sys, const DinkelbachRun& run) {
  REQUIRE(run.converged);
  CHECK(run.outer_iterations() <= 30);
  for (std::size_t i = 2; i < run.steps.size(); ++i)
    CHECK(run.steps[i].eta - run.steps[i - 1].eta >= -1e-6 * std::max(1.0, run.steps[i - 1].eta));
  CHECK(run.steps.back().objective >= -1e-4);
  CHECK(run.report.feasible());
  CHECK(run.eta == doctest::Approx(run.report.ee).epsilon(1e-12));
  CHECK(energy_efficiency(sys, run.beams).ee == doctest::Approx(run.eta).epsilon(1e-12));
  CHECK(run.steps.front().eta == 0.0);
}

}  // namespace

TEST_SUITE("dinkelbach") {
  TEST_CASE("single user: final EE equals the scalar EE maximizer") {
    const MulticastSystem sys = testing::capa_system(1, 1, 11);
    const double h = std::real(sys.gram()(0, 0)), noise = sys.noise(0);
    const double rho_floor = noise * sys.sinr_floor(0) / h;
    auto ee = [&](double rho) { return std::log2(1.0 + rho * h / noise) / rho; };
    const double rho_star = testing::golden_max(ee, rho_floor, sys.power_budget());
    const double expected = ee(rho_star);
    const DinkelbachRun zf = run(sys, make_zf_solver(sys));
    CHECK(testing::rel_err(zf.eta, expected) <= 1e-3);
    check_run(sys, zf);
    const DinkelbachRun cov = run(sys, make_cov_solver(sys));
    CHECK(testing::rel_err(cov.eta, expected) <= 1e-3);
    check_run(sys, cov);
  }

  TEST_CASE("ZF Dinkelbach on default scenarios, both backends") {
    for (std::uint64_t seed = 1; seed <= 3; ++seed) {
      CAPTURE(seed);
      const Scenario sc = generate(testing::config(3, 3, seed));
      const MulticastSystem capa = make_capa_system(sc), spda = make_spda_system(sc);
      check_run(capa, run(capa, make_zf_solver(capa)));
      check_run(spda, run(spda, make_zf_solver(spda)));
    }
  }

  TEST_CASE("CoV Dinkelbach dominates ZF on a small scenario") {
    const MulticastSystem sys = testing::capa_system(2, 2, 3);
    const DinkelbachRun cov = run(sys, make_cov_solver(sys));
    const DinkelbachRun zf = run(sys, make_zf_solver(sys));
    check_run(sys, cov);
    check_run(sys, zf);
    CHECK(cov.eta >= zf.eta * (1 - 1e-4));
    for (const auto& step : cov.steps)
      for (std::size_t i = 1; i < step.inner.trace.size(); ++i)
        CHECK(step.inner.trace[i].objective - step.inner.trace[i - 1].objective >= -1e-8);
  }

  TEST_CASE("options are validated and the iteration cap is honored") {
    const MulticastSystem sys = testing::capa_system(2, 2, 3);
    DinkelbachOptions bad;
    bad.eta0 = -1.0;
    CHECK_THROWS(run(sys, make_zf_solver(sys), bad));
    bad = {};
    bad.tol = 0.0;
    CHECK_THROWS(run(sys, make_zf_solver(sys), bad));
    DinkelbachOptions capped;
    capped.max_outer = 2;
    const DinkelbachRun r = run(sys, make_zf_solver(sys), capped);
    CHECK(r.outer_iterations() == 2);
    CHECK_FALSE(r.converged);
  }
}
