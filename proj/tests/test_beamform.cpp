#include "doctest.h"

#include <random>

#include "capa/beamform.hpp"
#include "capa/cov.hpp"
#include "support.hpp"

using namespace capa;

TEST_SUITE("beamform") {
  TEST_CASE("coefficient and quadrature power agree") {
    std::mt19937_64 rng(3);
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
      const MulticastSystem sys = testing::capa_system(3, 2, seed);
      BeamCoefficients b = testing::beams_from(sys, testing::random_coeffs(sys, rng, 10.0));
      CHECK_THROWS(total_power_grid(sys, b));
      b.refresh(sys);
      CHECK(total_power(sys, b) == doctest::Approx(10.0).epsilon(1e-12));
      CHECK(total_power_grid(sys, b) == doctest::Approx(total_power(sys, b)).epsilon(1e-10));
    }
  }

  TEST_CASE("SINR from projections matches direct quadrature") {
    std::mt19937_64 rng(4);
    const MulticastSystem sys = testing::capa_system(3, 2, 8);
    BeamCoefficients b = testing::beams_from(sys, testing::random_coeffs(sys, rng, 1.0));
    b.refresh(sys);
    const auto& ch = sys.channels();
    for (int u = 0; u < sys.num_users(); ++u) {
      std::vector<double> p(static_cast<std::size_t>(sys.num_groups()));
      for (int g = 0; g < sys.num_groups(); ++g) {
        cplx s = 0.0;
        const auto h = ch.channel(static_cast<std::size_t>(u));
        const auto& j = b.grid_values[static_cast<std::size_t>(g)];
        for (std::size_t n = 0; n < ch.num_nodes(); ++n) s += ch.weights()[n] * h[n] * j[n];
        p[static_cast<std::size_t>(g)] = std::norm(s);
      }
      const int own = sys.group_of(u);
      double interf = sys.noise(u);
      for (int g = 0; g < sys.num_groups(); ++g)
        if (g != own) interf += p[static_cast<std::size_t>(g)];
      const double direct = p[static_cast<std::size_t>(own)] / interf;
      CHECK(sinr(sys, b, own, u - sys.first_user(own)) == doctest::Approx(direct).epsilon(1e-10));
    }
  }

  TEST_CASE("zero beams give zero SINR and report infeasible floors") {
    const MulticastSystem sys = testing::capa_system(2, 2, 1);
    const BeamCoefficients b = BeamCoefficients::zeros(sys);
    for (double s : all_sinr(sys, b.coeffs)) CHECK(s == 0.0);
    const PerfReport rep = energy_efficiency(sys, b);
    CHECK(rep.power == 0.0);
    CHECK_FALSE(rep.feasible());
    CHECK(rep.power_ok);
  }

  TEST_CASE("multicast rate is the worst user's rate") {
    std::mt19937_64 rng(5);
    const MulticastSystem sys = testing::capa_system(2, 3, 2);
    const BeamCoefficients b = testing::beams_from(sys, testing::random_coeffs(sys, rng, 50.0));
    const auto s = all_sinr(sys, b.coeffs);
    for (int g = 0; g < 2; ++g) {
      double worst = 1e300;
      for (int k = 0; k < 3; ++k) worst = std::min(worst, s[static_cast<std::size_t>(g * 3 + k)]);
      CHECK(group_rate(sys, b, g) == doctest::Approx(std::log2(1.0 + worst)).epsilon(1e-14));
    }
    const PerfReport rep = energy_efficiency(sys, b);
    CHECK(rep.ee == doctest::Approx(rep.sum_rate / rep.power).epsilon(1e-14));
  }

  TEST_CASE("closed-form mu recovers the SINR (20 random beam/scenario pairs)") {
    std::mt19937_64 rng(6);
    double worst = 0.0;
    for (int trial = 0; trial < 20; ++trial) {
      const int groups = 1 + trial % 4, users = 1 + trial % 3;
      const MulticastSystem sys = testing::capa_system(groups, users, 100 + static_cast<std::uint64_t>(trial));
      const double power = std::pow(10.0, -6.0 + 0.45 * trial);
      const CMatrix a = testing::random_coeffs(sys, rng, power);
      const CVector mu = mu_update(sys, testing::beams_from(sys, a));
      const auto y = surrogate(sys, mu, a);
      const auto s = all_sinr(sys, a);
      for (std::size_t u = 0; u < s.size(); ++u) worst = std::max(worst, testing::rel_err(y[u], s[u]));
    }
    CHECK(worst <= 1e-10);
  }
}
