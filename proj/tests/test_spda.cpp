#include "doctest.h"

#include <cmath>
#include <numbers>

#include "capa/dinkelbach.hpp"
#include "capa/spda.hpp"
#include "support.hpp"

using namespace capa;

namespace {

Scenario users_only(const ScenarioConfig& c, const Scenario& like) {
  std::vector<Vec3> pos;
  for (const auto& u : like.users) pos.push_back(u.geometry.position);
  return assemble(c, like.group_centers, pos);
}

double rel_gram_error(const CMatrix& a, const CMatrix& ref) { return (a - ref).cwiseAbs().maxCoeff() / ref.cwiseAbs().maxCoeff(); }

}  // namespace

TEST_SUITE("spda") {
  TEST_CASE("array layout") {
    const Radio radio;
    const SpdaArray a = build_array(Aperture{0.5, 0.5}, radio);
    CHECK(a.spacing == doctest::Approx(0.0625));
    CHECK(a.nx == 8);
    CHECK(a.ny == 8);
    CHECK(a.size() == 64);
    CHECK(a.positions.size() == 64);
    for (const auto& p : a.positions) CHECK(Aperture{0.5, 0.5}.contains(p));
    CHECK(a.positions.front().x() == doctest::Approx(-0.25));
    CHECK(a.positions[static_cast<std::size_t>(1 * a.ny)].x() - a.positions[0].x() == doctest::Approx(0.0625));

    CHECK(build_array(Aperture::square(1.0), radio).nx == 16);
    const SpdaArray one = build_array(Aperture{0.5, 0.5}, Radio{1e3, 120 * std::numbers::pi});
    CHECK(one.size() == 1);
    double cells = 0.0;
    for (int ix = 0; ix < a.nx; ++ix)
      for (int iy = 0; iy < a.ny; ++iy) cells += a.cell_x[static_cast<std::size_t>(ix)] * a.cell_y[static_cast<std::size_t>(iy)];
    CHECK(cells == doctest::Approx(0.25));
  }

  TEST_CASE("element channels carry the effective-area scale") {
    ScenarioConfig c = testing::config(1, 1, 1);
    const double z = 20.0;
    const Scenario sc = assemble(c, {Vec3(0, 0, z)}, {Vec3(0, 0, z)});
    const SpdaArray arr = build_array(c.aperture, c.radio);
    const ChannelSet ch = spda_channels(arr, sc);
    const double lam = c.radio.wavelength;
    for (int e = 0; e < arr.size(); ++e) {
      const Vec3 d = Vec3(0, 0, z) - arr.positions[static_cast<std::size_t>(e)];
      const double dist = d.norm();
      const double proj = 1.0 - std::pow(d.y() / dist, 2);
      const double expected = std::sqrt(lam * lam / (4 * std::numbers::pi)) * c.radio.impedance / (2 * lam * dist) * proj;
      CHECK(std::abs(ch.channel(0)[static_cast<std::size_t>(e)]) == doctest::Approx(expected).epsilon(1e-13));
      CHECK(ch.weights()[static_cast<std::size_t>(e)] == 1.0);
    }
    CHECK(effective_area(c.radio) == doctest::Approx(lam * lam / (4 * std::numbers::pi)));
  }

  TEST_CASE("continuous and discrete Gram matrices converge to the same limit") {
    const ScenarioConfig base = testing::config(2, 2, 3);
    const Scenario sc = generate(base);
    ScenarioConfig ref_cfg = base;
    ref_cfg.grid_order = 40;
    const CMatrix ref = make_capa_system(users_only(ref_cfg, sc)).gram();

    std::vector<double> cont, disc;
    for (int m : {2, 4, 8}) {
      ScenarioConfig c = base;
      c.grid_order = m;
      cont.push_back(rel_gram_error(make_capa_system(users_only(c, sc)).gram(), ref));
    }
    const double len = base.aperture.len_x;
    for (int div : {8, 16, 32}) {
      const SpdaArray arr = build_array(base.aperture, len / div);
      disc.push_back(rel_gram_error(spda_channels(arr, sc, ElementWeighting::voronoi).gram(), ref));
    }
    MESSAGE("quadrature errors " << cont[0] << " " << cont[1] << " " << cont[2]);
    MESSAGE("array errors " << disc[0] << " " << disc[1] << " " << disc[2]);
    for (int i = 1; i < 3; ++i) {
      CHECK(cont[static_cast<std::size_t>(i)] < 0.5 * cont[static_cast<std::size_t>(i - 1)]);
      CHECK(disc[static_cast<std::size_t>(i)] < 0.5 * disc[static_cast<std::size_t>(i - 1)]);
    }
  }

  TEST_CASE("single antenna, single user: scalar matched filter") {
    ScenarioConfig c = testing::config(1, 1, 4);
    c.radio.wavelength = 1.0;
    c.aperture = Aperture{0.4, 0.4};
    const Scenario sc = generate(c);
    const MulticastSystem sys = make_spda_system(sc);
    REQUIRE(sys.channels().num_nodes() == 1);
    const double h = std::norm(sys.channels().channel(0)[0]);
    const double rho_floor = sys.noise(0) * sys.sinr_floor(0) / h;
    const double expected = 1.0 / rho_floor;
    const DinkelbachRun r = run(sys, make_zf_solver(sys));
    CHECK(testing::rel_err(r.eta, expected) <= 1e-3);
  }

  TEST_CASE("ZF orthogonality holds on the discrete vectors") {
    const MulticastSystem sys = make_spda_system(generate(testing::config(3, 3, 1)));
    const ZfBasis zb = build_zf_basis(select_representatives(sys), sys);
    for (int i = 0; i < 3; ++i)
      for (int g = 0; g < 3; ++g) {
        if (g == i) continue;
        const int rep = zb.reps[static_cast<std::size_t>(i)];
        CHECK(std::abs(zb.cross(rep, g)) / std::sqrt(std::real(sys.gram()(rep, rep)) * zb.norm[static_cast<std::size_t>(g)]) < 1e-9);
      }
  }
}
