#include "doctest.h"

#include <cmath>
#include <numbers>
#include <numeric>

#include "capa/channel.hpp"
#include "capa/errors.hpp"
#include "capa/geometry.hpp"

using namespace capa;

TEST_SUITE("geometry") {
  TEST_CASE("Green's function on axis") {
    const Radio radio;
    const double z = 20.0;
    const Mat3c g = green_dyadic(Vec3(0, 0, z), Vec3::Zero(), radio);
    const double expected = radio.impedance / (2.0 * radio.wavelength * z);
    CHECK(std::abs(g(1, 1)) == doctest::Approx(expected).epsilon(1e-14));
    CHECK(std::abs(g(0, 0)) == doctest::Approx(expected).epsilon(1e-14));
    CHECK(std::abs(g(2, 2)) < 1e-12 * expected);
    CHECK(std::abs(g(0, 1)) < 1e-12 * expected);

    UserGeometry ux{Vec3(0, 0, z), Vec3::UnitX()};
    CHECK(std::abs(channel_scalar(ux, Vec3::Zero(), radio)) < 1e-12 * expected);
    UserGeometry uy{Vec3(0, 0, z), Vec3::UnitY()};
    CHECK(std::abs(channel_scalar(uy, Vec3::Zero(), radio)) == doctest::Approx(expected).epsilon(1e-14));
  }

  TEST_CASE("Green's function is transverse and matches the scalar projection") {
    const Radio radio;
    const Vec3 r(1.3, -0.7, 17.0), s(0.2, 0.1, 0.0);
    const Mat3c g = green_dyadic(r, s, radio);
    const Vec3 d = (r - s).normalized();
    CHECK((g * d.cast<cplx>()).norm() < 1e-12 * g.norm());
    const Vec3 pol = Vec3(0.3, 0.8, 0.1).normalized();
    const UserGeometry u{r, pol};
    const cplx direct = (pol.cast<cplx>().transpose() * g * Vec3::UnitY().cast<cplx>())(0, 0);
    CHECK(std::abs(channel_scalar(u, s, radio) - direct) < 1e-13 * std::abs(direct));
    // half a wavelength further along the same ray flips the phase
    const cplx ratio = green_dyadic(r, s, radio)(0, 0) / green_dyadic(r + 0.5 * radio.wavelength * d, s, radio)(0, 0);
    CHECK(std::abs(std::arg(-ratio)) < 1e-9);
  }

  TEST_CASE("degenerate distance is rejected") {
    const Radio radio;
    CHECK_THROWS_AS(green_dyadic(Vec3(0.1, 0.1, 0), Vec3(0.1, 0.1, 0), radio), DegenerateDistance);
    UserGeometry u{Vec3(0, 0, 0), Vec3::UnitY()};
    CHECK_THROWS_AS(channel_scalar(u, Vec3::Zero(), radio), DegenerateDistance);
  }

  TEST_CASE("Gauss-Legendre rules integrate polynomials of degree 2M-1 exactly") {
    for (int m : {1, 2, 3, 5, 8, 20, 40}) {
      CAPTURE(m);
      const GaussLegendreRule rule = gauss_legendre(m);
      REQUIRE(rule.nodes.size() == static_cast<std::size_t>(m));
      CHECK(std::accumulate(rule.weights.begin(), rule.weights.end(), 0.0) == doctest::Approx(2.0).epsilon(1e-14));
      for (int deg = 0; deg <= 2 * m - 1; ++deg) {
        double q = 0.0;
        for (int i = 0; i < m; ++i) q += rule.weights[static_cast<std::size_t>(i)] * std::pow(rule.nodes[static_cast<std::size_t>(i)], deg);
        const double exact = deg % 2 ? 0.0 : 2.0 / (deg + 1);
        CHECK(std::abs(q - exact) < 1e-13);
      }
      for (int i = 1; i < m; ++i) CHECK(rule.nodes[static_cast<std::size_t>(i)] > rule.nodes[static_cast<std::size_t>(i - 1)]);
    }
    CHECK_THROWS_AS(gauss_legendre(0), ValidationError);
  }

  TEST_CASE("aperture grid weights sum to the area and nodes lie inside") {
    const Aperture ap{0.5, 0.3};
    const ApertureGrid grid = make_grid(ap, 20);
    CHECK(grid.size() == 400);
    CHECK(std::accumulate(grid.weights.begin(), grid.weights.end(), 0.0) == doctest::Approx(0.15).epsilon(1e-13));
    for (const auto& n : grid.nodes) CHECK(ap.contains(n));
    // x^2 y^2 over the rectangle
    double q = 0.0;
    for (std::size_t i = 0; i < grid.size(); ++i) q += grid.weights[i] * std::pow(grid.nodes[i].x() * grid.nodes[i].y(), 2);
    const double exact = (2.0 * std::pow(0.25, 3) / 3.0) * (2.0 * std::pow(0.15, 3) / 3.0);
    CHECK(q == doctest::Approx(exact).epsilon(1e-13));
  }

  TEST_CASE("mirror-symmetric users see mirrored samples") {
    const Radio radio;
    const ApertureGrid grid = make_grid(Aperture{0.5, 0.5}, 6);
    const UserGeometry a{Vec3(1.5, 0.4, 18.0), Vec3::UnitY()}, b{Vec3(-1.5, 0.4, 18.0), Vec3::UnitY()};
    const ChannelSample ha = sample_channel(a, grid, radio), hb = sample_channel(b, grid, radio);
    const int m = grid.order;
    for (int ix = 0; ix < m; ++ix)
      for (int iy = 0; iy < m; ++iy) {
        const auto n = static_cast<std::size_t>(ix * m + iy), mirrored = static_cast<std::size_t>((m - 1 - ix) * m + iy);
        CHECK(std::abs(ha.values[n] - hb.values[mirrored]) < 1e-12 * std::abs(ha.values[n]));
      }
  }

  TEST_CASE("channel set inner products and synthesis") {
    const Radio radio;
    const ApertureGrid grid = make_grid(Aperture{0.5, 0.5}, 8);
    RowMajorCMatrix s(2, static_cast<Eigen::Index>(grid.size()));
    const UserGeometry users[2] = {{Vec3(0.5, 0.2, 20.0), Vec3::UnitY()}, {Vec3(-2.0, 1.0, 25.0), Vec3::UnitY()}};
    for (int u = 0; u < 2; ++u)
      for (std::size_t n = 0; n < grid.size(); ++n) s(u, static_cast<Eigen::Index>(n)) = channel_scalar(users[u], grid.nodes[n], radio);
    const ChannelSet set(grid.weights, s);
    const CMatrix h = set.gram();
    CHECK((h - h.adjoint()).norm() < 1e-12 * h.norm());
    cplx direct = 0.0;
    for (std::size_t n = 0; n < grid.size(); ++n)
      direct += grid.weights[n] * s(0, static_cast<Eigen::Index>(n)) * std::conj(s(1, static_cast<Eigen::Index>(n)));
    CHECK(std::abs(h(0, 1) - direct) < 1e-12 * std::abs(direct));
    CVector c(2);
    c << cplx(0.5, 0.1), cplx(-1.0, 2.0);
    const auto j = set.synthesize(c);
    for (std::size_t n = 0; n < grid.size(); ++n) {
      const cplx e = c(0) * std::conj(s(0, static_cast<Eigen::Index>(n))) + c(1) * std::conj(s(1, static_cast<Eigen::Index>(n)));
      CHECK(std::abs(j[n] - e) < 1e-12 * std::abs(e));
    }
  }

  TEST_CASE("validation") {
    CHECK_THROWS_AS(Aperture::square(0.0), ValidationError);
    CHECK_THROWS_AS((Aperture{-1.0, 1.0}.validate()), ValidationError);
    CHECK_THROWS_AS((Radio{0.0, 1.0}.validate()), ValidationError);
    CHECK_THROWS_AS((UserGeometry{Vec3(0, 0, 1), Vec3(1, 1, 0)}.validate()), ValidationError);
    CHECK_THROWS_AS((UserGeometry{Vec3(0, 0, -1), Vec3::UnitY()}.validate()), ValidationError);
    CHECK(Aperture::square(0.25).len_x == doctest::Approx(0.5));
  }
}
