#pragma once

#include <cmath>
#include <complex>
#include <functional>
#include <random>

#include "capa/beamform.hpp"
#include "capa/scenario.hpp"
#include "capa/system.hpp"

namespace testing {

using capa::cplx;

/// Maximizer of a unimodal function on [lo, hi].
inline double golden_max(const std::function<double(double)>& f, double lo, double hi, int iters = 200) {
  const double phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = lo, b = hi;
  double c = b - phi * (b - a), d = a + phi * (b - a);
  double fc = f(c), fd = f(d);
  for (int i = 0; i < iters && b - a > 1e-15 * (std::abs(a) + std::abs(b)); ++i) {
    if (fc > fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - phi * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + phi * (b - a);
      fd = f(d);
    }
  }
  return 0.5 * (a + b);
}

inline capa::ScenarioConfig config(int groups, int users, std::uint64_t seed, double area = 0.25) {
  capa::ScenarioConfig c;
  c.num_groups = groups;
  c.users_per_group = users;
  c.seed = seed;
  c.aperture = capa::Aperture::square(area);
  return c;
}

inline capa::MulticastSystem capa_system(int groups, int users, std::uint64_t seed, double area = 0.25) {
  return capa::make_capa_system(capa::generate(config(groups, users, seed, area)));
}

/// Random coefficients scaled to a total power of `power`.
inline capa::CMatrix random_coeffs(const capa::MulticastSystem& sys, std::mt19937_64& rng, double power) {
  std::normal_distribution<double> n;
  capa::CMatrix a(sys.num_users(), sys.num_groups());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j) a(i, j) = cplx(n(rng), n(rng));
  return a * std::sqrt(power / capa::total_power(sys, a));
}

inline capa::BeamCoefficients beams_from(const capa::MulticastSystem& sys, const capa::CMatrix& a) {
  capa::BeamCoefficients b = capa::BeamCoefficients::zeros(sys);
  b.coeffs = a;
  return b;
}

inline double rel_err(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

}  // namespace testing
