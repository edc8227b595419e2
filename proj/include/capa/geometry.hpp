#pragma once

// Aperture geometry and the free-space line-of-sight field model.

#include <complex>
#include <numbers>

#include <Eigen/Core>

namespace capa {

using cplx = std::complex<double>;
using Vec3 = Eigen::Vector3d;
using Mat3c = Eigen::Matrix3cd;

/// Rectangular aperture in the z = 0 plane, centered at the origin.
struct Aperture {
  double len_x = 0.5;  // m
  double len_y = 0.5;  // m

  double area() const { return len_x * len_y; }
  bool contains(const Vec3& s, double slack = 1e-12) const;
  void validate() const;

  /// Square aperture with the given area.
  static Aperture square(double area_m2);
};

struct Radio {
  double wavelength = 0.125;                          // m (2.4 GHz)
  double impedance = 120.0 * std::numbers::pi;        // ohm

  double wavenumber() const { return 2.0 * std::numbers::pi / wavelength; }
  void validate() const;
};

/// Point receiver with a single linear polarization.
struct UserGeometry {
  Vec3 position = Vec3::Zero();
  Vec3 polarization = Vec3::UnitY();

  void validate() const;
};

/// Source current direction; only J_y is excited.
inline Vec3 source_polarization() { return Vec3::UnitY(); }

/// Minimum separation accepted by the Green's function.
inline constexpr double kMinDistance = 1e-9;

/// Dyadic Green's function G(r, s) of the radiating near/far field in free
/// space (transverse part only).
Mat3c green_dyadic(const Vec3& r, const Vec3& s, const Radio& radio);

/// Scalar channel h(s) = u^T G(r, s) u_y seen by one user.
cplx channel_scalar(const UserGeometry& user, const Vec3& s, const Radio& radio);

}  // namespace capa
