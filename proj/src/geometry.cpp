#include "capa/geometry.hpp"

#include <cmath>
#include <sstream>

#include "capa/errors.hpp"

namespace capa {

bool Aperture::contains(const Vec3& s, double slack) const {
  return std::abs(s.x()) <= 0.5 * len_x + slack && std::abs(s.y()) <= 0.5 * len_y + slack &&
         std::abs(s.z()) <= slack;
}

void Aperture::validate() const {
  if (!(len_x > 0.0) || !(len_y > 0.0)) throw ValidationError("aperture side lengths must be positive");
}

Aperture Aperture::square(double area_m2) {
  if (!(area_m2 > 0.0)) throw ValidationError("aperture area must be positive");
  const double side = std::sqrt(area_m2);
  return {side, side};
}

void Radio::validate() const {
  if (!(wavelength > 0.0)) throw ValidationError("wavelength must be positive");
  if (!(impedance > 0.0)) throw ValidationError("impedance must be positive");
}

void UserGeometry::validate() const {
  if (std::abs(polarization.norm() - 1.0) > 1e-12) throw ValidationError("user polarization must be a unit vector");
  if (!(position.z() > 0.0)) throw ValidationError("user must lie in front of the aperture (z > 0)");
}

Mat3c green_dyadic(const Vec3& r, const Vec3& s, const Radio& radio) {
  const Vec3 d = r - s;
  const double dist = d.norm();
  if (dist < kMinDistance) {
    std::ostringstream msg;
    msg << "green_dyadic: field and source points are " << dist << " m apart";
    throw DegenerateDistance(msg.str());
  }
  const cplx phase = std::polar(1.0, -radio.wavenumber() * dist);
  const cplx prefactor = cplx(0.0, -1.0) * radio.impedance * phase / (2.0 * radio.wavelength * dist);
  const Eigen::Matrix3d projector = Eigen::Matrix3d::Identity() - d * d.transpose() / (dist * dist);
  return prefactor * projector.cast<cplx>();
}

cplx channel_scalar(const UserGeometry& user, const Vec3& s, const Radio& radio) {
  const Vec3 d = user.position - s;
  const double dist = d.norm();
  if (dist < kMinDistance) throw DegenerateDistance("channel_scalar: user sits on the aperture node");
  // u^T (I - d d^T / |d|^2) u_y without forming the 3x3 matrix.
  const Vec3 uy = source_polarization();
  const double proj = user.polarization.dot(uy) - user.polarization.dot(d) * d.dot(uy) / (dist * dist);
  const cplx phase = std::polar(1.0, -radio.wavenumber() * dist);
  return cplx(0.0, -1.0) * radio.impedance * phase / (2.0 * radio.wavelength * dist) * proj;
}

}  // namespace capa
