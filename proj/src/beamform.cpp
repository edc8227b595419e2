#include "capa/beamform.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "capa/simd/kernels.hpp"

namespace capa {

BeamCoefficients BeamCoefficients::zeros(const MulticastSystem& sys) {
  BeamCoefficients b;
  b.coeffs = CMatrix::Zero(sys.num_users(), sys.num_groups());
  return b;
}

void BeamCoefficients::refresh(const MulticastSystem& sys) {
  grid_values.clear();
  grid_values.reserve(static_cast<std::size_t>(coeffs.cols()));
  for (Eigen::Index g = 0; g < coeffs.cols(); ++g) grid_values.push_back(sys.channels().synthesize(coeffs.col(g)));
}

CMatrix projections(const MulticastSystem& sys, const CMatrix& coeffs) {
  if (coeffs.rows() != sys.num_users()) throw std::invalid_argument("beam coefficients do not match the user count");
  return sys.gram() * coeffs;
}

double interference(const MulticastSystem& sys, const CMatrix& proj, int user) {
  const int own = sys.group_of(user);
  double acc = 0.0;
  for (int g = 0; g < proj.cols(); ++g)
    if (g != own) acc += std::norm(proj(user, g));
  return acc;
}

std::vector<double> all_sinr(const MulticastSystem& sys, const CMatrix& coeffs) {
  const CMatrix proj = projections(sys, coeffs);
  std::vector<double> out(static_cast<std::size_t>(sys.num_users()));
  for (int i = 0; i < sys.num_users(); ++i)
    out[static_cast<std::size_t>(i)] =
        std::norm(proj(i, sys.group_of(i))) / (interference(sys, proj, i) + sys.noise(i));
  return out;
}

double sinr(const MulticastSystem& sys, const BeamCoefficients& beams, int group, int index) {
  const int i = sys.first_user(group) + index;
  const CMatrix row = sys.gram().row(i) * beams.coeffs;
  double interf = 0.0;
  for (int g = 0; g < row.cols(); ++g)
    if (g != group) interf += std::norm(row(0, g));
  return std::norm(row(0, group)) / (interf + sys.noise(i));
}

double group_rate(const MulticastSystem& sys, const BeamCoefficients& beams, int group) {
  double worst = sinr(sys, beams, group, 0);
  for (int k = 1; k < sys.users_per_group(); ++k) worst = std::min(worst, sinr(sys, beams, group, k));
  return std::log2(1.0 + worst);
}

double total_power(const MulticastSystem& sys, const CMatrix& coeffs) {
  double p = 0.0;
  for (Eigen::Index g = 0; g < coeffs.cols(); ++g)
    p += std::real(coeffs.col(g).dot(sys.gram() * coeffs.col(g)));
  return std::max(p, 0.0);
}

double total_power(const MulticastSystem& sys, const BeamCoefficients& beams) { return total_power(sys, beams.coeffs); }

double total_power_grid(const MulticastSystem& sys, const BeamCoefficients& beams) {
  if (!beams.has_grid()) throw std::logic_error("total_power_grid: beam node values were never evaluated");
  double p = 0.0;
  for (const auto& j : beams.grid_values) p += simd::weighted_norm2(j, sys.channels().weights());
  return p;
}

bool PerfReport::feasible() const {
  return power_ok && std::all_of(rate_ok.begin(), rate_ok.end(), [](bool b) { return b; });
}

PerfReport energy_efficiency(const MulticastSystem& sys, const CMatrix& coeffs) {
  PerfReport rep;
  rep.sinr = all_sinr(sys, coeffs);
  const int kg = sys.users_per_group();
  for (int g = 0; g < sys.num_groups(); ++g) {
    const auto first = rep.sinr.begin() + sys.first_user(g);
    const double worst = *std::min_element(first, first + kg);
    const double rate = std::log2(1.0 + worst);
    rep.group_rates.push_back(rate);
    rep.sum_rate += rate;
    const double floor = sys.rate_floor(g);
    rep.rate_ok.push_back(rate >= floor * (1.0 - kFeasibilityTol));
  }
  rep.power = total_power(sys, coeffs);
  rep.power_ok = rep.power <= sys.power_budget() * (1.0 + kFeasibilityTol);
  rep.ee = rep.power > 0.0 ? rep.sum_rate / rep.power : 0.0;
  return rep;
}

PerfReport energy_efficiency(const MulticastSystem& sys, const BeamCoefficients& beams) {
  return energy_efficiency(sys, beams.coeffs);
}

}  // namespace capa
