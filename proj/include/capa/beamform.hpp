#pragma once

// Current patterns in the channel span and the performance functionals
// (SINR, multicast rate, radiated power, energy efficiency).

#include <vector>

#include "capa/system.hpp"

namespace capa {

/// J_g(s) = sum_j coeffs(j, g) conj(h_j(s)) for every group g.
struct BeamCoefficients {
  CMatrix coeffs;                             // K x G
  std::vector<std::vector<cplx>> grid_values;  // cached J_g on the node set

  static BeamCoefficients zeros(const MulticastSystem& sys);
  int num_groups() const { return static_cast<int>(coeffs.cols()); }

  /// Re-evaluates the cached node values from the coefficients.
  void refresh(const MulticastSystem& sys);
  bool has_grid() const { return !grid_values.empty(); }
};

/// (k, g) entry: integral of h_k J_g, i.e. (H A)(k, g).
CMatrix projections(const MulticastSystem& sys, const CMatrix& coeffs);

/// Inter-group interference seen by user k, from its projection row.
double interference(const MulticastSystem& sys, const CMatrix& proj, int user);

double sinr(const MulticastSystem& sys, const BeamCoefficients& beams, int group, int index);
std::vector<double> all_sinr(const MulticastSystem& sys, const CMatrix& coeffs);
double group_rate(const MulticastSystem& sys, const BeamCoefficients& beams, int group);

/// Sum_g a_g^H H a_g.
double total_power(const MulticastSystem& sys, const BeamCoefficients& beams);
double total_power(const MulticastSystem& sys, const CMatrix& coeffs);
/// Same quantity by quadrature of the cached node values.
double total_power_grid(const MulticastSystem& sys, const BeamCoefficients& beams);

struct PerfReport {
  std::vector<double> sinr;         // per user
  std::vector<double> group_rates;  // bit/s/Hz
  double sum_rate = 0.0;
  double power = 0.0;
  double ee = 0.0;
  std::vector<bool> rate_ok;
  bool power_ok = true;

  bool feasible() const;
};

inline constexpr double kFeasibilityTol = 1e-6;

PerfReport energy_efficiency(const MulticastSystem& sys, const BeamCoefficients& beams);
PerfReport energy_efficiency(const MulticastSystem& sys, const CMatrix& coeffs);

/// Quadratic-transform surrogate 2 Re{conj(mu) s} - |mu|^2 (interf + noise).
inline double lemma_y(cplx mu, cplx signal, double interf_plus_noise) {
  return 2.0 * std::real(std::conj(mu) * signal) - std::norm(mu) * interf_plus_noise;
}

}  // namespace capa
