#pragma once

// Zero-forcing path: one representative channel per group, closed-form
// nulling patterns, and power allocation over the per-group ZF beams.

#include <vector>

#include <Eigen/Core>

#include "capa/beamform.hpp"

namespace capa {

enum class CorrelationMeasure {
  magnitude,  // |<h_i,h_j>| / (|h_i| |h_j|)
  real_part,  // Re<h_i,h_j> / (|h_i| |h_j|)
};

struct RepresentativeSet {
  std::vector<int> users;    // global index, one per group
  Eigen::MatrixXd corr;      // l(i, j)
  std::vector<double> intra;  // O_i
  std::vector<double> inter;  // O~_i
};

RepresentativeSet select_representatives(const MulticastSystem& sys,
                                         CorrelationMeasure measure = CorrelationMeasure::magnitude);

/// Z_g = sum_j beta(j, g) conj(h_rep_j) with integral h_rep_i Z_g = delta_ig.
struct ZfBasis {
  std::vector<int> reps;
  CMatrix h_ot;                 // G x G Gram of the representatives
  CMatrix beta;                 // G x G, column g = H_ot^{-1} e_g
  std::vector<double> norm;     // P_g = integral |Z_g|^2
  CMatrix pattern;              // K x G channel-span coefficients of Z_g
  CMatrix cross;                // K x G, cross(u, i) = integral h_u Z_i
  double condition = 1.0;

  int num_groups() const { return static_cast<int>(norm.size()); }
};

inline constexpr double kConditionLimit = 1e12;

ZfBasis build_zf_basis(const RepresentativeSet& reps, const MulticastSystem& sys);

/// J_g = sqrt(rho_g / P_g) Z_g.
BeamCoefficients assemble_zf_beams(const Eigen::VectorXd& rho, const ZfBasis& basis);

/// SINR of every user under ZF beams with powers rho.
std::vector<double> zf_sinr(const Eigen::VectorXd& rho, const ZfBasis& basis, const MulticastSystem& sys);

Eigen::VectorXd zf_mu_update(const Eigen::VectorXd& rho, const ZfBasis& basis, const MulticastSystem& sys);
std::vector<double> zf_r_update(const Eigen::VectorXd& rho, const ZfBasis& basis, const MulticastSystem& sys);

/// Surrogate y(mu~_u, rho) of every user.
std::vector<double> zf_surrogate(const Eigen::VectorXd& mu, const Eigen::VectorXd& rho, const ZfBasis& basis,
                                 const MulticastSystem& sys);

struct PowerAllocation {
  Eigen::VectorXd rho;
  std::vector<double> r;  // min_k y per group at rho
  double objective = 0.0;
  int newton_steps = 0;
  bool improved = false;  // false when no strictly feasible start existed
};

struct PowerAllocationOptions {
  double gap = 1e-11;  // barrier duality gap, relative to max(1, |objective|)
  int max_newton = 400;
};

/// max sum log2(1 + r_g) - eta sum rho_g  s.t.  r_g <= y(mu~, rho), r_g >= floor,
/// sum rho <= P_t, rho >= 0.  `start` must be feasible for the fixed mu~.
PowerAllocation solve_power_allocation(const Eigen::VectorXd& mu, double eta, const ZfBasis& basis,
                                       const MulticastSystem& sys, const Eigen::VectorXd& start,
                                       const PowerAllocationOptions& opts = {});

/// Smallest powers meeting every floor under ZF beams (componentwise), by
/// the standard interference-function fixed point.  Throws InfeasibleProblem.
Eigen::VectorXd zf_min_power(const ZfBasis& basis, const MulticastSystem& sys, double margin = 1e-6);

/// Uniform P_t/G split, or the minimum-power point when that misses a floor.
Eigen::VectorXd zf_initial_power(const ZfBasis& basis, const MulticastSystem& sys);

struct ZfIteration {
  double objective = 0.0;
  std::vector<double> r;
  double power = 0.0;
  int newton_steps = 0;
};

struct ZfResult {
  Eigen::VectorXd rho;
  Eigen::VectorXd mu;
  std::vector<double> r;
  double objective = 0.0;
  std::vector<ZfIteration> trace;
  bool converged = false;
};

struct ZfOptions {
  double tol = 1e-4;
  int max_bcd_iter = 200;
  PowerAllocationOptions power{};
};

double zf_objective(const Eigen::VectorXd& rho, double eta, const ZfBasis& basis, const MulticastSystem& sys);

ZfResult solve_zf_dinkelbach_subproblem(double eta, const MulticastSystem& sys, const ZfBasis& basis,
                                        const Eigen::VectorXd& start, const ZfOptions& opts = {});

}  // namespace capa
