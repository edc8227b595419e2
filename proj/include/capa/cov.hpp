#pragma once

// Optimal-structure path: block coordinate ascent over {J, r} and {r, mu},
// with the {J, r} block solved through its Lagrange dual by the ellipsoid
// method and the closed-form stationary current pattern.

#include <vector>

#include <Eigen/Core>

#include "capa/beamform.hpp"

namespace capa {

struct AuxState {
  std::vector<double> r;  // per group
  CVector mu;             // per user
};

struct DualState {
  Eigen::VectorXd lambda;  // per user
  double xi = 0.0;
  Eigen::VectorXd center;  // (lambda, xi) of the current ellipsoid
  Eigen::MatrixXd shape;
};

/// mu_u = (integral h_u J_g) / (interference + noise).
CVector mu_update(const MulticastSystem& sys, const BeamCoefficients& beams);

/// r_g = min_k SINR_{g,k}.
std::vector<double> r_update(const MulticastSystem& sys, const BeamCoefficients& beams);

/// argmax over r_g >= 2^floor - 1 of log2(1 + r_g) - r_g sum_k lambda_{g,k}.
std::vector<double> r_dual_opt(const Eigen::VectorXd& lambda, const MulticastSystem& sys);

/// y(mu_u, J) for every user.
std::vector<double> surrogate(const MulticastSystem& sys, const CVector& mu, const CMatrix& coeffs);

/// Maximizer over J of the fixed-dual Lagrangian term
///   sum_u lambda_u (2 Re{conj(mu_u) s_u} - |mu_u|^2 I_u) - (xi + eta) P(J).
BeamCoefficients beam_dual_opt(const MulticastSystem& sys, const CVector& mu, const Eigen::VectorXd& lambda, double xi,
                               double eta);

/// The term maximized by beam_dual_opt, evaluated at arbitrary coefficients.
double beam_lagrangian(const MulticastSystem& sys, const CVector& mu, const Eigen::VectorXd& lambda, double xi,
                       double eta, const CMatrix& coeffs);

/// Largest |C (I + P Q) - I| entry seen by beam_dual_opt since the last reset,
/// where C is the inverse kernel matrix and Q(i,j) = <g_i, g_j>.
struct KernelAudit {
  long calls = 0;
  double max_residual = 0.0;
  double max_condition = 1.0;
};
KernelAudit kernel_identity_audit();
void reset_kernel_identity_audit();

struct Subgradient {
  Eigen::VectorXd d_lambda;
  double d_xi = 0.0;
};

Subgradient subgradient(const MulticastSystem& sys, const BeamCoefficients& beams, const std::vector<double>& r,
                        const CVector& mu);

/// Dual function g(lambda, xi) of the {J, r} block at fixed mu and eta.
double dual_value(const MulticastSystem& sys, const CVector& mu, const Eigen::VectorXd& lambda, double xi, double eta);

struct EllipsoidOptions {
  double gap = 1e-7;
  int max_iter = 50000;
  double initial_radius = 1e3;
};

struct JrResult {
  BeamCoefficients beams;
  std::vector<double> r;
  DualState dual;
  double dual_value = 0.0;
  double gap = 0.0;
  int iterations = 0;
  bool converged = false;
};

/// Throws InfeasibleProblem when the dual certifies that no (J, r) meets the
/// floors within the budget for this mu.
JrResult solve_Jr_subproblem(const MulticastSystem& sys, const CVector& mu, double eta,
                             const EllipsoidOptions& opts = {});

struct CovIteration {
  double objective = 0.0;
  std::vector<double> r;
  double power = 0.0;
  int ellipsoid_iterations = 0;
};

struct CovOptions {
  double tol = 1e-4;
  int max_bcd_iter = 100;
  EllipsoidOptions ellipsoid{};
};

struct CovResult {
  BeamCoefficients beams;
  AuxState aux;
  double objective = 0.0;
  std::vector<CovIteration> trace;
  bool converged = false;
};

/// sum_g log2(1 + min_k SINR) - eta P(J).
double cov_objective(const MulticastSystem& sys, const BeamCoefficients& beams, double eta);

CovResult solve_dinkelbach_subproblem(double eta, const MulticastSystem& sys, const BeamCoefficients& warm_start,
                                      const CovOptions& opts = {});

/// ZF patterns with power P_t/G each (minimum-power ZF split if that misses a
/// floor).  When ZF cannot meet the floors at all, the cheapest regularized
/// inversion of the Gram matrix at its minimum-power split.
BeamCoefficients cov_warm_start(const MulticastSystem& sys);

}  // namespace capa
