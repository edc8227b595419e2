#include "capa/cov.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <mutex>
#include <numbers>
#include <optional>
#include <sstream>
#include <stdexcept>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include "capa/errors.hpp"
#include "capa/zf.hpp"
#include "kernel_quad.hpp"

namespace capa {

namespace {

constexpr double kWideThreshold = 1e-10;

std::mutex audit_mutex;
KernelAudit audit_state;

void record_audit(double residual, double condition) {
  const std::lock_guard lock(audit_mutex);
  ++audit_state.calls;
  audit_state.max_residual = std::max(audit_state.max_residual, residual);
  audit_state.max_condition = std::max(audit_state.max_condition, condition);
}

// Condition number of the unit-diagonal correlation matrix of the weighted
// channels that actually enter the kernel (p_i > 0, mu_i != 0).
double correlation_condition(const CMatrix& q, const Eigen::VectorXd& p) {
  std::vector<Eigen::Index> live;
  for (Eigen::Index i = 0; i < q.rows(); ++i)
    if (p(i) > 0.0 && std::real(q(i, i)) > 0.0) live.push_back(i);
  const auto n = static_cast<Eigen::Index>(live.size());
  if (n < 2) return 1.0;
  CMatrix corr(n, n);
  for (Eigen::Index a = 0; a < n; ++a)
    for (Eigen::Index b = 0; b < n; ++b)
      corr(a, b) = q(live[a], live[b]) / std::sqrt(std::real(q(live[a], live[a])) * std::real(q(live[b], live[b])));
  const Eigen::SelfAdjointEigenSolver<CMatrix> eig(corr, Eigen::EigenvaluesOnly);
  const double lo = eig.eigenvalues().minCoeff();
  return lo > 0.0 ? eig.eigenvalues().maxCoeff() / lo : std::numeric_limits<double>::infinity();
}

// C = (I + P Q)^{-1} from N = (I + S Q S)^{-1}.  Rows with p = 0 are unit
// rows of I + P Q, so C = [[S N S^{-1}, -S N S Q_{+0}], [0, I]] after ordering
// the p > 0 indices first.
CMatrix inverse_kernel(const CMatrix& n_inv, const Eigen::VectorXd& s, const CMatrix& q) {
  const Eigen::Index n = s.size();
  CMatrix c = CMatrix::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    if (s(i) == 0.0) {
      c(i, i) = 1.0;
      continue;
    }
    for (Eigen::Index j = 0; j < n; ++j) {
      if (s(j) > 0.0) {
        c(i, j) = s(i) * n_inv(i, j) / s(j);
      } else {
        cplx acc = 0.0;
        for (Eigen::Index l = 0; l < n; ++l)
          if (s(l) > 0.0) acc += n_inv(i, l) * s(l) * q(l, j);
        c(i, j) = -s(i) * acc;
      }
    }
  }
  return c;
}

double group_sum(const Eigen::VectorXd& v, const MulticastSystem& sys, int g) {
  return v.segment(sys.first_user(g), sys.users_per_group()).sum();
}

}  // namespace

KernelAudit kernel_identity_audit() {
  const std::lock_guard lock(audit_mutex);
  return audit_state;
}

void reset_kernel_identity_audit() {
  const std::lock_guard lock(audit_mutex);
  audit_state = {};
}

CVector mu_update(const MulticastSystem& sys, const BeamCoefficients& beams) {
  const CMatrix proj = projections(sys, beams.coeffs);
  CVector mu(sys.num_users());
  for (int u = 0; u < sys.num_users(); ++u)
    mu(u) = proj(u, sys.group_of(u)) / (interference(sys, proj, u) + sys.noise(u));
  return mu;
}

std::vector<double> r_update(const MulticastSystem& sys, const BeamCoefficients& beams) {
  const auto s = all_sinr(sys, beams.coeffs);
  std::vector<double> r;
  for (int g = 0; g < sys.num_groups(); ++g) {
    const auto first = s.begin() + sys.first_user(g);
    r.push_back(*std::min_element(first, first + sys.users_per_group()));
  }
  return r;
}

std::vector<double> r_dual_opt(const Eigen::VectorXd& lambda, const MulticastSystem& sys) {
  std::vector<double> r;
  for (int g = 0; g < sys.num_groups(); ++g) {
    const double total = std::max(group_sum(lambda, sys, g), 1e-12);
    r.push_back(std::max(sys.sinr_floor(g), 1.0 / (std::numbers::ln2 * total) - 1.0));
  }
  return r;
}

std::vector<double> surrogate(const MulticastSystem& sys, const CVector& mu, const CMatrix& coeffs) {
  const CMatrix proj = projections(sys, coeffs);
  std::vector<double> y;
  for (int u = 0; u < sys.num_users(); ++u)
    y.push_back(lemma_y(mu(u), proj(u, sys.group_of(u)), interference(sys, proj, u) + sys.noise(u)));
  return y;
}

BeamCoefficients beam_dual_opt(const MulticastSystem& sys, const CVector& mu, const Eigen::VectorXd& lambda, double xi,
                               double eta) {
  if (!(xi + eta > 0.0)) throw std::invalid_argument("beam_dual_opt needs xi + eta > 0");
  const int k = sys.num_users(), kg = sys.users_per_group();
  const CMatrix& h = sys.gram();
  const Eigen::VectorXd p = lambda / (xi + eta);

  BeamCoefficients beams = BeamCoefficients::zeros(sys);
  for (int g = 0; g < sys.num_groups(); ++g) {
    const int first = sys.first_user(g);
    for (int l = first; l < first + kg; ++l) beams.coeffs(l, g) = p(l) * mu(l);

    std::vector<int> out;
    for (int u = 0; u < k; ++u)
      if (sys.group_of(u) != g) out.push_back(u);
    const auto n = static_cast<Eigen::Index>(out.size());
    if (n == 0) continue;

    CMatrix q(n, n);
    CVector b = CVector::Zero(n);
    Eigen::VectorXd po(n);
    for (Eigen::Index a = 0; a < n; ++a) {
      const int i = out[static_cast<std::size_t>(a)];
      po(a) = p(i);
      for (Eigen::Index c = 0; c < n; ++c) {
        const int j = out[static_cast<std::size_t>(c)];
        q(a, c) = std::conj(mu(i)) * mu(j) * h(i, j);
      }
      for (int l = first; l < first + kg; ++l) b(a) += p(l) * std::conj(mu(i)) * mu(l) * h(i, l);
    }

    const double condition = correlation_condition(q, po);
    if (!(condition < kConditionLimit)) {
      std::ostringstream msg;
      msg << "out-of-group channels of group " << g << " are nearly collinear (condition number " << condition << ")";
      throw NumericalConditioning(msg.str());
    }
    // With S = P^{1/2}: I + P Q = S (I + S Q S) S^{-1} on the p > 0 block, and
    // the middle factor is Hermitian with spectrum >= 1.
    const Eigen::VectorXd s = po.cwiseSqrt();
    CMatrix m = s.asDiagonal() * q * s.asDiagonal();
    m = 0.5 * (m + m.adjoint().eval());
    m.diagonal().array() += 1.0;
    const CMatrix inner = m.llt().solve(CMatrix::Identity(n, n));
    CVector x = -(s.asDiagonal() * (inner * (s.asDiagonal() * b)));

    CMatrix kernel = po.asDiagonal() * q;
    kernel.diagonal().array() += 1.0;
    double residual = (inverse_kernel(inner, s, q) * kernel - CMatrix::Identity(n, n)).cwiseAbs().maxCoeff();
    if (!(residual <= kWideThreshold)) {
      const detail::KernelSolution wide = detail::solve_kernel_wide(q, po, b, kWideThreshold);
      x = wide.x;
      residual = wide.residual;
    }
    record_audit(residual, condition);

    for (Eigen::Index a = 0; a < n; ++a) {
      const int j = out[static_cast<std::size_t>(a)];
      beams.coeffs(j, g) = mu(j) * x(a);
    }
  }
  return beams;
}

double beam_lagrangian(const MulticastSystem& sys, const CVector& mu, const Eigen::VectorXd& lambda, double xi,
                       double eta, const CMatrix& coeffs) {
  const CMatrix proj = projections(sys, coeffs);
  double v = 0.0;
  for (int u = 0; u < sys.num_users(); ++u)
    v += lambda(u) * lemma_y(mu(u), proj(u, sys.group_of(u)), interference(sys, proj, u));
  return v - (xi + eta) * total_power(sys, coeffs);
}

Subgradient subgradient(const MulticastSystem& sys, const BeamCoefficients& beams, const std::vector<double>& r,
                        const CVector& mu) {
  const auto y = surrogate(sys, mu, beams.coeffs);
  Subgradient sg;
  sg.d_lambda.resize(sys.num_users());
  for (int u = 0; u < sys.num_users(); ++u)
    sg.d_lambda(u) = y[static_cast<std::size_t>(u)] - r[static_cast<std::size_t>(sys.group_of(u))];
  sg.d_xi = sys.power_budget() - total_power(sys, beams);
  return sg;
}

namespace {

struct DualPoint {
  double value = 0.0;
  BeamCoefficients beams;
  std::vector<double> r;
  Subgradient sg;
};

DualPoint evaluate_dual(const MulticastSystem& sys, const CVector& mu, const Eigen::VectorXd& lambda, double xi,
                        double eta) {
  DualPoint d;
  d.r = r_dual_opt(lambda, sys);
  d.beams = beam_dual_opt(sys, mu, lambda, xi, eta);
  // At the maximizer of the concave quadratic its value is half the linear
  // part, which avoids cancelling large signal and power terms.
  const CMatrix proj = projections(sys, d.beams.coeffs);
  double linear = 0.0;
  for (int u = 0; u < sys.num_users(); ++u) linear += lambda(u) * std::real(std::conj(mu(u)) * proj(u, sys.group_of(u)));
  d.value = xi * sys.power_budget() + std::max(linear, 0.0);
  for (int g = 0; g < sys.num_groups(); ++g) {
    const double rg = d.r[static_cast<std::size_t>(g)];
    d.value += std::log2(1.0 + rg) - rg * group_sum(lambda, sys, g);
  }
  for (int u = 0; u < sys.num_users(); ++u) d.value -= lambda(u) * std::norm(mu(u)) * sys.noise(u);
  d.sg = subgradient(sys, d.beams, d.r, mu);
  return d;
}

}  // namespace

double dual_value(const MulticastSystem& sys, const CVector& mu, const Eigen::VectorXd& lambda, double xi, double eta) {
  return evaluate_dual(sys, mu, lambda, xi, eta).value;
}

JrResult solve_Jr_subproblem(const MulticastSystem& sys, const CVector& mu, double eta, const EllipsoidOptions& opts) {
  const int k = sys.num_users();
  const int n = k + 1;
  const double nn = n;

  double lower = -eta * sys.power_budget();
  for (int g = 0; g < sys.num_groups(); ++g) lower += std::log2(1.0 + sys.sinr_floor(g));
  const double certificate = lower - 1e-9 * std::max(1.0, std::abs(lower));

  Eigen::VectorXd x(n);
  x.head(k).setConstant(1.0 / k);
  x(k) = 1.0;
  Eigen::MatrixXd e = Eigen::MatrixXd::Identity(n, n) * (opts.initial_radius * opts.initial_radius);

  JrResult res;
  res.dual_value = std::numeric_limits<double>::infinity();
  res.gap = std::numeric_limits<double>::infinity();
  Eigen::VectorXd a(n);
  for (int it = 0; it < opts.max_iter; ++it) {
    res.iterations = it + 1;
    Eigen::Index worst = 0;
    const double min_lambda = x.head(k).minCoeff(&worst);
    bool objective_cut = false;
    if (min_lambda < 0.0) {
      a.setZero();
      a(worst) = -1.0;
    } else if (x(k) < 0.0 || !(x(k) + eta > 0.0)) {
      a.setZero();
      a(k) = -1.0;
    } else {
      DualPoint d = evaluate_dual(sys, mu, x.head(k), x(k), eta);
      if (d.value < certificate) {
        std::ostringstream msg;
        msg << "rate floors cannot be met within the power budget (dual bound " << d.value << " below " << lower << ")";
        throw InfeasibleProblem(msg.str());
      }
      a.head(k) = d.sg.d_lambda;
      a(k) = d.sg.d_xi;
      objective_cut = true;
      if (d.value < res.dual_value) {
        res.dual_value = d.value;
        res.beams = std::move(d.beams);
        res.r = std::move(d.r);
        res.dual.lambda = x.head(k);
        res.dual.xi = x(k);
      }
    }
    const double spread = a.dot(e * a);
    if (!(spread > 0.0)) {
      res.converged = objective_cut;
      res.gap = 0.0;
      break;
    }
    const double width = std::sqrt(spread);
    if (objective_cut) {
      res.gap = width;
      if (width < opts.gap) {
        res.converged = true;
        break;
      }
    }
    const Eigen::VectorXd step = e * a / width;
    x -= step / (nn + 1.0);
    e = (nn * nn / (nn * nn - 1.0)) * (e - (2.0 / (nn + 1.0)) * step * step.transpose());
    e = 0.5 * (e + e.transpose().eval());
  }
  res.dual.center = x;
  res.dual.shape = e;
  if (!std::isfinite(res.dual_value)) throw NumericalConditioning("ellipsoid search never reached a dual-feasible point");
  return res;
}

double cov_objective(const MulticastSystem& sys, const BeamCoefficients& beams, double eta) {
  double f = -eta * total_power(sys, beams);
  for (double r : r_update(sys, beams)) f += std::log2(1.0 + r);
  return f;
}

namespace {

bool floors_met(const MulticastSystem& sys, const CMatrix& coeffs) {
  const auto s = all_sinr(sys, coeffs);
  for (int u = 0; u < sys.num_users(); ++u)
    if (s[static_cast<std::size_t>(u)] < sys.sinr_floor(sys.group_of(u))) return false;
  return true;
}

// Pulls a recovered primal point into the feasible set: shrink onto the power
// budget, then grow uniformly until every floor holds.
bool restore_feasibility(const MulticastSystem& sys, CMatrix& coeffs) {
  double p = total_power(sys, coeffs);
  if (!(p > 0.0)) return floors_met(sys, coeffs);
  if (p > sys.power_budget()) {
    coeffs *= std::sqrt(sys.power_budget() / p);
    p = sys.power_budget();
  }
  if (floors_met(sys, coeffs)) return true;
  double lo = 1.0, hi = std::sqrt(sys.power_budget() / p);
  if (!floors_met(sys, hi * coeffs)) return false;
  for (int i = 0; i < 100 && hi - lo > 1e-15 * hi; ++i) {
    const double mid = 0.5 * (lo + hi);
    (floors_met(sys, mid * coeffs) ? hi : lo) = mid;
  }
  coeffs *= hi;
  return true;
}

}  // namespace

CovResult solve_dinkelbach_subproblem(double eta, const MulticastSystem& sys, const BeamCoefficients& warm_start,
                                      const CovOptions& opts) {
  if (!energy_efficiency(sys, warm_start).feasible())
    throw InfeasibleProblem("warm-start beams violate a rate floor or the power budget");
  CovResult res;
  res.beams.coeffs = warm_start.coeffs;
  res.objective = cov_objective(sys, res.beams, eta);
  res.trace.push_back({res.objective, r_update(sys, res.beams), total_power(sys, res.beams), 0});

  for (int it = 0; it < opts.max_bcd_iter; ++it) {
    const CVector mu = mu_update(sys, res.beams);
    JrResult jr = solve_Jr_subproblem(sys, mu, eta, opts.ellipsoid);
    CMatrix cand = jr.beams.coeffs;
    if (!restore_feasibility(sys, cand)) {
      res.converged = true;
      break;
    }
    BeamCoefficients next;
    next.coeffs = std::move(cand);
    const double f = cov_objective(sys, next, eta);
    if (!(f >= res.objective)) {
      res.converged = true;
      break;
    }
    const double delta = f - res.objective;
    res.beams = std::move(next);
    res.objective = f;
    res.trace.push_back({f, r_update(sys, res.beams), total_power(sys, res.beams), jr.iterations});
    if (delta <= opts.tol) {
      res.converged = true;
      break;
    }
  }
  res.aux.mu = mu_update(sys, res.beams);
  res.aux.r = r_update(sys, res.beams);
  return res;
}

namespace {

// Yates fixed point for unit-power patterns; empty when the budget cannot cover the floors.
std::optional<Eigen::VectorXd> pattern_min_power(const MulticastSystem& sys, const CMatrix& cross) {
  const int g = sys.num_groups();
  Eigen::VectorXd rho = Eigen::VectorXd::Zero(g);
  for (int iter = 0; iter < 20000; ++iter) {
    Eigen::VectorXd next = Eigen::VectorXd::Zero(g);
    for (int u = 0; u < sys.num_users(); ++u) {
      const int own = sys.group_of(u);
      const double target = sys.sinr_floor(own) * (1.0 + 1e-6);
      if (target == 0.0) continue;
      const double gain = std::norm(cross(u, own));
      if (!(gain > 0.0)) return std::nullopt;
      double leak = sys.noise(u);
      for (int i = 0; i < g; ++i)
        if (i != own) leak += rho(i) * std::norm(cross(u, i));
      next(own) = std::max(next(own), target * leak / gain);
    }
    if (!(next.sum() <= sys.power_budget())) return std::nullopt;
    const double change = (next - rho).cwiseAbs().maxCoeff();
    rho = next;
    if (change <= 1e-14 * std::max(rho.maxCoeff(), std::numeric_limits<double>::min())) return rho;
  }
  return std::nullopt;
}

}  // namespace

BeamCoefficients cov_warm_start(const MulticastSystem& sys) {
  try {
    const ZfBasis basis = build_zf_basis(select_representatives(sys), sys);
    return assemble_zf_beams(zf_initial_power(basis, sys), basis);
  } catch (const InfeasibleProblem&) {
  } catch (const NumericalConditioning&) {
  }

  // Regularized inversions of the full Gram matrix, from near-ZF to matched filtering.
  const CMatrix& h = sys.gram();
  const int k = sys.num_users(), g = sys.num_groups();
  CMatrix targets = CMatrix::Zero(k, g);
  for (int u = 0; u < k; ++u) targets(u, sys.group_of(u)) = 1.0;
  const double scale = std::real(h.trace()) / k;
  std::optional<Eigen::VectorXd> best;
  CMatrix best_pattern;
  for (int e = -10; e <= 3; ++e) {
    const double alpha = scale * std::pow(10.0, e);
    CMatrix reg = h;
    reg.diagonal().array() += alpha;
    CMatrix pattern = reg.ldlt().solve(targets);
    for (int gg = 0; gg < g; ++gg) {
      const double pw = std::real((pattern.col(gg).adjoint() * h * pattern.col(gg))(0, 0));
      if (!(pw > 0.0) || !std::isfinite(pw)) {
        pattern.resize(0, 0);
        break;
      }
      pattern.col(gg) /= std::sqrt(pw);
    }
    if (pattern.size() == 0) continue;
    auto rho = pattern_min_power(sys, h * pattern);
    if (rho && (!best || rho->sum() < best->sum())) {
      best = std::move(rho);
      best_pattern = std::move(pattern);
    }
  }
  if (!best) throw InfeasibleProblem("no zero-forcing or regularized warm start meets the rate floors within the power budget");
  BeamCoefficients out = BeamCoefficients::zeros(sys);
  for (int gg = 0; gg < g; ++gg) out.coeffs.col(gg) = best_pattern.col(gg) * std::sqrt((*best)(gg));
  return out;
}

}  // namespace capa
