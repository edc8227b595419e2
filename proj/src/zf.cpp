#include "capa/zf.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <Eigen/LU>

#include "capa/errors.hpp"

namespace capa {

namespace {

constexpr double kTieTol = 1e-9;
constexpr double kFloorRelax = 1e-7;

bool tied(double a, double b) { return std::abs(a - b) <= kTieTol * std::max(std::abs(a), std::abs(b)); }

// Per-user constants of the ZF SINR: signal gain a_u = |c(u,g)|/sqrt(P_g) and
// leakage b(u, i) = |c(u,i)|^2 / P_i.
struct ZfGains {
  Eigen::VectorXd a;
  Eigen::MatrixXd b;
};

ZfGains gains(const ZfBasis& basis, const MulticastSystem& sys) {
  const int k = sys.num_users(), g = sys.num_groups();
  ZfGains out{Eigen::VectorXd(k), Eigen::MatrixXd(k, g)};
  for (int u = 0; u < k; ++u) {
    for (int i = 0; i < g; ++i) out.b(u, i) = std::norm(basis.cross(u, i)) / basis.norm[static_cast<std::size_t>(i)];
    out.a(u) = std::sqrt(out.b(u, sys.group_of(u)));
  }
  return out;
}

double leakage(const ZfGains& z, const MulticastSystem& sys, int u, const Eigen::VectorXd& rho) {
  double acc = 0.0;
  for (int i = 0; i < rho.size(); ++i)
    if (i != sys.group_of(u)) acc += z.b(u, i) * rho(i);
  return acc;
}

}  // namespace

RepresentativeSet select_representatives(const MulticastSystem& sys, CorrelationMeasure measure) {
  const int k = sys.num_users();
  const CMatrix& h = sys.gram();
  RepresentativeSet rs;
  rs.corr.resize(k, k);
  for (int i = 0; i < k; ++i) {
    for (int j = 0; j < k; ++j) {
      const double scale = std::sqrt(std::real(h(i, i)) * std::real(h(j, j)));
      const double v = measure == CorrelationMeasure::magnitude ? std::abs(h(i, j)) : std::real(h(i, j));
      rs.corr(i, j) = scale > 0.0 ? v / scale : 0.0;
    }
  }
  rs.intra.assign(static_cast<std::size_t>(k), 0.0);
  rs.inter.assign(static_cast<std::size_t>(k), 0.0);
  for (int i = 0; i < k; ++i) {
    for (int j = 0; j < k; ++j) {
      if (j == i) continue;
      (sys.group_of(j) == sys.group_of(i) ? rs.intra : rs.inter)[static_cast<std::size_t>(i)] += rs.corr(i, j);
    }
  }
  for (int g = 0; g < sys.num_groups(); ++g) {
    const int first = sys.first_user(g), last = first + sys.users_per_group();
    double best_intra = -std::numeric_limits<double>::infinity();
    for (int i = first; i < last; ++i) best_intra = std::max(best_intra, rs.intra[static_cast<std::size_t>(i)]);
    int pick = -1;
    for (int i = first; i < last; ++i) {
      const auto ui = static_cast<std::size_t>(i);
      if (!tied(rs.intra[ui], best_intra)) continue;
      if (pick < 0) {
        pick = i;
        continue;
      }
      const double cur = rs.inter[static_cast<std::size_t>(pick)];
      if (rs.inter[ui] < cur && !tied(rs.inter[ui], cur)) pick = i;
    }
    rs.users.push_back(pick);
  }
  return rs;
}

ZfBasis build_zf_basis(const RepresentativeSet& reps, const MulticastSystem& sys) {
  const int g = sys.num_groups(), k = sys.num_users();
  if (static_cast<int>(reps.users.size()) != g) throw ValidationError("one representative per group expected");
  ZfBasis zb;
  zb.reps = reps.users;
  zb.h_ot.resize(g, g);
  for (int i = 0; i < g; ++i)
    for (int j = 0; j < g; ++j) zb.h_ot(i, j) = sys.gram()(zb.reps[static_cast<std::size_t>(i)], zb.reps[static_cast<std::size_t>(j)]);

  const Eigen::SelfAdjointEigenSolver<CMatrix> eig(zb.h_ot, Eigen::EigenvaluesOnly);
  const double lo = eig.eigenvalues().minCoeff(), hi = eig.eigenvalues().maxCoeff();
  zb.condition = lo > 0.0 ? hi / lo : std::numeric_limits<double>::infinity();
  if (!(zb.condition < kConditionLimit)) {
    std::ostringstream msg;
    msg << "representative Gram matrix is ill-conditioned (condition number " << zb.condition << ")";
    throw NumericalConditioning(msg.str());
  }
  zb.beta = zb.h_ot.partialPivLu().solve(CMatrix::Identity(g, g));

  zb.pattern = CMatrix::Zero(k, g);
  for (int j = 0; j < g; ++j) zb.pattern.row(zb.reps[static_cast<std::size_t>(j)]) = zb.beta.row(j);
  for (int i = 0; i < g; ++i) zb.norm.push_back(std::real(zb.beta.col(i).dot(zb.h_ot * zb.beta.col(i))));
  zb.cross = sys.gram() * zb.pattern;
  return zb;
}

BeamCoefficients assemble_zf_beams(const Eigen::VectorXd& rho, const ZfBasis& basis) {
  BeamCoefficients b;
  b.coeffs = basis.pattern;
  for (int g = 0; g < basis.num_groups(); ++g)
    b.coeffs.col(g) *= std::sqrt(std::max(rho(g), 0.0) / basis.norm[static_cast<std::size_t>(g)]);
  return b;
}

std::vector<double> zf_sinr(const Eigen::VectorXd& rho, const ZfBasis& basis, const MulticastSystem& sys) {
  const ZfGains z = gains(basis, sys);
  std::vector<double> out;
  for (int u = 0; u < sys.num_users(); ++u)
    out.push_back(z.a(u) * z.a(u) * rho(sys.group_of(u)) / (leakage(z, sys, u, rho) + sys.noise(u)));
  return out;
}

Eigen::VectorXd zf_mu_update(const Eigen::VectorXd& rho, const ZfBasis& basis, const MulticastSystem& sys) {
  const ZfGains z = gains(basis, sys);
  Eigen::VectorXd mu(sys.num_users());
  for (int u = 0; u < sys.num_users(); ++u)
    mu(u) = z.a(u) * std::sqrt(std::max(rho(sys.group_of(u)), 0.0)) / (leakage(z, sys, u, rho) + sys.noise(u));
  return mu;
}

std::vector<double> zf_r_update(const Eigen::VectorXd& rho, const ZfBasis& basis, const MulticastSystem& sys) {
  const auto s = zf_sinr(rho, basis, sys);
  std::vector<double> r;
  for (int g = 0; g < sys.num_groups(); ++g) {
    const auto first = s.begin() + sys.first_user(g);
    r.push_back(*std::min_element(first, first + sys.users_per_group()));
  }
  return r;
}

std::vector<double> zf_surrogate(const Eigen::VectorXd& mu, const Eigen::VectorXd& rho, const ZfBasis& basis,
                                 const MulticastSystem& sys) {
  const ZfGains z = gains(basis, sys);
  std::vector<double> y;
  for (int u = 0; u < sys.num_users(); ++u) {
    const double q = std::sqrt(std::max(rho(sys.group_of(u)), 0.0));
    y.push_back(2.0 * mu(u) * z.a(u) * q - mu(u) * mu(u) * (leakage(z, sys, u, rho) + sys.noise(u)));
  }
  return y;
}

double zf_objective(const Eigen::VectorXd& rho, double eta, const ZfBasis& basis, const MulticastSystem& sys) {
  double f = -eta * rho.sum();
  for (double r : zf_r_update(rho, basis, sys)) f += std::log2(1.0 + r);
  return f;
}

namespace {

// Log-barrier Newton solver for the power-allocation subproblem in the
// variables z = (q_a, r_a) of the active groups, q = sqrt(rho).
class BarrierProblem {
 public:
  BarrierProblem(const Eigen::VectorXd& mu, double eta, const ZfGains& z, const MulticastSystem& sys,
                 std::vector<int> active)
      : mu_(mu), eta_(eta), z_(z), sys_(sys), active_(std::move(active)) {
    na_ = static_cast<int>(active_.size());
    for (int a = 0; a < na_; ++a) {
      const int g = active_[static_cast<std::size_t>(a)];
      floor_.push_back(sys.sinr_floor(g) * (1.0 - kFloorRelax));
      for (int u = sys.first_user(g); u < sys.first_user(g) + sys.users_per_group(); ++u) users_.push_back({u, a});
    }
  }

  int dim() const { return 2 * na_; }
  int constraints() const { return static_cast<int>(users_.size()) + 2 * na_ + 1; }

  // y of every constrained user at the q part of z.
  double y(const Eigen::VectorXd& x, int u, int own) const {
    double leak = 0.0;
    for (int b = 0; b < na_; ++b)
      if (b != own) leak += z_.b(u, active_[static_cast<std::size_t>(b)]) * x(b) * x(b);
    return 2.0 * mu_(u) * z_.a(u) * x(own) - mu_(u) * mu_(u) * (leak + sys_.noise(u));
  }

  double objective(const Eigen::VectorXd& x) const {
    double f = 0.0;
    for (int a = 0; a < na_; ++a) f += std::log2(1.0 + x(na_ + a)) - eta_ * x(a) * x(a);
    return f;
  }

  bool strictly_feasible(const Eigen::VectorXd& x) const {
    double power = 0.0;
    for (int a = 0; a < na_; ++a) {
      if (!(x(a) > 0.0) || !(x(na_ + a) - floor_[static_cast<std::size_t>(a)] > 0.0)) return false;
      power += x(a) * x(a);
    }
    if (!(sys_.power_budget() - power > 0.0)) return false;
    for (const auto& [u, a] : users_)
      if (!(y(x, u, a) - x(na_ + a) > 0.0)) return false;
    return true;
  }

  double barrier_value(const Eigen::VectorXd& x, double t) const {
    double v = t * objective(x);
    double power = 0.0;
    for (int a = 0; a < na_; ++a) {
      v += std::log(x(a)) + std::log(x(na_ + a) - floor_[static_cast<std::size_t>(a)]);
      power += x(a) * x(a);
    }
    v += std::log(sys_.power_budget() - power);
    for (const auto& [u, a] : users_) v += std::log(y(x, u, a) - x(na_ + a));
    return v;
  }

  void derivatives(const Eigen::VectorXd& x, double t, Eigen::VectorXd& grad, Eigen::MatrixXd& hess) const {
    const int n = dim();
    grad.setZero(n);
    hess.setZero(n, n);
    double power = 0.0;
    for (int a = 0; a < na_; ++a) {
      const double r = x(na_ + a);
      grad(a) += -2.0 * t * eta_ * x(a) + 1.0 / x(a);
      hess(a, a) += -2.0 * t * eta_ - 1.0 / (x(a) * x(a));
      const double slack = r - floor_[static_cast<std::size_t>(a)];
      grad(na_ + a) += t / (std::numbers::ln2 * (1.0 + r)) + 1.0 / slack;
      hess(na_ + a, na_ + a) += -t / (std::numbers::ln2 * (1.0 + r) * (1.0 + r)) - 1.0 / (slack * slack);
      power += x(a) * x(a);
    }
    const double pslack = sys_.power_budget() - power;
    Eigen::VectorXd dp = Eigen::VectorXd::Zero(n);
    for (int a = 0; a < na_; ++a) {
      dp(a) = -2.0 * x(a);
      hess(a, a) += -2.0 / pslack;
    }
    grad += dp / pslack;
    hess -= dp * dp.transpose() / (pslack * pslack);

    Eigen::VectorXd du(n);
    for (const auto& [u, a] : users_) {
      const double slack = y(x, u, a) - x(na_ + a);
      du.setZero();
      du(a) = 2.0 * mu_(u) * z_.a(u);
      for (int b = 0; b < na_; ++b) {
        if (b == a) continue;
        const double c = mu_(u) * mu_(u) * z_.b(u, active_[static_cast<std::size_t>(b)]);
        du(b) = -2.0 * c * x(b);
        hess(b, b) += -2.0 * c / slack;
      }
      du(na_ + a) = -1.0;
      grad += du / slack;
      hess -= du * du.transpose() / (slack * slack);
    }
  }

  double min_y(const Eigen::VectorXd& x, int a) const {
    double m = std::numeric_limits<double>::infinity();
    for (const auto& [u, b] : users_)
      if (b == a) m = std::min(m, y(x, u, a));
    return m;
  }

  double floor(int a) const { return floor_[static_cast<std::size_t>(a)]; }

 private:
  const Eigen::VectorXd& mu_;
  double eta_;
  const ZfGains& z_;
  const MulticastSystem& sys_;
  std::vector<int> active_;
  int na_ = 0;
  std::vector<double> floor_;
  std::vector<std::pair<int, int>> users_;  // (user, active slot)
};

}  // namespace

PowerAllocation solve_power_allocation(const Eigen::VectorXd& mu, double eta, const ZfBasis& basis,
                                       const MulticastSystem& sys, const Eigen::VectorXd& start,
                                       const PowerAllocationOptions& opts) {
  const int g = sys.num_groups();
  const ZfGains z = gains(basis, sys);

  auto finish = [&](const Eigen::VectorXd& rho, int steps, bool improved) {
    PowerAllocation out;
    out.rho = rho;
    out.newton_steps = steps;
    out.improved = improved;
    const auto y = zf_surrogate(mu, rho, basis, sys);
    out.objective = -eta * rho.sum();
    for (int gg = 0; gg < g; ++gg) {
      const auto first = y.begin() + sys.first_user(gg);
      const double r = std::max(0.0, *std::min_element(first, first + sys.users_per_group()));
      out.r.push_back(r);
      out.objective += std::log2(1.0 + r);
    }
    return out;
  };

  std::vector<int> active;
  for (int gg = 0; gg < g; ++gg) {
    bool live = start(gg) > 0.0;
    for (int u = sys.first_user(gg); live && u < sys.first_user(gg) + sys.users_per_group(); ++u)
      live = mu(u) > 0.0 && z.a(u) > 0.0;
    if (live) active.push_back(gg);
    else if (sys.sinr_floor(gg) > 0.0) return finish(start, 0, false);
  }
  const PowerAllocation baseline = finish(start, 0, false);
  if (active.empty()) return finish(Eigen::VectorXd::Zero(g), 0, true);

  BarrierProblem prob(mu, eta, z, sys, active);
  const int na = static_cast<int>(active.size());
  Eigen::VectorXd x(prob.dim());
  double power = 0.0;
  for (int a = 0; a < na; ++a) power += start(active[static_cast<std::size_t>(a)]);
  const double shrink = std::min(1.0, std::sqrt(sys.power_budget() / power)) * (1.0 - 1e-10);
  for (int a = 0; a < na; ++a) x(a) = std::sqrt(start(active[static_cast<std::size_t>(a)])) * shrink;
  for (int a = 0; a < na; ++a) {
    const double top = prob.min_y(x, a);
    if (!(top > prob.floor(a))) return baseline;
    x(na + a) = prob.floor(a) + 0.5 * (top - prob.floor(a));
  }
  if (!prob.strictly_feasible(x)) return baseline;

  const double m = prob.constraints();
  double t = m / std::max(1.0, std::abs(prob.objective(x)));
  int steps = 0;
  Eigen::VectorXd grad;
  Eigen::MatrixXd hess;
  while (steps < opts.max_newton) {
    for (int inner = 0; inner < 100 && steps < opts.max_newton; ++inner, ++steps) {
      prob.derivatives(x, t, grad, hess);
      const Eigen::LDLT<Eigen::MatrixXd> ldlt(-hess);
      const Eigen::VectorXd dx = ldlt.solve(grad);
      const double decrement = grad.dot(dx);
      if (!(decrement > 1e-12) || !dx.allFinite()) break;
      const double phi0 = prob.barrier_value(x, t);
      double step = 1.0;
      Eigen::VectorXd trial;
      bool moved = false;
      while (step > 1e-14) {
        trial = x + step * dx;
        if (prob.strictly_feasible(trial) && prob.barrier_value(trial, t) >= phi0 + 0.25 * step * decrement) {
          moved = true;
          break;
        }
        step *= 0.5;
      }
      if (!moved) break;
      x = trial;
    }
    if (m / t < opts.gap * std::max(1.0, std::abs(prob.objective(x)))) break;
    t *= 20.0;
  }

  Eigen::VectorXd rho = Eigen::VectorXd::Zero(g);
  for (int a = 0; a < na; ++a) rho(active[static_cast<std::size_t>(a)]) = x(a) * x(a);
  PowerAllocation out = finish(rho, steps, true);
  if (out.objective < baseline.objective) return baseline;
  return out;
}

Eigen::VectorXd zf_min_power(const ZfBasis& basis, const MulticastSystem& sys, double margin) {
  const ZfGains z = gains(basis, sys);
  const int g = sys.num_groups();
  Eigen::VectorXd rho = Eigen::VectorXd::Zero(g);
  for (int iter = 0; iter < 100000; ++iter) {
    Eigen::VectorXd next = Eigen::VectorXd::Zero(g);
    for (int u = 0; u < sys.num_users(); ++u) {
      const int own = sys.group_of(u);
      const double target = sys.sinr_floor(own) * (1.0 + margin);
      if (target == 0.0) continue;
      if (z.a(u) == 0.0) throw InfeasibleProblem("a user is nulled by its own group's ZF beam; its rate floor cannot be met");
      next(own) = std::max(next(own), target * (leakage(z, sys, u, rho) + sys.noise(u)) / (z.a(u) * z.a(u)));
    }
    if (next.sum() > sys.power_budget()) {
      std::ostringstream msg;
      msg << "rate floors need more than the power budget " << sys.power_budget() << " under ZF beams";
      throw InfeasibleProblem(msg.str());
    }
    const double change = (next - rho).cwiseAbs().maxCoeff();
    rho = next;
    if (change <= 1e-14 * std::max(rho.maxCoeff(), std::numeric_limits<double>::min())) return rho;
  }
  throw InfeasibleProblem("minimum-power iteration did not settle; floors are at the edge of feasibility");
}

Eigen::VectorXd zf_initial_power(const ZfBasis& basis, const MulticastSystem& sys) {
  const int g = sys.num_groups();
  Eigen::VectorXd rho = Eigen::VectorXd::Constant(g, sys.power_budget() / g);
  const auto r = zf_r_update(rho, basis, sys);
  bool ok = true;
  for (int gg = 0; gg < g; ++gg) ok = ok && r[static_cast<std::size_t>(gg)] >= sys.sinr_floor(gg);
  return ok ? rho : zf_min_power(basis, sys);
}

ZfResult solve_zf_dinkelbach_subproblem(double eta, const MulticastSystem& sys, const ZfBasis& basis,
                                        const Eigen::VectorXd& start, const ZfOptions& opts) {
  const auto r0 = zf_r_update(start, basis, sys);
  for (int g = 0; g < sys.num_groups(); ++g)
    if (std::log2(1.0 + r0[static_cast<std::size_t>(g)]) < sys.rate_floor(g) * (1.0 - kFeasibilityTol))
      throw InfeasibleProblem("ZF warm start misses a rate floor");
  if (start.sum() > sys.power_budget() * (1.0 + kFeasibilityTol))
    throw InfeasibleProblem("ZF warm start exceeds the power budget");

  ZfResult res;
  res.rho = start;
  res.objective = zf_objective(start, eta, basis, sys);
  res.trace.push_back({res.objective, r0, start.sum(), 0});
  for (int it = 0; it < opts.max_bcd_iter; ++it) {
    const Eigen::VectorXd mu = zf_mu_update(res.rho, basis, sys);
    const PowerAllocation pa = solve_power_allocation(mu, eta, basis, sys, res.rho, opts.power);
    const double f = zf_objective(pa.rho, eta, basis, sys);
    if (!pa.improved || f < res.objective) {
      res.converged = true;
      break;
    }
    const double delta = f - res.objective;
    res.rho = pa.rho;
    res.objective = f;
    res.trace.push_back({f, zf_r_update(res.rho, basis, sys), res.rho.sum(), pa.newton_steps});
    if (delta <= opts.tol) {
      res.converged = true;
      break;
    }
  }
  res.mu = zf_mu_update(res.rho, basis, sys);
  res.r = zf_r_update(res.rho, basis, sys);
  return res;
}

}  // namespace capa
