#include "capa/dinkelbach.hpp"

#include <cmath>
#include <stdexcept>

namespace capa {

InnerSolver make_cov_solver(const MulticastSystem& sys, const CovOptions& opts) {
  auto state = std::make_shared<BeamCoefficients>(cov_warm_start(sys));
  return [&sys, opts, state](double eta) {
    CovResult r = solve_dinkelbach_subproblem(eta, sys, *state, opts);
    *state = r.beams;
    InnerOutcome out;
    out.beams = std::move(r.beams);
    out.objective = r.objective;
    out.converged = r.converged;
    for (const auto& it : r.trace) out.trace.push_back({it.objective, it.power, it.r, it.ellipsoid_iterations});
    return out;
  };
}

InnerSolver make_zf_solver(const MulticastSystem& sys, const ZfOptions& opts, CorrelationMeasure measure) {
  auto basis = std::make_shared<ZfBasis>(build_zf_basis(select_representatives(sys, measure), sys));
  auto rho = std::make_shared<Eigen::VectorXd>(zf_initial_power(*basis, sys));
  return [&sys, opts, basis, rho](double eta) {
    ZfResult r = solve_zf_dinkelbach_subproblem(eta, sys, *basis, *rho, opts);
    *rho = r.rho;
    InnerOutcome out;
    out.beams = assemble_zf_beams(r.rho, *basis);
    out.objective = r.objective;
    out.converged = r.converged;
    for (const auto& it : r.trace) out.trace.push_back({it.objective, it.power, it.r, it.newton_steps});
    return out;
  };
}

DinkelbachRun run(const MulticastSystem& sys, const InnerSolver& inner, const DinkelbachOptions& opts) {
  if (!(opts.eta0 >= 0.0)) throw std::invalid_argument("Dinkelbach eta0 must be nonnegative");
  if (!(opts.tol > 0.0)) throw std::invalid_argument("Dinkelbach tolerance must be positive");
  DinkelbachRun out;
  double eta = opts.eta0;
  for (int l = 1; l <= opts.max_outer; ++l) {
    DinkelbachStep step;
    step.outer = l;
    step.eta = eta;
    step.inner = inner(eta);
    const PerfReport rep = energy_efficiency(sys, step.inner.beams);
    step.sum_rate = rep.sum_rate;
    step.power = rep.power;
    step.ee = rep.ee;
    step.objective = rep.sum_rate - eta * rep.power;
    step.group_rates = rep.group_rates;
    const double next = rep.ee;
    out.beams = step.inner.beams;
    out.report = rep;
    out.steps.push_back(std::move(step));
    const double change = std::abs(next - eta);
    eta = next;
    if (change <= opts.tol * std::max(1.0, std::abs(eta))) {
      out.converged = true;
      break;
    }
  }
  out.eta = eta;
  return out;
}

}  // namespace capa
