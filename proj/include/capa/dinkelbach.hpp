#pragma once

// Fractional-programming outer loop: maximize R(J) / P(J) through a sequence
// of parametric problems max R(J) - eta P(J).

#include <functional>
#include <memory>
#include <vector>

#include "capa/beamform.hpp"
#include "capa/cov.hpp"
#include "capa/zf.hpp"

namespace capa {

struct InnerStep {
  double objective = 0.0;
  double power = 0.0;
  std::vector<double> r;
  int work = 0;  // ellipsoid iterations or Newton steps
};

struct InnerOutcome {
  BeamCoefficients beams;
  double objective = 0.0;
  std::vector<InnerStep> trace;
  bool converged = false;
};

/// Solves max R(J) - eta P(J) under the floors and budget.  Stateful solvers
/// warm-start each call from their previous answer.
using InnerSolver = std::function<InnerOutcome(double eta)>;

InnerSolver make_cov_solver(const MulticastSystem& sys, const CovOptions& opts = {});
InnerSolver make_zf_solver(const MulticastSystem& sys, const ZfOptions& opts = {},
                           CorrelationMeasure measure = CorrelationMeasure::magnitude);

struct DinkelbachStep {
  int outer = 0;
  double eta = 0.0;  // parameter handed to the inner solver
  double sum_rate = 0.0;
  double power = 0.0;
  double ee = 0.0;   // R / P of the inner answer, the next eta
  double objective = 0.0;  // R - eta P
  std::vector<double> group_rates;
  InnerOutcome inner;
};

struct DinkelbachOptions {
  double eta0 = 0.0;
  double tol = 1e-4;  // on |eta_{l+1} - eta_l| / max(1, eta_l)
  int max_outer = 100;
};

struct DinkelbachRun {
  std::vector<DinkelbachStep> steps;
  BeamCoefficients beams;
  PerfReport report;
  double eta = 0.0;
  bool converged = false;

  int outer_iterations() const { return static_cast<int>(steps.size()); }
};

DinkelbachRun run(const MulticastSystem& sys, const InnerSolver& inner, const DinkelbachOptions& opts = {});

}  // namespace capa
