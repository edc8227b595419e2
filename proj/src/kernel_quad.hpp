#pragma once

// Extended-precision fallback for the small inverse-kernel systems that
// double precision cannot close when p |mu|^2 |h|^2 spans many decades.

#include "capa/channel.hpp"

namespace capa::detail {

struct KernelSolution {
  CMatrix c;         // (I + P Q)^{-1}
  CVector x;         // -C P b
  double residual = 0.0;  // max |C (I + P Q) - I|, evaluated in the wide type
};

/// 80-bit first, binary128 when that still leaves a residual above target.
KernelSolution solve_kernel_wide(const CMatrix& q, const Eigen::VectorXd& p, const CVector& b, double target);

}  // namespace capa::detail
