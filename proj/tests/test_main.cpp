#define DOCTEST_CONFIG_IMPLEMENT
#include "doctest.h"

#include <cstdio>

#include "capa/cov.hpp"

int main(int argc, char** argv) {
  doctest::Context ctx;
  ctx.applyCommandLine(argc, argv);
  const int rc = ctx.run();
  if (ctx.shouldExit()) return rc;

  // Every beam_dual_opt call made by the selected cases must satisfy the
  // inverse-kernel identity.
  const capa::KernelAudit audit = capa::kernel_identity_audit();
  if (audit.calls > 0) {
    std::printf("inverse-kernel identity: %ld calls, max |C(I+PQ)-I| = %.3e, max correlation condition = %.3e\n",
                audit.calls, audit.max_residual, audit.max_condition);
    if (!(audit.max_residual <= 1e-9)) {
      std::printf("FAILED: inverse-kernel identity residual above 1e-9\n");
      return rc ? rc : 1;
    }
  }
  return rc;
}
