// Reference generating model and seed shared by the acceptance suite and the
// seeded regression tests. The curve peaks between ages 27 and 28 and the
// variance components are sized so that the 0.55-OPS dropout rules remove a
// realistic slice of the league.
#pragma once

#include "agecurve/lmm.hpp"

namespace reference {

inline constexpr uint64_t kSeed = 4242;

inline agecurve::LmmFit fit() {
  agecurve::LmmFit f;
  f.beta << 0.74, -0.054, -0.12, -0.03;
  f.tau2 = 0.012;
  f.sigma2 = 0.010;
  f.converged = true;
  f.loglik = 0.0;
  return f;
}

}  // namespace reference
