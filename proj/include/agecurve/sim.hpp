// Career simulation from a fitted random-intercept model and the three
// dropout mechanisms: a trailing four-season OPS average below threshold, an
// early-career (first five ages) OPS average below threshold, and random
// retirement at a fixed age.
#pragma once

#include <string>

#include "agecurve/core.hpp"
#include "agecurve/lmm.hpp"
#include "agecurve/rng.hpp"

namespace agecurve {

enum class DropoutMechanism { kRolling4, kEarlyCareer, kRandomAt30 };

std::string to_string(DropoutMechanism m);
DropoutMechanism dropout_mechanism_from_string(const std::string& name);

struct DropoutSpec {
  DropoutMechanism mechanism = DropoutMechanism::kEarlyCareer;
  double threshold = 0.55;  // OPS units
  double retire_prob = 0.25;
  int retire_age = 30;

  void validate() const;
};

// Draws one career per player: b_p ~ N(0, tau2) once, then value = population
// mean + b_p + N(0, sigma2) at every grid age, clamped to [0, pi/2]. Fully
// observed. Each player consumes its own substream of `key`, so output does
// not depend on evaluation order.
CareerPanel simulate_careers(const LmmFit& fit, int n_players, const AgeGrid& grid,
                             SeededRng key);

// Masks the post-dropout suffix of each career. Decisions compare averages on
// the OPS scale (values inverse-transformed via tspec). Requires a fully
// observed panel; surviving cells keep their values bit for bit, masked cells
// are cleared to NaN. Only kRandomAt30 consumes randomness.
CareerPanel apply_dropout(const CareerPanel& panel, const DropoutSpec& spec,
                          const TransformSpec& tspec, SeededRng key);

}  // namespace agecurve
