#include "agecurve/sim.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace agecurve {

std::string to_string(DropoutMechanism m) {
  switch (m) {
    case DropoutMechanism::kRolling4: return "rolling4";
    case DropoutMechanism::kEarlyCareer: return "early";
    case DropoutMechanism::kRandomAt30: return "random30";
  }
  return "unknown";
}

DropoutMechanism dropout_mechanism_from_string(const std::string& name) {
  if (name == "rolling4") return DropoutMechanism::kRolling4;
  if (name == "early") return DropoutMechanism::kEarlyCareer;
  if (name == "random30") return DropoutMechanism::kRandomAt30;
  throw std::invalid_argument("unknown dropout mechanism: " + name);
}

void DropoutSpec::validate() const {
  // threshold 0 is allowed as the explicit no-op case
  if (!(threshold >= 0.0)) throw std::invalid_argument("DropoutSpec: threshold must be >= 0");
  if (!(retire_prob >= 0.0 && retire_prob <= 1.0)) {
    throw std::invalid_argument("DropoutSpec: retire_prob must lie in [0, 1]");
  }
}

CareerPanel simulate_careers(const LmmFit& fit, int n_players, const AgeGrid& grid,
                             SeededRng key) {
  grid.validate();
  if (n_players < 1) throw std::invalid_argument("simulate_careers: n_players >= 1 required");
  if (!fit.converged) throw std::invalid_argument("simulate_careers: fit did not converge");

  std::vector<std::string> ids;
  ids.reserve(static_cast<size_t>(n_players));
  char buf[24];
  for (int i = 0; i < n_players; ++i) {
    std::snprintf(buf, sizeof(buf), "p%05d", i + 1);
    ids.emplace_back(buf);
  }
  CareerPanel panel(std::move(ids), grid);

  const double tau_sd = std::sqrt(std::max(fit.tau2, 0.0));
  const double eps_sd = std::sqrt(std::max(fit.sigma2, 0.0));
  for (int p = 0; p < n_players; ++p) {
    RngStream rng(key.derive("sim.player", static_cast<uint64_t>(p)));
    const double b = tau_sd > 0.0 ? rng.normal(0.0, tau_sd) : 0.0;
    for (int a = 0; a < grid.size(); ++a) {
      const double mean = predict_mean(fit, grid.age_at(a));
      const double eps = eps_sd > 0.0 ? rng.normal(0.0, eps_sd) : 0.0;
      panel.set_observed(p, a, std::clamp(mean + b + eps, 0.0, kHalfPi));
    }
  }
  return panel;
}

namespace {

// First age index (inclusive) from which the player's cells become missing,
// or grid.size() when the player survives the full window.
int rolling4_cut(const CareerPanel& panel, int p, const TransformSpec& tspec, double threshold) {
  const int n = panel.grid().size();
  // trailing window of four seasons exists from the fourth grid age on;
  // dropout takes effect the age after the window
  for (int a = 3; a < n; ++a) {
    double sum = 0.0;
    for (int j = a - 3; j <= a; ++j) {
      sum += inverse_transform_ops(std::clamp(panel.value(p, j), 0.0, kHalfPi), tspec);
    }
    if (sum / 4.0 < threshold) return a + 1;
  }
  return n;
}

int early_career_cut(const CareerPanel& panel, int p, const TransformSpec& tspec,
                     double threshold) {
  const int n = panel.grid().size();
  const int window = std::min(5, n);
  double sum = 0.0;
  for (int j = 0; j < window; ++j) {
    sum += inverse_transform_ops(std::clamp(panel.value(p, j), 0.0, kHalfPi), tspec);
  }
  if (sum / window < threshold) return window;
  return n;
}

}  // namespace

CareerPanel apply_dropout(const CareerPanel& panel, const DropoutSpec& spec,
                          const TransformSpec& tspec, SeededRng key) {
  spec.validate();
  tspec.validate();
  if (!panel.fully_observed()) {
    throw std::invalid_argument("apply_dropout: panel must be fully observed");
  }
  CareerPanel out = panel;
  for (int p = 0; p < panel.n_players(); ++p) {
    int cut = panel.grid().size();
    switch (spec.mechanism) {
      case DropoutMechanism::kRolling4:
        cut = rolling4_cut(panel, p, tspec, spec.threshold);
        break;
      case DropoutMechanism::kEarlyCareer:
        cut = early_career_cut(panel, p, tspec, spec.threshold);
        break;
      case DropoutMechanism::kRandomAt30: {
        RngStream rng(key.derive("dropout.player", static_cast<uint64_t>(p)));
        if (rng.uniform01() < spec.retire_prob) {
          const int idx = panel.grid().index_of(spec.retire_age);
          cut = idx >= 0 ? idx : (spec.retire_age < panel.grid().min_age ? 0 : panel.grid().size());
        }
        break;
      }
    }
    for (int a = cut; a < panel.grid().size(); ++a) out.set_missing(p, a);
  }
  return out;
}

}  // namespace agecurve
