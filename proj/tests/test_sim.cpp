#include <doctest.h>

#include <cmath>

#include "agecurve/sim.hpp"

using namespace agecurve;

namespace {

LmmFit make_fit(double b0, double b1, double b2, double b3, double tau2, double sigma2) {
  LmmFit fit;
  fit.beta << b0, b1, b2, b3;
  fit.tau2 = tau2;
  fit.sigma2 = sigma2;
  fit.converged = true;
  return fit;
}

// panel whose per-season OPS-scale values are given explicitly
CareerPanel panel_from_ops(const std::vector<std::vector<double>>& ops, const AgeGrid& grid,
                           const TransformSpec& spec) {
  std::vector<std::string> ids;
  for (size_t p = 0; p < ops.size(); ++p) ids.push_back("p" + std::to_string(p + 1));
  CareerPanel panel(ids, grid);
  for (size_t p = 0; p < ops.size(); ++p) {
    for (size_t a = 0; a < ops[p].size(); ++a) {
      panel.set_observed(static_cast<int>(p), static_cast<int>(a),
                         transform_ops(ops[p][a], spec));
    }
  }
  return panel;
}

bool missing_is_suffix(const CareerPanel& panel, int p) {
  bool seen_missing = false;
  for (int a = 0; a < panel.grid().size(); ++a) {
    if (!panel.observed(p, a)) {
      seen_missing = true;
    } else if (seen_missing) {
      return false;
    }
  }
  return true;
}

}  // namespace

TEST_CASE("zero-noise simulation reproduces the population curve exactly") {
  LmmFit fit = make_fit(0.7, -0.05, -0.1, -0.02, 0.0, 0.0);
  AgeGrid grid;
  CareerPanel panel = simulate_careers(fit, 5, grid, SeededRng{1, 0});
  CHECK(panel.fully_observed());
  for (int p = 0; p < 5; ++p) {
    for (int a = 0; a < grid.size(); ++a) {
      CHECK(panel.value(p, a) == doctest::Approx(predict_mean(fit, grid.age_at(a))).epsilon(1e-15));
    }
  }
}

TEST_CASE("same seed and stream give bit-identical panels") {
  LmmFit fit = make_fit(0.7, -0.05, -0.1, -0.02, 0.015, 0.01);
  CareerPanel a = simulate_careers(fit, 50, AgeGrid{}, SeededRng{99, 7});
  CareerPanel b = simulate_careers(fit, 50, AgeGrid{}, SeededRng{99, 7});
  CareerPanel c = simulate_careers(fit, 50, AgeGrid{}, SeededRng{99, 8});
  bool all_equal = true, any_diff_c = false;
  for (int p = 0; p < 50; ++p) {
    for (int idx = 0; idx < 19; ++idx) {
      all_equal = all_equal && a.value(p, idx) == b.value(p, idx);
      any_diff_c = any_diff_c || a.value(p, idx) != c.value(p, idx);
    }
  }
  CHECK(all_equal);
  CHECK(any_diff_c);
}

TEST_CASE("career-mean variance decomposes as tau2 + sigma2/19") {
  const double tau2 = 0.015, sigma2 = 0.012;
  LmmFit fit = make_fit(0.7, -0.05, -0.08, -0.02, tau2, sigma2);
  AgeGrid grid;
  CareerPanel panel = simulate_careers(fit, 1000, grid, SeededRng{2024, 0});

  // de-mean by the population curve so only b + noise remains
  double sum = 0.0, sum2 = 0.0;
  for (int p = 0; p < panel.n_players(); ++p) {
    double career = 0.0;
    for (int a = 0; a < grid.size(); ++a) {
      career += panel.value(p, a) - predict_mean(fit, grid.age_at(a));
    }
    career /= grid.size();
    sum += career;
    sum2 += career * career;
  }
  const double n = panel.n_players();
  const double var = (sum2 - sum * sum / n) / (n - 1.0);
  const double expected = tau2 + sigma2 / 19.0;
  CHECK(var == doctest::Approx(expected).epsilon(0.15));
}

TEST_CASE("simulated values are clamped to the transformed range") {
  LmmFit fit = make_fit(1.5, 0.0, 0.0, 0.0, 0.0, 0.05);
  CareerPanel panel = simulate_careers(fit, 200, AgeGrid{}, SeededRng{31, 0});
  for (int p = 0; p < panel.n_players(); ++p) {
    for (int a = 0; a < 19; ++a) {
      CHECK(panel.value(p, a) >= 0.0);
      CHECK(panel.value(p, a) <= kHalfPi);
    }
  }
}

TEST_CASE("threshold 0 drops nobody under the performance mechanisms") {
  TransformSpec tspec;
  LmmFit fit = make_fit(0.7, -0.05, -0.1, -0.02, 0.02, 0.01);
  CareerPanel panel = simulate_careers(fit, 30, AgeGrid{}, SeededRng{5, 0});
  for (DropoutMechanism mech : {DropoutMechanism::kRolling4, DropoutMechanism::kEarlyCareer}) {
    DropoutSpec spec;
    spec.mechanism = mech;
    spec.threshold = 0.0;
    CareerPanel out = apply_dropout(panel, spec, tspec, SeededRng{5, 1});
    CHECK(out.fully_observed());
  }
}

TEST_CASE("certain retirement masks exactly ages 30+") {
  TransformSpec tspec;
  LmmFit fit = make_fit(0.7, -0.05, -0.1, -0.02, 0.02, 0.01);
  CareerPanel panel = simulate_careers(fit, 20, AgeGrid{}, SeededRng{6, 0});
  DropoutSpec spec;
  spec.mechanism = DropoutMechanism::kRandomAt30;
  spec.retire_prob = 1.0;
  CareerPanel out = apply_dropout(panel, spec, tspec, SeededRng{6, 1});
  for (int p = 0; p < out.n_players(); ++p) {
    for (int a = 0; a < out.grid().size(); ++a) {
      CHECK(out.observed(p, a) == (out.grid().age_at(a) < 30));
    }
  }
}

TEST_CASE("early-career mechanism masks the 0.50 hitter and keeps the 0.60 hitter") {
  TransformSpec tspec;
  AgeGrid grid;
  std::vector<std::vector<double>> ops(2, std::vector<double>(19, 0.60));
  ops[0][0] = 0.45;
  ops[0][1] = 0.55;
  ops[0][2] = 0.50;
  ops[0][3] = 0.52;
  ops[0][4] = 0.48;  // player A: ages 21-25 average exactly 0.50
  ops[1][0] = 0.55;
  ops[1][1] = 0.65;
  ops[1][2] = 0.60;
  ops[1][3] = 0.62;
  ops[1][4] = 0.58;  // player B: average exactly 0.60
  CareerPanel panel = panel_from_ops(ops, grid, tspec);

  DropoutSpec spec;
  spec.mechanism = DropoutMechanism::kEarlyCareer;
  CareerPanel out = apply_dropout(panel, spec, tspec, SeededRng{0, 0});
  for (int a = 0; a < grid.size(); ++a) {
    CHECK(out.observed(0, a) == (grid.age_at(a) <= 25));
    CHECK(out.observed(1, a));
  }
  // surviving cells keep their values bit for bit
  for (int a = 0; a < 5; ++a) CHECK(out.value(0, a) == panel.value(0, a));
}

TEST_CASE("rolling window triggers the age after it dips") {
  TransformSpec tspec;
  AgeGrid grid;
  std::vector<std::vector<double>> ops(1, std::vector<double>(19, 0.60));
  ops[0][3] = 0.44;  // age 24: window mean 0.56, above threshold
  ops[0][4] = 0.40;  // age 25: window mean 0.51 < 0.55 -> out from age 26
  CareerPanel panel = panel_from_ops(ops, grid, tspec);

  DropoutSpec spec;
  spec.mechanism = DropoutMechanism::kRolling4;
  CareerPanel out = apply_dropout(panel, spec, tspec, SeededRng{0, 0});
  for (int a = 0; a < grid.size(); ++a) {
    CHECK(out.observed(0, a) == (grid.age_at(a) <= 25));
  }
}

TEST_CASE("threshold comparison is strict: equality survives") {
  TransformSpec tspec;
  AgeGrid grid;
  std::vector<std::vector<double>> ops(1, std::vector<double>(19, 0.52));
  CareerPanel panel = panel_from_ops(ops, grid, tspec);

  // the early-career mean exactly as the mechanism computes it
  double sum = 0.0;
  for (int a = 0; a < 5; ++a) sum += inverse_transform_ops(panel.value(0, a), tspec);
  const double mean = sum / 5;

  DropoutSpec spec;
  spec.mechanism = DropoutMechanism::kEarlyCareer;
  spec.threshold = mean;
  CareerPanel at_threshold = apply_dropout(panel, spec, tspec, SeededRng{0, 0});
  CHECK(at_threshold.fully_observed());

  spec.threshold = std::nextafter(mean, 1.0);
  CareerPanel above = apply_dropout(panel, spec, tspec, SeededRng{0, 0});
  CHECK(above.n_missing() == 14);
}

TEST_CASE("missingness is a suffix of every career for all mechanisms") {
  TransformSpec tspec;
  LmmFit fit = make_fit(0.63, -0.05, -0.1, -0.02, 0.03, 0.02);
  CareerPanel panel = simulate_careers(fit, 300, AgeGrid{}, SeededRng{8, 0});
  for (DropoutMechanism mech : {DropoutMechanism::kRolling4, DropoutMechanism::kEarlyCareer,
                                DropoutMechanism::kRandomAt30}) {
    DropoutSpec spec;
    spec.mechanism = mech;
    CareerPanel out = apply_dropout(panel, spec, tspec, SeededRng{8, 1});
    for (int p = 0; p < out.n_players(); ++p) {
      CHECK(missing_is_suffix(out, p));
    }
  }
}

TEST_CASE("random retirement mask ignores the panel values") {
  TransformSpec tspec;
  LmmFit fit = make_fit(0.7, -0.05, -0.1, -0.02, 0.02, 0.01);
  CareerPanel a = simulate_careers(fit, 100, AgeGrid{}, SeededRng{13, 0});
  LmmFit other = make_fit(0.5, 0.02, -0.2, 0.01, 0.05, 0.03);
  CareerPanel b = simulate_careers(other, 100, AgeGrid{}, SeededRng{14, 0});

  DropoutSpec spec;
  spec.mechanism = DropoutMechanism::kRandomAt30;
  CareerPanel da = apply_dropout(a, spec, tspec, SeededRng{77, 0});
  CareerPanel db = apply_dropout(b, spec, tspec, SeededRng{77, 0});
  for (int p = 0; p < 100; ++p) {
    for (int idx = 0; idx < 19; ++idx) {
      CHECK(da.observed(p, idx) == db.observed(p, idx));
    }
  }
}

TEST_CASE("panels with pre-existing missingness are rejected") {
  TransformSpec tspec;
  CareerPanel panel({"a", "b"}, AgeGrid{});
  for (int p = 0; p < 2; ++p) {
    for (int a = 0; a < 18; ++a) panel.set_observed(p, a, 0.6);
  }
  DropoutSpec spec;
  CHECK_THROWS_AS(apply_dropout(panel, spec, tspec, SeededRng{1, 0}), std::invalid_argument);
}

TEST_CASE("random retirement leaves roughly a quarter missing at ages 30+") {
  TransformSpec tspec;
  LmmFit fit = make_fit(0.7, -0.05, -0.1, -0.02, 0.015, 0.01);
  CareerPanel panel = simulate_careers(fit, 1000, AgeGrid{}, SeededRng{2025, 0});
  DropoutSpec spec;
  spec.mechanism = DropoutMechanism::kRandomAt30;
  CareerPanel out = apply_dropout(panel, spec, tspec, SeededRng{2025, 1});
  PanelSummary s = panel_summary(out);
  for (int a = 0; a < out.grid().size(); ++a) {
    const double frac = s.missing_frac_by_age[static_cast<size_t>(a)];
    if (out.grid().age_at(a) < 30) {
      CHECK(frac == 0.0);
    } else {
      // 263 of 1000 retire under this seed; the same draw governs every age
      // past 30
      CHECK(frac == 0.263);
      CHECK(frac == s.missing_frac_by_age[10]);
    }
  }
}
