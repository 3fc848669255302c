#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "agecurve/pool.hpp"
#include "agecurve/rng.hpp"

using namespace agecurve;

namespace {

// independent re-derivation of the combining rules, kept deliberately naive
struct OracleOut {
  double q_bar, u_bar, b, t, r, nu;
};

OracleOut pool_oracle(const std::vector<double>& q, const std::vector<double>& u) {
  const double m = static_cast<double>(q.size());
  OracleOut o{};
  for (double v : q) o.q_bar += v / m;
  for (double v : u) o.u_bar += v / m;
  for (double v : q) o.b += (v - o.q_bar) * (v - o.q_bar) / (m - 1.0);
  o.t = o.u_bar + (1.0 + 1.0 / m) * o.b;
  if (o.b == 0.0) {
    o.r = 0.0;
    o.nu = std::numeric_limits<double>::infinity();
  } else if (o.u_bar == 0.0) {
    o.r = std::numeric_limits<double>::infinity();
    o.nu = m - 1.0;
  } else {
    o.r = (1.0 + 1.0 / m) * o.b / o.u_bar;
    o.nu = (m - 1.0) * (1.0 + 1.0 / o.r) * (1.0 + 1.0 / o.r);
  }
  return o;
}

AgingCurve flat_curve(double value, double se) {
  AgingCurve c;
  c.grid = AgeGrid{};
  c.mean.assign(19, value);
  c.se.assign(19, se);
  return c;
}

}  // namespace

TEST_CASE("hand example (1,2,3) with constant within variance 0.5") {
  std::vector<double> q{1.0, 2.0, 3.0};
  std::vector<double> u{0.5, 0.5, 0.5};
  PooledEstimate e = rubin_pool(q, u, 0.95);
  CHECK(e.q_bar == doctest::Approx(2.0).epsilon(1e-14));
  CHECK(e.u_bar == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(e.b == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(e.t_var == doctest::Approx(0.5 + 4.0 / 3.0).epsilon(1e-14));
  CHECK(e.r == doctest::Approx(8.0 / 3.0).epsilon(1e-14));
  CHECK(e.nu == doctest::Approx(3.78125).epsilon(1e-14));
  CHECK(e.ci_low <= e.q_bar);
  CHECK(e.ci_high >= e.q_bar);
}

TEST_CASE("zero between-variance uses the normal quantile") {
  std::vector<double> q(5, 1.0);
  std::vector<double> u(5, 0.1);
  PooledEstimate e = rubin_pool(q, u, 0.95);
  CHECK(e.q_bar == 1.0);
  CHECK(e.b == 0.0);
  CHECK(e.t_var == doctest::Approx(0.1).epsilon(1e-14));
  CHECK(std::isinf(e.nu));
  // z_{0.975} * sqrt(0.1)
  CHECK(e.ci_high - e.q_bar == doctest::Approx(1.959963985 * std::sqrt(0.1)).epsilon(1e-8));
}

TEST_CASE("zero within-variance with spread estimates") {
  std::vector<double> q{1.0, 2.0, 4.0};
  std::vector<double> u{0.0, 0.0, 0.0};
  PooledEstimate e = rubin_pool(q, u, 0.95);
  CHECK(std::isinf(e.r));
  CHECK(e.nu == 2.0);
  CHECK(e.t_var == doctest::Approx((4.0 / 3.0) * e.b).epsilon(1e-14));
}

TEST_CASE("matches the oracle on 1000 random instances to 1e-12") {
  RngStream rng(314, 0);
  double worst = 0.0;
  for (int trial = 0; trial < 1000; ++trial) {
    const int m = 2 + static_cast<int>(rng.uniform01() * 9);
    std::vector<double> q, u;
    for (int i = 0; i < m; ++i) {
      q.push_back(rng.normal(0.0, 10.0));
      u.push_back(rng.uniform01() * 4.0);
    }
    PooledEstimate e = rubin_pool(q, u, 0.95);
    OracleOut o = pool_oracle(q, u);
    worst = std::max(worst, std::abs(e.q_bar - o.q_bar));
    worst = std::max(worst, std::abs(e.u_bar - o.u_bar));
    worst = std::max(worst, std::abs(e.b - o.b));
    worst = std::max(worst, std::abs(e.t_var - o.t));
    worst = std::max(worst, std::abs(e.r - o.r));
    worst = std::max(worst, std::abs(e.nu - o.nu));
  }
  CHECK(worst < 1e-12);
}

TEST_CASE("affine equivariance: scaling estimates scales the interval") {
  std::vector<double> q{0.4, 0.7, 0.55, 0.61};
  std::vector<double> u{0.01, 0.02, 0.015, 0.012};
  const double c = 3.7;
  std::vector<double> qc, uc;
  for (double v : q) qc.push_back(c * v);
  for (double v : u) uc.push_back(c * c * v);
  PooledEstimate base = rubin_pool(q, u, 0.95);
  PooledEstimate scaled = rubin_pool(qc, uc, 0.95);
  CHECK(scaled.q_bar == doctest::Approx(c * base.q_bar).epsilon(1e-12));
  CHECK(std::sqrt(scaled.t_var) == doctest::Approx(c * std::sqrt(base.t_var)).epsilon(1e-12));
  CHECK(scaled.r == doctest::Approx(base.r).epsilon(1e-12));
  CHECK(scaled.nu == doctest::Approx(base.nu).epsilon(1e-12));
}

TEST_CASE("permutation invariance over the imputation index") {
  std::vector<double> q{0.4, 0.7, 0.55, 0.61, 0.52};
  std::vector<double> u{0.01, 0.02, 0.015, 0.012, 0.018};
  PooledEstimate a = rubin_pool(q, u, 0.9);
  std::vector<double> q2{q[3], q[0], q[4], q[1], q[2]};
  std::vector<double> u2{u[3], u[0], u[4], u[1], u[2]};
  PooledEstimate b = rubin_pool(q2, u2, 0.9);
  CHECK(a.q_bar == doctest::Approx(b.q_bar).epsilon(1e-14));
  CHECK(a.t_var == doctest::Approx(b.t_var).epsilon(1e-14));
  CHECK(a.nu == doctest::Approx(b.nu).epsilon(1e-14));
}

TEST_CASE("nu shrinks as the between-variance grows") {
  std::vector<double> u{0.5, 0.5, 0.5};
  PooledEstimate small_b = rubin_pool(std::vector<double>{1.0, 1.1, 0.9}, u, 0.95);
  PooledEstimate large_b = rubin_pool(std::vector<double>{0.0, 2.0, 1.0}, u, 0.95);
  CHECK(large_b.b > small_b.b);
  CHECK(large_b.nu < small_b.nu);
}

TEST_CASE("rubin_pool rejects undersized and invalid input") {
  CHECK_THROWS_AS(rubin_pool(std::vector<double>{1.0}, std::vector<double>{0.1}, 0.95),
                  std::invalid_argument);
  CHECK_THROWS_AS(
      rubin_pool(std::vector<double>{1.0, 2.0}, std::vector<double>{0.1, -0.1}, 0.95),
      std::invalid_argument);
}

TEST_CASE("pooling identical curves returns them with B = 0") {
  std::vector<AgingCurve> curves(4, flat_curve(0.7, 0.05));
  for (size_t a = 0; a < curves[0].mean.size(); ++a) {
    curves[0].mean[a] = 0.7 - 0.001 * static_cast<double>(a);
    for (size_t i = 1; i < curves.size(); ++i) curves[i].mean[a] = curves[0].mean[a];
  }
  PooledCurve pooled = pool_curve(curves, 0.95);
  for (size_t a = 0; a < pooled.estimate.size(); ++a) {
    CHECK(pooled.estimate[a] == doctest::Approx(curves[0].mean[a]).epsilon(1e-14));
    CHECK(pooled.se[a] == doctest::Approx(0.05).epsilon(1e-12));
  }
}

TEST_CASE("pooled curve stays inside the per-imputation envelope and widens the CI") {
  RngStream rng(11, 2);
  std::vector<AgingCurve> curves;
  for (int i = 0; i < 5; ++i) {
    AgingCurve c = flat_curve(0.0, 0.0);
    for (size_t a = 0; a < c.mean.size(); ++a) {
      c.mean[a] = 0.7 - 0.002 * static_cast<double>(a) + 0.01 * rng.normal();
      c.se[a] = 0.02 + 0.005 * rng.uniform01();
    }
    curves.push_back(std::move(c));
  }
  PooledCurve pooled = pool_curve(curves, 0.95);
  for (size_t a = 0; a < pooled.estimate.size(); ++a) {
    double lo = curves[0].mean[a], hi = curves[0].mean[a], u_bar = 0.0;
    for (const auto& c : curves) {
      lo = std::min(lo, c.mean[a]);
      hi = std::max(hi, c.mean[a]);
      u_bar += c.se[a] * c.se[a] / curves.size();
    }
    CHECK(pooled.estimate[a] >= lo);
    CHECK(pooled.estimate[a] <= hi);
    // T >= U_bar: pooled half-width dominates the within-only half-width at
    // the same quantile
    CHECK(pooled.se[a] * pooled.se[a] >= u_bar - 1e-15);
  }

  AgingCurve mismatched = flat_curve(0.5, 0.01);
  mismatched.grid = AgeGrid{20, 38};
  std::vector<AgingCurve> bad{curves[0], mismatched};
  CHECK_THROWS_AS(pool_curve(bad, 0.95), std::invalid_argument);
}
