#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <filesystem>

#include "agecurve/lmm.hpp"
#include "agecurve/rng.hpp"
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

}  // namespace

TEST_CASE("cubic basis is centered at age 30") {
  Eigen::Vector4d at_center = cubic_age_basis(30.0);
  CHECK(at_center(0) == 1.0);
  CHECK(at_center(1) == 0.0);
  CHECK(at_center(2) == 0.0);
  CHECK(at_center(3) == 0.0);
  Eigen::Vector4d at_40 = cubic_age_basis(40.0);
  CHECK(at_40(1) == doctest::Approx(1.0));
  CHECK(at_40(3) == doctest::Approx(1.0));
}

TEST_CASE("predict_mean trivial fits") {
  LmmFit flat = make_fit(0.7, 0.0, 0.0, 0.0, 0.0, 1.0);
  for (int age = 21; age <= 39; ++age) CHECK(predict_mean(flat, age) == 0.7);

  LmmFit slope = make_fit(0.0, 1.0, 0.0, 0.0, 0.0, 1.0);
  CHECK(predict_mean(slope, 30) == 0.0);
  CHECK(predict_mean(slope, 40) == doctest::Approx(1.0));
}

TEST_CASE("GLS with tau2 = 0 equals the direct OLS solve") {
  AgeGrid grid;
  RngStream rng(11, 3);
  CareerPanel panel({"a", "b", "c", "d"}, grid);
  for (int p = 0; p < 4; ++p) {
    for (int a = 0; a < grid.size(); ++a) {
      panel.set_observed(p, a, 0.6 + 0.1 * rng.normal());
    }
  }
  Eigen::Vector4d via_gls = gls_beta(panel, 0.0, 0.37);

  // dense normal equations over every observed cell
  Eigen::Matrix4d xtx = Eigen::Matrix4d::Zero();
  Eigen::Vector4d xty = Eigen::Vector4d::Zero();
  for (int p = 0; p < 4; ++p) {
    for (int a = 0; a < grid.size(); ++a) {
      Eigen::Vector4d x = cubic_age_basis(grid.age_at(a));
      xtx += x * x.transpose();
      xty += x * panel.value(p, a);
    }
  }
  Eigen::Vector4d via_ols = xtx.fullPivLu().solve(xty);
  for (int i = 0; i < 4; ++i) CHECK(via_gls(i) == doctest::Approx(via_ols(i)).epsilon(1e-10));
}

TEST_CASE("tau2 = 0 generating process is recovered near the boundary") {
  LmmFit truth = make_fit(0.72, -0.05, -0.12, -0.03, 0.0, 0.01);
  CareerPanel panel = simulate_careers(truth, 200, AgeGrid{}, SeededRng{991, 0});
  // EM slows down at the variance boundary; give it room to finish
  LmmFit fit = fit_lmm(panel, 2000);
  CHECK(fit.converged);
  CHECK(fit.tau2 < 0.002);
}

TEST_CASE("generate-and-refit recovers all parameters within 10% or 3 oracle SEs") {
  const double tau2 = 0.012, sigma2 = 0.01;
  LmmFit truth = make_fit(0.74, -0.054, -0.12, -0.03, tau2, sigma2);
  const int n_players = 1000;
  AgeGrid grid;
  CareerPanel panel = simulate_careers(truth, n_players, grid, SeededRng{1234, 0});
  LmmFit fit = fit_lmm(panel);
  CHECK(fit.converged);

  // oracle covariance of beta-hat at the true variance components:
  // (P * X' V^{-1} X)^{-1} for the balanced design
  const int n_ages = grid.size();
  Eigen::MatrixXd x(n_ages, 4);
  for (int a = 0; a < n_ages; ++a) x.row(a) = cubic_age_basis(grid.age_at(a)).transpose();
  Eigen::MatrixXd v = sigma2 * Eigen::MatrixXd::Identity(n_ages, n_ages) +
                      tau2 * Eigen::MatrixXd::Ones(n_ages, n_ages);
  Eigen::Matrix4d info = x.transpose() * v.ldlt().solve(x) * n_players;
  Eigen::Matrix4d beta_cov = info.inverse();

  for (int i = 0; i < 4; ++i) {
    const double tol = std::max(0.10 * std::abs(truth.beta(i)), 3.0 * std::sqrt(beta_cov(i, i)));
    INFO("beta", i, " fit=", fit.beta(i), " truth=", truth.beta(i));
    CHECK(std::abs(fit.beta(i) - truth.beta(i)) < tol);
  }

  // classical balanced one-way asymptotics for the variance components
  const double n = n_ages;
  const double se_sigma2 = std::sqrt(2.0 * sigma2 * sigma2 / (n_players * (n - 1.0)));
  const double lambda = tau2 + sigma2 / n;
  const double se_tau2 = std::sqrt(2.0 * lambda * lambda / n_players +
                                   2.0 * sigma2 * sigma2 / (n_players * n * n * (n - 1.0)));
  CHECK(std::abs(fit.sigma2 - sigma2) < std::max(0.10 * sigma2, 3.0 * se_sigma2));
  CHECK(std::abs(fit.tau2 - tau2) < std::max(0.10 * tau2, 3.0 * se_tau2));
}

TEST_CASE("EM log-likelihood is monotone at every iteration") {
  LmmFit truth = make_fit(0.70, -0.04, -0.10, -0.02, 0.02, 0.01);
  CareerPanel panel = simulate_careers(truth, 60, AgeGrid{}, SeededRng{55, 0});
  // unbalanced panel: hide a block of cells so the E-step has to work
  CareerPanel ragged = panel;
  for (int p = 0; p < 30; ++p) {
    for (int a = 10; a < 19; ++a) ragged.set_missing(p, a);
  }
  LmmFit fit = fit_lmm(ragged);
  REQUIRE(fit.loglik_path.size() >= 2);
  for (size_t i = 1; i < fit.loglik_path.size(); ++i) {
    CHECK(fit.loglik_path[i] >= fit.loglik_path[i - 1] - 1e-9 * std::abs(fit.loglik_path[i - 1]));
  }
  CHECK(std::isfinite(fit.loglik));
}

TEST_CASE("identical careers collapse tau2 to the flagged boundary") {
  AgeGrid grid;
  CareerPanel panel({"a", "b", "c", "d"}, grid);
  for (int p = 0; p < 4; ++p) {
    for (int a = 0; a < grid.size(); ++a) {
      const double x = (grid.age_at(a) - 30.0) / 10.0;
      panel.set_observed(p, a, 0.7 - 0.05 * x - 0.1 * x * x);
    }
  }
  LmmFit fit = fit_lmm(panel);
  CHECK(fit.tau2 == 0.0);
  CHECK(fit.tau2_boundary);
}

TEST_CASE("degenerate panels are rejected") {
  CareerPanel single({"only"}, AgeGrid{});
  for (int a = 0; a < 19; ++a) single.set_observed(0, a, 0.5 + 0.01 * a);
  CHECK_THROWS_AS(fit_lmm(single), std::invalid_argument);

  CareerPanel sparse({"a", "b"}, AgeGrid{});
  sparse.set_observed(0, 0, 0.5);
  sparse.set_observed(1, 1, 0.6);
  CHECK_THROWS_AS(fit_lmm(sparse), std::invalid_argument);
}

TEST_CASE("fit is invariant under player reordering") {
  LmmFit truth = make_fit(0.70, -0.04, -0.10, -0.02, 0.02, 0.01);
  CareerPanel panel = simulate_careers(truth, 40, AgeGrid{}, SeededRng{77, 0});
  LmmFit a = fit_lmm(panel);

  std::vector<std::string> reversed(panel.players().rbegin(), panel.players().rend());
  CareerPanel flipped(reversed, panel.grid());
  for (int p = 0; p < panel.n_players(); ++p) {
    for (int idx = 0; idx < panel.grid().size(); ++idx) {
      flipped.set_observed(panel.n_players() - 1 - p, idx, panel.value(p, idx));
    }
  }
  LmmFit b = fit_lmm(flipped);
  for (int i = 0; i < 4; ++i) CHECK(a.beta(i) == doctest::Approx(b.beta(i)).epsilon(1e-10));
  CHECK(a.tau2 == doctest::Approx(b.tau2).epsilon(1e-10));
  CHECK(a.sigma2 == doctest::Approx(b.sigma2).epsilon(1e-10));
}

TEST_CASE("fit file round-trips") {
  LmmFit fit = make_fit(0.712345678901234, -0.0567, -0.123, -0.031, 0.0123, 0.0098);
  fit.loglik = 1234.5678;
  const auto path = std::filesystem::temp_directory_path() / "agecurve_fit_roundtrip.txt";
  write_lmm_fit(fit, path);
  LmmFit back = read_lmm_fit(path);
  for (int i = 0; i < 4; ++i) CHECK(back.beta(i) == fit.beta(i));
  CHECK(back.tau2 == fit.tau2);
  CHECK(back.sigma2 == fit.sigma2);
  CHECK(back.loglik == fit.loglik);
  CHECK(back.converged == fit.converged);
  CHECK(back.age_center == fit.age_center);
  CHECK(back.age_scale == fit.age_scale);
  std::filesystem::remove(path);
}
