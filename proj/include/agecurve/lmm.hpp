// Maximum-likelihood fit of the cubic random-intercept model
//   y_pq = x_q' beta + b_p + eps_pq,  b_p ~ N(0, tau2),  eps_pq ~ N(0, sigma2)
// over the observed cells of a panel, via EM with closed-form conditional
// updates. The age covariate is centered and scaled before forming the
// polynomial basis; the scaling travels with the fit.
#pragma once

#include <Eigen/Core>
#include <filesystem>
#include <vector>

#include "agecurve/core.hpp"

namespace agecurve {

struct LmmFit {
  Eigen::Vector4d beta = Eigen::Vector4d::Zero();  // intercept, x, x^2, x^3
  double tau2 = 0.0;
  double sigma2 = 0.0;
  double loglik = 0.0;
  bool converged = false;
  bool tau2_boundary = false;  // tau2 update collapsed and was clamped to 0
  double age_center = 30.0;
  double age_scale = 10.0;
  int n_players = 0;
  int n_obs = 0;
  std::vector<double> loglik_path;  // per-iteration marginal log-likelihood
};

// (1, x, x^2, x^3) with x = (age - center) / scale.
Eigen::Vector4d cubic_age_basis(double age, double center = 30.0, double scale = 10.0);

double predict_mean(const LmmFit& fit, double age);

// One GLS step for beta at fixed variance components; exposed for testing
// against a direct OLS solve at tau2 = 0.
Eigen::Vector4d gls_beta(const CareerPanel& panel, double tau2, double sigma2,
                         double age_center = 30.0, double age_scale = 10.0);

// Requires >= 2 players and >= 5 observed cells. Iterates until the relative
// log-likelihood change drops below tol or max_iter is reached; the returned
// fit is flagged non-converged in the latter case.
LmmFit fit_lmm(const CareerPanel& panel, int max_iter = 500, double tol = 1e-8);

// Small key-value text file: beta0..beta3, tau2, sigma2, loglik, converged,
// center, scale.
void write_lmm_fit(const LmmFit& fit, const std::filesystem::path& path);
LmmFit read_lmm_fit(const std::filesystem::path& path);

}  // namespace agecurve
