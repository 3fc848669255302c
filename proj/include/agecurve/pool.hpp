// Rubin's combining rules for multiply imputed estimates and the pointwise
// pooling of per-imputation aging curves into a t-based confidence band.
#pragma once

#include <span>
#include <vector>

#include "agecurve/curve.hpp"

namespace agecurve {

struct PooledEstimate {
  double q_bar = 0.0;   // pooled point estimate
  double u_bar = 0.0;   // mean within-imputation variance
  double b = 0.0;       // between-imputation variance (divisor m-1)
  double t_var = 0.0;   // total variance U_bar + (1 + 1/m) B
  double r = 0.0;       // relative increase in variance due to missingness
  double nu = 0.0;      // degrees of freedom; +inf when B = 0
  double ci_low = 0.0;
  double ci_high = 0.0;
  double level = 0.95;
};

// q_hats/u_hats are the m per-imputation estimates and their sampling
// variances. Requires m >= 2 and u_hats >= 0.
PooledEstimate rubin_pool(std::span<const double> q_hats, std::span<const double> u_hats,
                          double level = 0.95);

struct PooledCurve {
  AgeGrid grid;
  std::vector<double> estimate;
  std::vector<double> se;  // sqrt(T)
  std::vector<double> ci_low;
  std::vector<double> ci_high;
  CurveUnits units = CurveUnits::kTransformed;
  double level = 0.95;
};

// Applies rubin_pool at each age with Q_i the i-th curve's loess mean and
// U_i its squared pointwise standard error. All curves must share the grid
// and carry standard errors.
PooledCurve pool_curve(const std::vector<AgingCurve>& curves, double level = 0.95);

PooledCurve pooled_curve_to_ops_units(const PooledCurve& curve, const TransformSpec& spec);
AgingCurve pooled_curve_mean(const PooledCurve& curve);

// CSV `age,estimate,se,ci_low,ci_high`.
void write_pooled_curve_csv(const PooledCurve& curve, const std::filesystem::path& path);

}  // namespace agecurve
