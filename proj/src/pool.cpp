#include "agecurve/pool.hpp"

#include <boost/math/distributions/normal.hpp>
#include <boost/math/distributions/students_t.hpp>
#include <cmath>
#include <fstream>
#include <limits>
#include <stdexcept>

#include "agecurve/csv.hpp"

namespace agecurve {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();

double upper_quantile(double nu, double level) {
  const double p = 1.0 - 0.5 * (1.0 - level);
  if (std::isinf(nu)) {
    return boost::math::quantile(boost::math::normal_distribution<double>(), p);
  }
  return boost::math::quantile(boost::math::students_t_distribution<double>(nu), p);
}
}  // namespace

PooledEstimate rubin_pool(std::span<const double> q_hats, std::span<const double> u_hats,
                          double level) {
  const size_t m = q_hats.size();
  if (m < 2) throw std::invalid_argument("rubin_pool: need m >= 2 imputations");
  if (u_hats.size() != m) throw std::invalid_argument("rubin_pool: q/u size mismatch");
  if (!(level > 0.0 && level < 1.0)) throw std::invalid_argument("rubin_pool: level in (0,1)");
  for (double u : u_hats) {
    if (!(u >= 0.0)) throw std::invalid_argument("rubin_pool: within variances must be >= 0");
  }

  PooledEstimate e;
  e.level = level;
  for (double q : q_hats) e.q_bar += q;
  e.q_bar /= static_cast<double>(m);
  for (double u : u_hats) e.u_bar += u;
  e.u_bar /= static_cast<double>(m);
  for (double q : q_hats) e.b += (q - e.q_bar) * (q - e.q_bar);
  e.b /= static_cast<double>(m - 1);

  const double m_factor = 1.0 + 1.0 / static_cast<double>(m);
  e.t_var = e.u_bar + m_factor * e.b;

  if (e.b == 0.0) {
    e.r = 0.0;
    e.nu = kInf;
  } else if (e.u_bar == 0.0) {
    e.r = kInf;
    e.nu = static_cast<double>(m - 1);
  } else {
    e.r = m_factor * e.b / e.u_bar;
    const double f = 1.0 + 1.0 / e.r;
    e.nu = static_cast<double>(m - 1) * f * f;
  }

  const double half = upper_quantile(e.nu, level) * std::sqrt(e.t_var);
  e.ci_low = e.q_bar - half;
  e.ci_high = e.q_bar + half;
  return e;
}

PooledCurve pool_curve(const std::vector<AgingCurve>& curves, double level) {
  if (curves.size() < 2) throw std::invalid_argument("pool_curve: need m >= 2 curves");
  const AgeGrid grid = curves.front().grid;
  const CurveUnits units = curves.front().units;
  for (const auto& c : curves) {
    if (!(c.grid == grid)) throw std::invalid_argument("pool_curve: grid mismatch");
    if (c.units != units) throw std::invalid_argument("pool_curve: unit mismatch");
    if (c.se.size() != c.mean.size()) {
      throw std::invalid_argument("pool_curve: curves must carry pointwise standard errors");
    }
  }
  PooledCurve out;
  out.grid = grid;
  out.units = units;
  out.level = level;
  const size_t n_ages = curves.front().mean.size();
  std::vector<double> qs(curves.size()), us(curves.size());
  for (size_t a = 0; a < n_ages; ++a) {
    for (size_t i = 0; i < curves.size(); ++i) {
      qs[i] = curves[i].mean[a];
      us[i] = curves[i].se[a] * curves[i].se[a];
    }
    PooledEstimate e = rubin_pool(qs, us, level);
    out.estimate.push_back(e.q_bar);
    out.se.push_back(std::sqrt(e.t_var));
    out.ci_low.push_back(e.ci_low);
    out.ci_high.push_back(e.ci_high);
  }
  return out;
}

PooledCurve pooled_curve_to_ops_units(const PooledCurve& curve, const TransformSpec& spec) {
  if (curve.units == CurveUnits::kOps) return curve;
  PooledCurve out;
  out.grid = curve.grid;
  out.units = CurveUnits::kOps;
  out.level = curve.level;
  for (size_t i = 0; i < curve.estimate.size(); ++i) {
    // estimates and endpoints clamp into the transform range for display
    const double y = std::clamp(curve.estimate[i], 0.0, kHalfPi);
    out.estimate.push_back(inverse_transform_ops(y, spec));
    const double deriv = (spec.scale_max - spec.scale_min) * std::sin(2.0 * y);
    out.se.push_back(curve.se[i] * std::abs(deriv));
    out.ci_low.push_back(inverse_transform_ops(std::clamp(curve.ci_low[i], 0.0, kHalfPi), spec));
    out.ci_high.push_back(inverse_transform_ops(std::clamp(curve.ci_high[i], 0.0, kHalfPi), spec));
  }
  return out;
}

AgingCurve pooled_curve_mean(const PooledCurve& curve) {
  AgingCurve out;
  out.grid = curve.grid;
  out.mean = curve.estimate;
  out.se = curve.se;
  out.units = curve.units;
  return out;
}

void write_pooled_curve_csv(const PooledCurve& curve, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for writing: " + path.string());
  out << "age,estimate,se,ci_low,ci_high\n";
  for (size_t i = 0; i < curve.estimate.size(); ++i) {
    out << curve.grid.age_at(static_cast<int>(i)) << ',' << csv::format_double(curve.estimate[i])
        << ',' << csv::format_double(curve.se[i]) << ',' << csv::format_double(curve.ci_low[i])
        << ',' << csv::format_double(curve.ci_high[i]) << '\n';
  }
}

}  // namespace agecurve
