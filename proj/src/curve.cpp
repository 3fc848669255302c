#include "agecurve/curve.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <stdexcept>

#include "agecurve/csv.hpp"

namespace agecurve {

namespace {

double cube(double v) { return v * v * v; }

// Replicated x values collapse into one group carrying sufficient statistics.
struct Group {
  double x = 0.0;
  double n = 0.0;
  double sum_y = 0.0;
  double sum_y2 = 0.0;
};

std::vector<Group> group_points(std::span<const double> x, std::span<const double> y) {
  std::vector<int> order(x.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) { return x[a] < x[b]; });
  std::vector<Group> groups;
  for (int i : order) {
    if (groups.empty() || groups.back().x != x[i]) {
      groups.push_back({x[i], 0.0, 0.0, 0.0});
    }
    Group& g = groups.back();
    g.n += 1.0;
    g.sum_y += y[i];
    g.sum_y2 += y[i] * y[i];
  }
  return groups;
}

struct LocalFit {
  double fitted = 0.0;
  double hat_norm2 = 0.0;  // ||l(x0)||^2 of the smoother weights
  double a00 = 0.0;        // e0' A^{-1} e0; hat diagonal when x0 is a data point
  bool reduced = false;
};

LocalFit local_fit(const std::vector<Group>& groups, double x0, int k, int degree) {
  // k-th nearest neighbor distance, counting replicate multiplicity; all
  // groups tied at that distance enter the window.
  std::vector<int> idx(groups.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(), [&](int a, int b) {
    return std::abs(groups[static_cast<size_t>(a)].x - x0) < std::abs(groups[static_cast<size_t>(b)].x - x0);
  });
  double d_max = 0.0;
  double count = 0.0;
  for (int gi : idx) {
    count += groups[static_cast<size_t>(gi)].n;
    d_max = std::abs(groups[static_cast<size_t>(gi)].x - x0);
    if (count >= static_cast<double>(k)) break;
  }

  struct WGroup {
    const Group* g;
    double w;
    double z;
  };
  std::vector<WGroup> window;
  for (int gi : idx) {
    const Group& g = groups[static_cast<size_t>(gi)];
    const double d = std::abs(g.x - x0);
    if (d > d_max) break;
    const double w = d_max > 0.0 ? cube(1.0 - cube(d / d_max)) : 1.0;
    if (w > 0.0) window.push_back({&g, w, g.x - x0});
  }

  LocalFit out;
  for (int deg = degree; deg >= 0; --deg) {
    const int p = deg + 1;
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(p, p);
    Eigen::VectorXd c = Eigen::VectorXd::Zero(p);
    for (const WGroup& wg : window) {
      Eigen::VectorXd row(p);
      double zp = 1.0;
      for (int j = 0; j < p; ++j) {
        row(j) = zp;
        zp *= wg.z;
      }
      a.noalias() += wg.g->n * wg.w * row * row.transpose();
      c.noalias() += wg.w * wg.g->sum_y * row;
    }
    Eigen::FullPivLU<Eigen::MatrixXd> lu(a);
    if (lu.rank() < p) {
      out.reduced = true;
      continue;
    }
    Eigen::VectorXd e0 = Eigen::VectorXd::Zero(p);
    e0(0) = 1.0;
    Eigen::VectorXd ainv_e0 = lu.solve(e0);
    out.fitted = ainv_e0.dot(c);
    out.a00 = ainv_e0(0);
    out.hat_norm2 = 0.0;
    for (const WGroup& wg : window) {
      double zp = 1.0;
      double dot = 0.0;
      for (int j = 0; j < p; ++j) {
        dot += ainv_e0(j) * zp;
        zp *= wg.z;
      }
      out.hat_norm2 += wg.g->n * wg.w * wg.w * dot * dot;
    }
    return out;
  }
  throw std::runtime_error("fit_loess: empty local window");
}

}  // namespace

void LoessSpec::validate() const {
  if (!(span > 0.0) || span > 1.0) {
    throw std::invalid_argument("LoessSpec: span must lie in (0, 1]");
  }
  if (degree != 1 && degree != 2) {
    throw std::invalid_argument("LoessSpec: degree must be 1 or 2");
  }
}

LoessFit fit_loess(std::span<const double> x, std::span<const double> y,
                   const LoessSpec& spec, std::span<const double> eval_grid) {
  spec.validate();
  if (x.size() != y.size()) {
    throw std::invalid_argument("fit_loess: x and y sizes differ");
  }
  const int n = static_cast<int>(x.size());
  for (double v : x) {
    if (!std::isfinite(v)) throw std::invalid_argument("fit_loess: non-finite x");
  }
  for (double v : y) {
    if (!std::isfinite(v)) throw std::invalid_argument("fit_loess: non-finite y");
  }
  auto groups = group_points(x, y);
  if (static_cast<int>(groups.size()) < spec.degree + 2) {
    throw std::invalid_argument("fit_loess: need at least degree+2 distinct x values");
  }
  const int k = static_cast<int>(std::ceil(spec.span * n));
  if (k < spec.degree + 1) {
    throw std::invalid_argument("fit_loess: span*n must cover at least degree+1 points");
  }

  // Residual variance from fits at the data locations: sigma2 = RSS / (n - tr(L)),
  // tr(L) = sum over groups of n_g * [A(x_g)^{-1}]_00 (own-point tricube weight is 1).
  double rss = 0.0;
  double trace = 0.0;
  for (const Group& g : groups) {
    LocalFit f = local_fit(groups, g.x, k, spec.degree);
    rss += g.sum_y2 - 2.0 * f.fitted * g.sum_y + g.n * f.fitted * f.fitted;
    trace += g.n * f.a00;
  }

  double df = static_cast<double>(n) - trace;
  if (df < 1.0) df = 1.0;
  const double sigma2 = std::max(rss, 0.0) / df;

  LoessFit fit;
  fit.sigma2 = sigma2;
  fit.fitted.reserve(eval_grid.size());
  fit.se.reserve(eval_grid.size());
  for (double x0 : eval_grid) {
    LocalFit f = local_fit(groups, x0, k, spec.degree);
    if (f.reduced) ++fit.degree_reductions;
    fit.fitted.push_back(f.fitted);
    fit.se.push_back(std::sqrt(sigma2 * f.hat_norm2));
  }
  return fit;
}

AgingCurve panel_to_curve(const CareerPanel& panel, const LoessSpec& spec, CellUse use) {
  std::vector<double> xs, ys;
  std::vector<int> per_age(static_cast<size_t>(panel.grid().size()), 0);
  for (int p = 0; p < panel.n_players(); ++p) {
    for (int a = 0; a < panel.grid().size(); ++a) {
      const bool eligible = use == CellUse::kAll ? std::isfinite(panel.value(p, a)) : panel.observed(p, a);
      if (!eligible) continue;
      xs.push_back(static_cast<double>(panel.grid().age_at(a)));
      ys.push_back(panel.value(p, a));
      ++per_age[static_cast<size_t>(a)];
    }
  }
  // interior gaps interpolate, but the grid extremes must be anchored by data
  for (int a : {0, panel.grid().size() - 1}) {
    if (per_age[static_cast<size_t>(a)] == 0) {
      throw std::runtime_error("panel_to_curve: no eligible cells at age " +
                               std::to_string(panel.grid().age_at(a)));
    }
  }
  std::vector<double> ages(static_cast<size_t>(panel.grid().size()));
  for (int a = 0; a < panel.grid().size(); ++a) {
    ages[static_cast<size_t>(a)] = static_cast<double>(panel.grid().age_at(a));
  }
  LoessFit fit = fit_loess(xs, ys, spec, ages);
  AgingCurve curve;
  curve.grid = panel.grid();
  curve.mean = std::move(fit.fitted);
  curve.se = std::move(fit.se);
  curve.units = CurveUnits::kTransformed;
  return curve;
}

double curve_mae(const AgingCurve& a, const AgingCurve& b) {
  if (!(a.grid == b.grid)) throw std::invalid_argument("curve_mae: grids differ");
  if (a.units != b.units) throw std::invalid_argument("curve_mae: units differ");
  if (a.mean.size() != b.mean.size()) throw std::invalid_argument("curve_mae: sizes differ");
  double acc = 0.0;
  for (size_t i = 0; i < a.mean.size(); ++i) acc += std::abs(a.mean[i] - b.mean[i]);
  return acc / static_cast<double>(a.mean.size());
}

AgingCurve curve_to_ops_units(const AgingCurve& curve, const TransformSpec& spec) {
  if (curve.units == CurveUnits::kOps) return curve;
  AgingCurve out;
  out.grid = curve.grid;
  out.units = CurveUnits::kOps;
  out.mean.reserve(curve.mean.size());
  // smoothed means can extrapolate slightly past the transform range; clamp
  // for the display scale
  for (double y : curve.mean) {
    out.mean.push_back(inverse_transform_ops(std::clamp(y, 0.0, kHalfPi), spec));
  }
  if (!curve.se.empty()) {
    out.se.reserve(curve.se.size());
    for (size_t i = 0; i < curve.se.size(); ++i) {
      const double y = std::clamp(curve.mean[i], 0.0, kHalfPi);
      const double deriv = (spec.scale_max - spec.scale_min) * std::sin(2.0 * y);
      out.se.push_back(curve.se[i] * std::abs(deriv));
    }
  }
  return out;
}

void write_curve_csv(const AgingCurve& curve, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for writing: " + path.string());
  const bool with_se = !curve.se.empty();
  out << (with_se ? "age,estimate,se\n" : "age,estimate\n");
  for (size_t i = 0; i < curve.mean.size(); ++i) {
    out << curve.grid.age_at(static_cast<int>(i)) << ',' << csv::format_double(curve.mean[i]);
    if (with_se) out << ',' << csv::format_double(curve.se[i]);
    out << '\n';
  }
}

AgingCurve read_curve_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open: " + path.string());
  csv::Table table(in);
  if (!table.has_column("age") || !table.has_column("estimate")) {
    throw std::runtime_error("curve CSV missing age/estimate columns");
  }
  AgingCurve curve;
  std::vector<int> ages;
  for (int r = 0; r < table.n_rows(); ++r) {
    auto age = csv::parse_int(table.cell(r, "age"));
    auto est = csv::parse_real(table.cell(r, "estimate"));
    if (!age || !est) throw std::runtime_error("curve CSV: malformed row");
    ages.push_back(static_cast<int>(*age));
    curve.mean.push_back(*est);
    if (table.has_column("se")) {
      auto se = csv::parse_real(table.cell(r, "se"));
      if (se) curve.se.push_back(*se);
    }
  }
  if (ages.size() < 2) throw std::runtime_error("curve CSV: too few rows");
  curve.grid = AgeGrid{ages.front(), ages.back()};
  curve.grid.validate();
  return curve;
}

}  // namespace agecurve
