// Loess aging curves: locally weighted polynomial regression with tricube
// neighborhood weights, pointwise standard errors from the linear-smoother
// hat vector, and MAE comparison between curves on a shared grid.
#pragma once

#include <span>
#include <vector>

#include "agecurve/core.hpp"

namespace agecurve {

struct LoessSpec {
  double span = 0.75;
  int degree = 2;  // 1 or 2

  void validate() const;
};

struct LoessFit {
  std::vector<double> fitted;
  std::vector<double> se;
  // residual variance estimate: RSS / (n - tr(L))
  double sigma2 = 0.0;
  // count of evaluation points where a singular local system forced the
  // polynomial degree down
  int degree_reductions = 0;
};

// Local WLS of the requested degree over the ceil(span*n) nearest points with
// tricube weights w = (1 - (d/d_max)^3)^3; ties with the window-boundary
// distance are included. Requires >= degree+2 distinct x values.
LoessFit fit_loess(std::span<const double> x, std::span<const double> y,
                   const LoessSpec& spec, std::span<const double> eval_grid);

enum class CurveUnits { kTransformed, kOps };

struct AgingCurve {
  AgeGrid grid;
  std::vector<double> mean;
  std::vector<double> se;  // empty when not computed
  CurveUnits units = CurveUnits::kTransformed;
};

enum class CellUse { kObservedOnly, kAll };

// Pools eligible (age, value) cells across players and smooths them with
// loess, evaluated on the integer age grid. Errors if any grid age has zero
// eligible cells.
AgingCurve panel_to_curve(const CareerPanel& panel, const LoessSpec& spec, CellUse use);

// Mean absolute difference over the shared grid; grids and units must match.
double curve_mae(const AgingCurve& a, const AgingCurve& b);

// Re-expresses a transformed-scale curve in OPS units (delta-method se).
AgingCurve curve_to_ops_units(const AgingCurve& curve, const TransformSpec& spec);

void write_curve_csv(const AgingCurve& curve, const std::filesystem::path& path);
AgingCurve read_curve_csv(const std::filesystem::path& path);

}  // namespace agecurve
