// Imputation diagnostics: Gaussian kernel density estimates of observed vs
// imputed values, per-chain trace statistics with a scalar mixing score, and
// a two-sample Kolmogorov-Smirnov distance.
#pragma once

#include <span>
#include <vector>

#include "agecurve/mi.hpp"

namespace agecurve {

struct DensityEstimate {
  std::vector<double> grid;
  std::vector<double> density;
  double bandwidth = 0.0;
};

// Silverman's rule: 0.9 * min(sd, IQR/1.34) * n^{-1/5}; when the IQR term
// degenerates to zero the sd alone is used. Errors when all values are
// identical (zero bandwidth).
double silverman_bandwidth(std::span<const double> values);

// Gaussian KDE on the given grid, or on a 512-point grid spanning the data
// range +- 3 bandwidths when the grid is empty. Requires >= 2 distinct
// values.
DensityEstimate kde(std::span<const double> values, std::span<const double> grid = {});

// Fraction of the last-10-iteration variance attributable to between-chain
// spread; 0 when chains coincide, near 1 when they never mix.
struct TraceStats {
  std::vector<TraceRow> rows;
  double mean_mixing = 0.0;
  double sd_mixing = 0.0;
};

TraceStats trace_stats(const ImputationRun& run);

// sup |F_a - F_b| over the pooled sample points.
double ks_distance(std::span<const double> a, std::span<const double> b);

// Linear-interpolation (type 7) sample quantile.
double sample_quantile(std::span<const double> values, double p);

}  // namespace agecurve
