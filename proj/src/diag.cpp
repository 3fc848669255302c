#include "agecurve/diag.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace agecurve {

double sample_quantile(std::span<const double> values, double p) {
  if (values.empty()) throw std::invalid_argument("sample_quantile: empty input");
  if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("sample_quantile: p outside [0,1]");
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  const double h = (static_cast<double>(sorted.size()) - 1.0) * p;
  const size_t lo = static_cast<size_t>(std::floor(h));
  const size_t hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (h - std::floor(h)) * (sorted[hi] - sorted[lo]);
}

double silverman_bandwidth(std::span<const double> values) {
  const size_t n = values.size();
  if (n < 2) throw std::invalid_argument("silverman_bandwidth: need >= 2 values");
  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= static_cast<double>(n);
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  const double sd = std::sqrt(ss / static_cast<double>(n - 1));
  if (sd == 0.0) {
    throw std::invalid_argument("silverman_bandwidth: all values identical (zero bandwidth)");
  }
  const double iqr = sample_quantile(values, 0.75) - sample_quantile(values, 0.25);
  double spread = std::min(sd, iqr / 1.34);
  if (spread == 0.0) spread = sd;
  return 0.9 * spread * std::pow(static_cast<double>(n), -0.2);
}

DensityEstimate kde(std::span<const double> values, std::span<const double> grid) {
  DensityEstimate est;
  est.bandwidth = silverman_bandwidth(values);
  if (grid.empty()) {
    const auto [lo_it, hi_it] = std::minmax_element(values.begin(), values.end());
    const double lo = *lo_it - 3.0 * est.bandwidth;
    const double hi = *hi_it + 3.0 * est.bandwidth;
    est.grid.resize(512);
    for (size_t i = 0; i < est.grid.size(); ++i) {
      est.grid[i] = lo + (hi - lo) * static_cast<double>(i) / 511.0;
    }
  } else {
    est.grid.assign(grid.begin(), grid.end());
  }
  const double norm = 1.0 / (static_cast<double>(values.size()) * est.bandwidth *
                             std::sqrt(2.0 * M_PI));
  est.density.resize(est.grid.size());
  for (size_t i = 0; i < est.grid.size(); ++i) {
    double acc = 0.0;
    for (double v : values) {
      const double z = (est.grid[i] - v) / est.bandwidth;
      acc += std::exp(-0.5 * z * z);
    }
    est.density[i] = acc * norm;
  }
  return est;
}

namespace {

// between-chain variance of the per-chain means over the last-k window,
// relative to the variance of all values pooled
double mixing_score(const std::vector<std::vector<double>>& per_chain) {
  std::vector<double> chain_means;
  std::vector<double> all;
  for (const auto& chain : per_chain) {
    double s = 0.0;
    for (double v : chain) s += v;
    chain_means.push_back(s / static_cast<double>(chain.size()));
    all.insert(all.end(), chain.begin(), chain.end());
  }
  auto variance = [](const std::vector<double>& xs) {
    if (xs.size() < 2) return 0.0;
    double mean = 0.0;
    for (double v : xs) mean += v;
    mean /= static_cast<double>(xs.size());
    double ss = 0.0;
    for (double v : xs) ss += (v - mean) * (v - mean);
    return ss / static_cast<double>(xs.size() - 1);
  };
  const double total = variance(all);
  if (total == 0.0) return 0.0;
  return variance(chain_means) / total;
}

}  // namespace

TraceStats trace_stats(const ImputationRun& run) {
  if (run.traces.empty()) throw std::invalid_argument("trace_stats: empty run");
  TraceStats stats;
  stats.rows = run.traces;

  const int window = std::min(10, run.config.n_iter);
  std::vector<std::vector<double>> means(static_cast<size_t>(run.config.m));
  std::vector<std::vector<double>> sds(static_cast<size_t>(run.config.m));
  for (const TraceRow& row : run.traces) {
    if (row.iteration > run.config.n_iter - window) {
      means[static_cast<size_t>(row.chain - 1)].push_back(row.imputed_mean);
      sds[static_cast<size_t>(row.chain - 1)].push_back(row.imputed_sd);
    }
  }
  stats.mean_mixing = mixing_score(means);
  stats.sd_mixing = mixing_score(sds);
  return stats;
}

double ks_distance(std::span<const double> a, std::span<const double> b) {
  if (a.empty() || b.empty()) throw std::invalid_argument("ks_distance: empty sample");
  std::vector<double> sa(a.begin(), a.end());
  std::vector<double> sb(b.begin(), b.end());
  std::sort(sa.begin(), sa.end());
  std::sort(sb.begin(), sb.end());
  double d = 0.0;
  size_t i = 0, j = 0;
  while (i < sa.size() && j < sb.size()) {
    const double v = std::min(sa[i], sb[j]);
    while (i < sa.size() && sa[i] == v) ++i;
    while (j < sb.size() && sb[j] == v) ++j;
    const double fa = static_cast<double>(i) / static_cast<double>(sa.size());
    const double fb = static_cast<double>(j) / static_cast<double>(sb.size());
    d = std::max(d, std::abs(fa - fb));
  }
  return d;
}

}  // namespace agecurve
