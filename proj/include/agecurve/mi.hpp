// Multiple imputation of missing panel cells with a Gibbs sampler for the
// two-level normal model with heterogeneous within-group variance:
//   y_pq = x_q' beta + b_p + e_pq,  b_p ~ N(0, tau2),  e_pq ~ N(0, sigma2_p)
// x_q is the centered cubic age basis. Each of the m chains runs
// independently on its own stream; iteration draws follow the fixed order
// beta, {b_p}, {sigma2_p}, tau2, missing y. Conditionals use observed cells
// only; the value retained after the final iteration is the imputation.
#pragma once

#include <Eigen/Core>
#include <string>
#include <vector>

#include "agecurve/core.hpp"
#include "agecurve/rng.hpp"

namespace agecurve {

struct MiConfig {
  int m = 5;        // number of imputations
  int n_iter = 30;  // Gibbs iterations per chain
  uint64_t seed = 0;

  void validate() const;
};

struct TraceRow {
  int chain = 0;      // 1-based
  int iteration = 0;  // 1-based
  double imputed_mean = 0.0;
  double imputed_sd = 0.0;
};

struct ImputationRun {
  std::vector<CareerPanel> completed;  // m panels, no missing cells
  std::vector<TraceRow> traces;        // m * n_iter rows, chain-major
  MiConfig config;
  std::vector<std::string> warnings;
};

// Weakly-informative scaled inverse-chi-square prior shared by tau2 and every
// sigma2_p; beta is flat. The scale defaults to the residual variance of a
// random-intercept fit to the observed cells.
struct GibbsPrior {
  double nu0 = 1.0;
  double s0_sq = 0.01;
};

struct ChainState {
  Eigen::Vector4d beta = Eigen::Vector4d::Zero();
  std::vector<double> b;       // per panel player
  std::vector<double> sigma2;  // per panel player
  double tau2 = 0.0;
  std::vector<double> missing_values;  // aligned with missing cells, player-major
};

// OLS-based start: beta from observed cells, b = 0, sigma2_p = pooled OLS
// residual variance, tau2 = variance of per-player mean residuals, missing
// cells filled from N(x'beta, sigma2). Throws on a singular OLS system.
ChainState initialize_chain(const CareerPanel& panel, SeededRng key);

// One full chain; returns the completed panel. Identical keys reproduce
// identical panels. Per-player draws consume substreams keyed by player id,
// so player order never changes the imputed values.
CareerPanel run_chain(const CareerPanel& panel, const GibbsPrior& prior, int n_iter,
                      SeededRng key, std::vector<TraceRow>* traces = nullptr, int chain_id = 1);

// Requires >= 1 missing cell and >= 2 players with >= 2 observed cells each.
// Players with fewer than 2 observed cells draw sigma2_p from the pooled
// conditional, recorded in warnings. Chains may run concurrently; results do
// not depend on n_threads.
ImputationRun impute(const CareerPanel& panel, const MiConfig& config, int n_threads = 1);

void write_traces_csv(const std::vector<TraceRow>& traces, const std::filesystem::path& path);

}  // namespace agecurve
