#include "agecurve/lmm.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace agecurve {

namespace {

constexpr double kTau2Floor = 1e-12;
constexpr double kSigma2Floor = 1e-12;

// Per-player sufficient statistics for the observed cells.
struct PlayerData {
  Eigen::Matrix4d sxx = Eigen::Matrix4d::Zero();  // sum x x'
  Eigen::Vector4d sx = Eigen::Vector4d::Zero();   // sum x
  Eigen::Vector4d sxy = Eigen::Vector4d::Zero();  // sum x y
  double sy = 0.0;
  double syy = 0.0;
  double n = 0.0;
};

std::vector<PlayerData> collect(const CareerPanel& panel, double center, double scale) {
  // id-sorted accumulation keeps the fit bitwise invariant under reordering
  std::vector<int> order(static_cast<size_t>(panel.n_players()));
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](int a, int b) { return panel.player_id(a) < panel.player_id(b); });
  std::vector<PlayerData> players;
  players.reserve(static_cast<size_t>(panel.n_players()));
  for (int p : order) {
    PlayerData d;
    for (int a = 0; a < panel.grid().size(); ++a) {
      if (!panel.observed(p, a)) continue;
      const Eigen::Vector4d xb = cubic_age_basis(panel.grid().age_at(a), center, scale);
      const double y = panel.value(p, a);
      d.sxx.noalias() += xb * xb.transpose();
      d.sx += xb;
      d.sxy += xb * y;
      d.sy += y;
      d.syy += y * y;
      d.n += 1.0;
    }
    if (d.n > 0.0) players.push_back(std::move(d));
  }
  return players;
}

Eigen::Vector4d gls_step(const std::vector<PlayerData>& players, double tau2, double sigma2) {
  Eigen::Matrix4d a = Eigen::Matrix4d::Zero();
  Eigen::Vector4d rhs = Eigen::Vector4d::Zero();
  for (const PlayerData& d : players) {
    const double shrink = tau2 / (sigma2 + d.n * tau2);  // V^{-1} = (I - shrink*J)/sigma2
    a.noalias() += d.sxx - shrink * d.sx * d.sx.transpose();
    rhs.noalias() += d.sxy - shrink * d.sy * d.sx;
  }
  return a.ldlt().solve(rhs);
}

double marginal_loglik(const std::vector<PlayerData>& players, const Eigen::Vector4d& beta,
                       double tau2, double sigma2) {
  double ll = 0.0;
  for (const PlayerData& d : players) {
    const double ssr = d.syy - 2.0 * beta.dot(d.sxy) + beta.dot(d.sxx * beta);
    const double sr = d.sy - beta.dot(d.sx);
    const double shrink = tau2 / (sigma2 + d.n * tau2);
    const double quad = (ssr - shrink * sr * sr) / sigma2;
    ll += -0.5 * (d.n * std::log(2.0 * M_PI) + (d.n - 1.0) * std::log(sigma2) +
                  std::log(sigma2 + d.n * tau2) + quad);
  }
  return ll;
}

}  // namespace

Eigen::Vector4d cubic_age_basis(double age, double center, double scale) {
  const double x = (age - center) / scale;
  return {1.0, x, x * x, x * x * x};
}

double predict_mean(const LmmFit& fit, double age) {
  return fit.beta.dot(cubic_age_basis(age, fit.age_center, fit.age_scale));
}

Eigen::Vector4d gls_beta(const CareerPanel& panel, double tau2, double sigma2, double age_center,
                         double age_scale) {
  auto players = collect(panel, age_center, age_scale);
  return gls_step(players, tau2, sigma2);
}

LmmFit fit_lmm(const CareerPanel& panel, int max_iter, double tol) {
  if (max_iter < 1 || !(tol >= 0.0)) {
    throw std::invalid_argument("fit_lmm: max_iter >= 1 and tol >= 0 required");
  }
  LmmFit fit;
  auto players = collect(panel, fit.age_center, fit.age_scale);
  long long n_obs = 0;
  for (const PlayerData& d : players) n_obs += static_cast<long long>(d.n);
  if (players.size() < 2 || n_obs < 5) {
    throw std::invalid_argument("fit_lmm: need >= 2 players and >= 5 observed cells");
  }
  fit.n_players = static_cast<int>(players.size());
  fit.n_obs = static_cast<int>(n_obs);
  const double n_total = static_cast<double>(n_obs);
  const double n_play = static_cast<double>(players.size());

  // OLS start; split the residual variance between the two components using
  // the spread of per-player mean residuals.
  Eigen::Vector4d beta = gls_step(players, 0.0, 1.0);
  double rss = 0.0;
  double mean_sq = 0.0;
  for (const PlayerData& d : players) {
    rss += d.syy - 2.0 * beta.dot(d.sxy) + beta.dot(d.sxx * beta);
    const double rbar = (d.sy - beta.dot(d.sx)) / d.n;
    mean_sq += rbar * rbar;
  }
  double sigma2 = std::max(rss / n_total, kSigma2Floor);
  double tau2 = std::max(mean_sq / n_play, kTau2Floor);

  double prev_ll = -std::numeric_limits<double>::infinity();
  for (int iter = 0; iter < max_iter; ++iter) {
    // conditional maximization of the actual likelihood over beta
    beta = gls_step(players, tau2, sigma2);

    // E-step at (beta, tau2, sigma2)
    double sum_b2v = 0.0;
    double sum_resid = 0.0;
    for (const PlayerData& d : players) {
      const double resid_sum = d.sy - beta.dot(d.sx);
      const double gain = tau2 > 0.0 ? d.n * tau2 / (sigma2 + d.n * tau2) : 0.0;
      const double b_hat = gain * resid_sum / std::max(d.n, 1.0);
      const double v_post = tau2 > 0.0 ? tau2 * sigma2 / (sigma2 + d.n * tau2) : 0.0;
      sum_b2v += b_hat * b_hat + v_post;
      const double ssr = d.syy - 2.0 * beta.dot(d.sxy) + beta.dot(d.sxx * beta);
      // sum over cells of (r_pq - b_hat)^2 plus the posterior-variance term
      sum_resid += ssr - 2.0 * b_hat * resid_sum + d.n * b_hat * b_hat + d.n * v_post;
    }
    tau2 = sum_b2v / n_play;
    if (tau2 < kTau2Floor) {
      tau2 = 0.0;
      fit.tau2_boundary = true;
    }
    sigma2 = std::max(sum_resid / n_total, kSigma2Floor);

    const double ll = marginal_loglik(players, beta, tau2, sigma2);
    fit.loglik_path.push_back(ll);
    if (iter > 0 && std::abs(ll - prev_ll) < tol * (std::abs(prev_ll) + 1.0)) {
      fit.converged = true;
      prev_ll = ll;
      break;
    }
    prev_ll = ll;
  }

  fit.beta = beta;
  fit.tau2 = tau2;
  fit.sigma2 = sigma2;
  fit.loglik = prev_ll;
  return fit;
}

void write_lmm_fit(const LmmFit& fit, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for writing: " + path.string());
  char buf[64];
  auto emit = [&](const char* key, double v) {
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    out << key << " = " << buf << '\n';
  };
  emit("beta0", fit.beta(0));
  emit("beta1", fit.beta(1));
  emit("beta2", fit.beta(2));
  emit("beta3", fit.beta(3));
  emit("tau2", fit.tau2);
  emit("sigma2", fit.sigma2);
  emit("loglik", fit.loglik);
  out << "converged = " << (fit.converged ? 1 : 0) << '\n';
  emit("center", fit.age_center);
  emit("scale", fit.age_scale);
}

LmmFit read_lmm_fit(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open: " + path.string());
  std::map<std::string, double> kv;
  std::string line;
  while (std::getline(in, line)) {
    std::istringstream ls(line);
    std::string key, eq;
    double value;
    if (ls >> key >> eq >> value && eq == "=") kv[key] = value;
  }
  for (const char* key : {"beta0", "beta1", "beta2", "beta3", "tau2", "sigma2", "loglik",
                          "converged", "center", "scale"}) {
    if (kv.find(key) == kv.end()) {
      throw std::runtime_error("fit file missing key " + std::string(key) + ": " + path.string());
    }
  }
  LmmFit fit;
  fit.beta << kv["beta0"], kv["beta1"], kv["beta2"], kv["beta3"];
  fit.tau2 = kv["tau2"];
  fit.sigma2 = kv["sigma2"];
  fit.loglik = kv["loglik"];
  fit.converged = kv["converged"] != 0.0;
  fit.age_center = kv["center"];
  fit.age_scale = kv["scale"];
  return fit;
}

}  // namespace agecurve
