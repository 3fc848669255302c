#include "agecurve/mi.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <thread>

#include "agecurve/csv.hpp"
#include "agecurve/lmm.hpp"

namespace agecurve {

void MiConfig::validate() const {
  if (m < 2) throw std::invalid_argument("MiConfig: m >= 2 imputations required");
  if (n_iter < 1) throw std::invalid_argument("MiConfig: n_iter >= 1 required");
}

namespace {

constexpr double kVarFloor = 1e-12;

struct PlayerBlock {
  Eigen::Matrix4d sxx = Eigen::Matrix4d::Zero();
  Eigen::Vector4d sx = Eigen::Vector4d::Zero();
  Eigen::Vector4d sxy = Eigen::Vector4d::Zero();
  double sy = 0.0;
  double syy = 0.0;
  double n_obs = 0.0;
  std::vector<Eigen::Vector4d> missing_x;
  std::vector<int> missing_age_idx;
};

// One Gibbs chain. Cross-player reductions run in player_id-sorted order so
// that results are exactly invariant under panel reordering.
class Sampler {
 public:
  Sampler(const CareerPanel& panel, const GibbsPrior& prior, SeededRng key)
      : panel_(panel), prior_(prior), global_rng_(key.derive("mi.global")) {
    const int np = panel.n_players();
    blocks_.reserve(static_cast<size_t>(np));
    for (int p = 0; p < np; ++p) {
      PlayerBlock blk;
      for (int a = 0; a < panel.grid().size(); ++a) {
        const Eigen::Vector4d xb = cubic_age_basis(panel.grid().age_at(a));
        if (panel.observed(p, a)) {
          const double y = panel.value(p, a);
          blk.sxx.noalias() += xb * xb.transpose();
          blk.sx += xb;
          blk.sxy += xb * y;
          blk.sy += y;
          blk.syy += y * y;
          blk.n_obs += 1.0;
        } else {
          blk.missing_x.push_back(xb);
          blk.missing_age_idx.push_back(a);
        }
      }
      n_obs_total_ += blk.n_obs;
      missing_offsets_.push_back(static_cast<size_t>(n_missing_total_));
      n_missing_total_ += static_cast<long long>(blk.missing_x.size());
      blocks_.push_back(std::move(blk));
      player_rng_.emplace_back(key.derive("mi.player", std::string_view(panel.player_id(p))));
    }
    canon_.resize(static_cast<size_t>(np));
    std::iota(canon_.begin(), canon_.end(), 0);
    std::sort(canon_.begin(), canon_.end(),
              [&](int a, int b) { return panel.player_id(a) < panel.player_id(b); });
  }

  void initialize() {
    const int np = panel_.n_players();
    // OLS over all observed cells
    Eigen::Matrix4d a = Eigen::Matrix4d::Zero();
    Eigen::Vector4d rhs = Eigen::Vector4d::Zero();
    for (int p : canon_) {
      a += blocks_[static_cast<size_t>(p)].sxx;
      rhs += blocks_[static_cast<size_t>(p)].sxy;
    }
    Eigen::FullPivLU<Eigen::Matrix4d> lu(a);
    if (lu.rank() < 4) {
      throw std::runtime_error("initialize_chain: singular OLS system (rank-deficient age basis)");
    }
    state_.beta = lu.solve(rhs);

    double rss = 0.0;
    for (int p : canon_) rss += observed_ssr(p, 0.0);
    const double df = std::max(n_obs_total_ - 4.0, 1.0);
    const double pooled = std::max(rss / df, kVarFloor);

    state_.b.assign(static_cast<size_t>(np), 0.0);
    state_.sigma2.assign(static_cast<size_t>(np), pooled);

    // variance of the per-player mean residuals
    std::vector<double> rbars;
    for (int p : canon_) {
      const PlayerBlock& blk = blocks_[static_cast<size_t>(p)];
      if (blk.n_obs == 0.0) continue;
      rbars.push_back((blk.sy - state_.beta.dot(blk.sx)) / blk.n_obs);
    }
    double tau2 = pooled;
    if (rbars.size() >= 2) {
      double mean = 0.0;
      for (double r : rbars) mean += r;
      mean /= static_cast<double>(rbars.size());
      double ss = 0.0;
      for (double r : rbars) ss += (r - mean) * (r - mean);
      tau2 = ss / static_cast<double>(rbars.size() - 1);
    }
    state_.tau2 = std::max(tau2, kVarFloor);

    state_.missing_values.assign(static_cast<size_t>(n_missing_total_), 0.0);
    const double sd = std::sqrt(pooled);
    size_t mi = 0;
    for (int p = 0; p < np; ++p) {
      for (const Eigen::Vector4d& xb : blocks_[static_cast<size_t>(p)].missing_x) {
        state_.missing_values[mi++] =
            player_rng_[static_cast<size_t>(p)].normal(state_.beta.dot(xb), sd);
      }
    }
  }

  void iterate() {
    draw_beta();
    draw_random_effects();
    draw_player_variances();
    draw_tau2();
    draw_missing();
  }

  // mean and sd (divisor n-1) of the current missing-cell draws, accumulated
  // in canonical player order
  std::pair<double, double> trace_stat() const {
    const long long n = n_missing_total_;
    if (n == 0) return {0.0, 0.0};
    double sum = 0.0;
    for (int p : canon_) {
      for (size_t j = 0; j < blocks_[static_cast<size_t>(p)].missing_x.size(); ++j) {
        sum += state_.missing_values[missing_offset(p) + j];
      }
    }
    const double mean = sum / static_cast<double>(n);
    if (n < 2) return {mean, 0.0};
    double ss = 0.0;
    for (int p : canon_) {
      for (size_t j = 0; j < blocks_[static_cast<size_t>(p)].missing_x.size(); ++j) {
        const double d = state_.missing_values[missing_offset(p) + j] - mean;
        ss += d * d;
      }
    }
    return {mean, std::sqrt(ss / static_cast<double>(n - 1))};
  }

  CareerPanel completed() const {
    CareerPanel out = panel_;
    for (int p = 0; p < panel_.n_players(); ++p) {
      const PlayerBlock& blk = blocks_[static_cast<size_t>(p)];
      for (size_t j = 0; j < blk.missing_age_idx.size(); ++j) {
        out.set_observed(p, blk.missing_age_idx[j], state_.missing_values[missing_offset(p) + j]);
      }
    }
    return out;
  }

  const ChainState& state() const { return state_; }

 private:
  size_t missing_offset(int p) const { return missing_offsets_[static_cast<size_t>(p)]; }

  double observed_ssr(int p, double b) const {
    const PlayerBlock& blk = blocks_[static_cast<size_t>(p)];
    const double ssr = blk.syy - 2.0 * state_.beta.dot(blk.sxy) +
                       state_.beta.dot(blk.sxx * state_.beta) -
                       2.0 * b * (blk.sy - state_.beta.dot(blk.sx)) + blk.n_obs * b * b;
    return std::max(ssr, 0.0);
  }

  void draw_beta() {
    Eigen::Matrix4d a = Eigen::Matrix4d::Zero();
    Eigen::Vector4d rhs = Eigen::Vector4d::Zero();
    for (int p : canon_) {
      const PlayerBlock& blk = blocks_[static_cast<size_t>(p)];
      if (blk.n_obs == 0.0) continue;
      const double w = 1.0 / state_.sigma2[static_cast<size_t>(p)];
      a.noalias() += w * blk.sxx;
      rhs.noalias() += w * (blk.sxy - state_.b[static_cast<size_t>(p)] * blk.sx);
    }
    Eigen::LLT<Eigen::Matrix4d> llt(a);
    if (llt.info() != Eigen::Success) {
      throw std::runtime_error("impute: singular precision matrix in beta conditional");
    }
    Eigen::Vector4d z;
    for (int i = 0; i < 4; ++i) z(i) = global_rng_.normal();
    state_.beta = llt.solve(rhs) + llt.matrixU().solve(z);
  }

  void draw_random_effects() {
    for (int p = 0; p < panel_.n_players(); ++p) {
      const PlayerBlock& blk = blocks_[static_cast<size_t>(p)];
      const double resid_sum = blk.sy - state_.beta.dot(blk.sx);
      const double prec = blk.n_obs / state_.sigma2[static_cast<size_t>(p)] + 1.0 / state_.tau2;
      const double mean = resid_sum / state_.sigma2[static_cast<size_t>(p)] / prec;
      state_.b[static_cast<size_t>(p)] =
          player_rng_[static_cast<size_t>(p)].normal(mean, std::sqrt(1.0 / prec));
    }
  }

  void draw_player_variances() {
    // pooled residual sum for players with too few observations
    bool need_pooled = false;
    for (const PlayerBlock& blk : blocks_) {
      if (blk.n_obs < 2.0) need_pooled = true;
    }
    double pooled_ssr = 0.0;
    if (need_pooled) {
      for (int p : canon_) pooled_ssr += observed_ssr(p, state_.b[static_cast<size_t>(p)]);
    }
    for (int p = 0; p < panel_.n_players(); ++p) {
      const PlayerBlock& blk = blocks_[static_cast<size_t>(p)];
      double df, scale_sum;
      if (blk.n_obs >= 2.0) {
        df = prior_.nu0 + blk.n_obs;
        scale_sum = prior_.nu0 * prior_.s0_sq + observed_ssr(p, state_.b[static_cast<size_t>(p)]);
      } else {
        df = prior_.nu0 + n_obs_total_;
        scale_sum = prior_.nu0 * prior_.s0_sq + pooled_ssr;
      }
      state_.sigma2[static_cast<size_t>(p)] =
          scale_sum / player_rng_[static_cast<size_t>(p)].chisq(df);
    }
  }

  void draw_tau2() {
    double sum_b2 = 0.0;
    for (int p : canon_) {
      sum_b2 += state_.b[static_cast<size_t>(p)] * state_.b[static_cast<size_t>(p)];
    }
    const double df = prior_.nu0 + static_cast<double>(panel_.n_players());
    state_.tau2 = (prior_.nu0 * prior_.s0_sq + sum_b2) / global_rng_.chisq(df);
  }

  void draw_missing() {
    size_t mi = 0;
    for (int p = 0; p < panel_.n_players(); ++p) {
      const PlayerBlock& blk = blocks_[static_cast<size_t>(p)];
      const double sd = std::sqrt(state_.sigma2[static_cast<size_t>(p)]);
      for (const Eigen::Vector4d& xb : blk.missing_x) {
        const double mean = state_.beta.dot(xb) + state_.b[static_cast<size_t>(p)];
        state_.missing_values[mi++] = player_rng_[static_cast<size_t>(p)].normal(mean, sd);
      }
    }
  }

  const CareerPanel& panel_;
  GibbsPrior prior_;
  RngStream global_rng_;
  std::vector<RngStream> player_rng_;
  std::vector<PlayerBlock> blocks_;
  std::vector<size_t> missing_offsets_;
  std::vector<int> canon_;
  double n_obs_total_ = 0.0;
  long long n_missing_total_ = 0;
  ChainState state_;
};

void validate_impute_input(const CareerPanel& panel) {
  if (panel.n_missing() < 1) {
    throw std::invalid_argument("impute: panel has no missing cells");
  }
  int rich_players = 0;
  for (int p = 0; p < panel.n_players(); ++p) {
    int n = 0;
    for (int a = 0; a < panel.grid().size(); ++a) n += panel.observed(p, a) ? 1 : 0;
    if (n >= 2) ++rich_players;
  }
  if (rich_players < 2) {
    throw std::invalid_argument("impute: need >= 2 players with >= 2 observed cells");
  }
}

}  // namespace

ChainState initialize_chain(const CareerPanel& panel, SeededRng key) {
  validate_impute_input(panel);
  Sampler sampler(panel, GibbsPrior{}, key);
  sampler.initialize();
  return sampler.state();
}

CareerPanel run_chain(const CareerPanel& panel, const GibbsPrior& prior, int n_iter,
                      SeededRng key, std::vector<TraceRow>* traces, int chain_id) {
  if (n_iter < 1) throw std::invalid_argument("run_chain: n_iter >= 1 required");
  Sampler sampler(panel, prior, key);
  sampler.initialize();
  for (int it = 1; it <= n_iter; ++it) {
    sampler.iterate();
    if (traces) {
      auto [mean, sd] = sampler.trace_stat();
      traces->push_back({chain_id, it, mean, sd});
    }
  }
  return sampler.completed();
}

ImputationRun impute(const CareerPanel& panel, const MiConfig& config, int n_threads) {
  config.validate();
  validate_impute_input(panel);

  ImputationRun run;
  run.config = config;
  for (int p = 0; p < panel.n_players(); ++p) {
    int n = 0;
    for (int a = 0; a < panel.grid().size(); ++a) n += panel.observed(p, a) ? 1 : 0;
    if (n < 2) {
      run.warnings.push_back("player '" + panel.player_id(p) + "' has " + std::to_string(n) +
                             " observed cells; pooled residual-variance conditional used");
    }
  }

  // Prior scale from the residual variance of a random-intercept fit; tiny
  // panels below the fitting threshold fall back to the spread of observed
  // values.
  GibbsPrior prior;
  try {
    prior.s0_sq = std::max(fit_lmm(panel).sigma2, kVarFloor);
  } catch (const std::invalid_argument&) {
    std::vector<int> order(static_cast<size_t>(panel.n_players()));
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](int a, int b) { return panel.player_id(a) < panel.player_id(b); });
    double sum = 0.0, sum2 = 0.0, n = 0.0;
    for (int p : order) {
      for (int a = 0; a < panel.grid().size(); ++a) {
        if (!panel.observed(p, a)) continue;
        sum += panel.value(p, a);
        sum2 += panel.value(p, a) * panel.value(p, a);
        n += 1.0;
      }
    }
    const double var = n > 1.0 ? (sum2 - sum * sum / n) / (n - 1.0) : 1.0;
    prior.s0_sq = std::max(var, kVarFloor);
  }

  const SeededRng root{config.seed, 0};
  std::vector<CareerPanel> completed;
  completed.reserve(static_cast<size_t>(config.m));
  std::vector<std::vector<TraceRow>> chain_traces(static_cast<size_t>(config.m));

  auto run_one = [&](int c) {
    std::vector<TraceRow> traces;
    CareerPanel panel_c = run_chain(panel, prior, config.n_iter,
                                    root.derive("mi.chain", static_cast<uint64_t>(c)), &traces,
                                    c + 1);
    chain_traces[static_cast<size_t>(c)] = std::move(traces);
    return panel_c;
  };

  if (n_threads <= 1 || config.m == 1) {
    for (int c = 0; c < config.m; ++c) completed.push_back(run_one(c));
  } else {
    std::vector<std::optional<CareerPanel>> slots(static_cast<size_t>(config.m));
    std::atomic<int> next{0};
    std::vector<std::thread> workers;
    const int n_workers = std::min(n_threads, config.m);
    std::vector<std::exception_ptr> errors(static_cast<size_t>(n_workers));
    for (int w = 0; w < n_workers; ++w) {
      workers.emplace_back([&, w] {
        try {
          for (int c = next.fetch_add(1); c < config.m; c = next.fetch_add(1)) {
            slots[static_cast<size_t>(c)] = run_one(c);
          }
        } catch (...) {
          errors[static_cast<size_t>(w)] = std::current_exception();
        }
      });
    }
    for (auto& t : workers) t.join();
    for (const auto& err : errors) {
      if (err) std::rethrow_exception(err);
    }
    for (auto& slot : slots) completed.push_back(std::move(*slot));
  }

  run.completed = std::move(completed);
  for (auto& traces : chain_traces) {
    run.traces.insert(run.traces.end(), traces.begin(), traces.end());
  }
  return run;
}

void write_traces_csv(const std::vector<TraceRow>& traces, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for writing: " + path.string());
  out << "chain,iteration,imputed_mean,imputed_sd\n";
  for (const TraceRow& row : traces) {
    out << row.chain << ',' << row.iteration << ',' << csv::format_double(row.imputed_mean) << ','
        << csv::format_double(row.imputed_sd) << '\n';
  }
}

}  // namespace agecurve
