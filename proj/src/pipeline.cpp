#include "agecurve/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <stdexcept>

#include "agecurve/csv.hpp"
#include "agecurve/diag.hpp"
#include "agecurve/ingest.hpp"
#include "agecurve/lmm.hpp"
#include "agecurve/pool.hpp"
#include "agecurve/svg.hpp"

namespace agecurve {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

// Thrown by stages whose failures come from reading the raw input files.
struct IngestError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for writing: " + path.string());
  out << text;
}

json dropout_json(const DropoutSpec& spec) {
  return json{{"mechanism", to_string(spec.mechanism)},
              {"threshold", spec.threshold},
              {"retire_prob", spec.retire_prob},
              {"retire_age", spec.retire_age}};
}

json config_json(const PipelineConfig& c) {
  return json{{"batting", c.batting_path},
              {"people", c.people_path},
              {"fit", c.fit_path},
              {"panel", c.panel_path},
              {"out", c.out_dir},
              {"seed", c.seed},
              {"n_players", c.n_players},
              {"m", c.mi.m},
              {"iters", c.mi.n_iter},
              {"dropout", dropout_json(c.dropout)},
              {"span", c.loess.span},
              {"degree", c.loess.degree},
              {"scale_min", c.transform.scale_min},
              {"scale_max", c.transform.scale_max},
              {"age_min", c.grid.min_age},
              {"age_max", c.grid.max_age},
              {"min_pa", c.min_pa},
              {"min_debut", c.min_debut},
              {"level", c.level},
              {"threads", c.threads}};
}

void write_manifest(const fs::path& dir, const std::string& command, const PipelineConfig& config,
                    const std::vector<std::string>& artifacts, const json& extra = {}) {
  json m{{"command", command}, {"config", config_json(config)}, {"artifacts", artifacts}};
  if (!extra.is_null()) m["results"] = extra;
  write_text(dir / "manifest.json", m.dump(2) + "\n");
}

void validate_common(const PipelineConfig& config) {
  if (config.out_dir.empty()) throw std::invalid_argument("output directory required");
  config.grid.validate();
  config.transform.validate();
  config.loess.validate();
  config.dropout.validate();
  config.mi.validate();
  if (config.n_players < 1) throw std::invalid_argument("n_players must be >= 1");
  if (!(config.level > 0.0 && config.level < 1.0)) {
    throw std::invalid_argument("confidence level must lie in (0, 1)");
  }
  if (config.threads < 1) throw std::invalid_argument("threads must be >= 1");
}

// Runs the pipeline body with stage tracking; on failure a FAILED marker
// naming the stage is left next to the partial outputs.
class StageGuard {
 public:
  explicit StageGuard(fs::path dir) : dir_(std::move(dir)) {}

  void enter(const std::string& name) {
    stage_ = name;
    std::cout << "[" << name << "] running\n";
  }

  int fail(const std::exception& e, int code) const {
    std::cerr << "stage '" << stage_ << "' failed: " << e.what() << "\n";
    try {
      write_text(dir_ / "FAILED", stage_ + ": " + e.what() + "\n");
    } catch (...) {
    }
    return code;
  }

  const std::string& stage() const { return stage_; }

 private:
  fs::path dir_;
  std::string stage_;
};

LmmFit obtain_fit(const PipelineConfig& config, StageGuard& guard,
                  std::vector<std::string>* artifacts, const fs::path& dir) {
  guard.enter("fit");
  if (!config.fit_path.empty()) {
    try {
      return read_lmm_fit(config.fit_path);
    } catch (const std::exception& e) {
      throw IngestError(e.what());
    }
  }
  if (config.batting_path.empty() || config.people_path.empty()) {
    throw std::invalid_argument("need either --fit or both --batting and --people");
  }
  IngestLog log;
  std::vector<BattingRow> batting;
  std::vector<PersonRow> people;
  try {
    batting = read_batting_csv(fs::path(config.batting_path), log);
    people = read_people_csv(fs::path(config.people_path), log);
  } catch (const std::exception& e) {
    throw IngestError(e.what());
  }
  CareerPanel panel =
      build_panel(batting, people, config.grid, config.min_pa, config.min_debut, config.transform,
                  &log);
  std::cout << "[fit] ingested " << panel.n_players() << " players\n";
  LmmFit fit = fit_lmm(panel);
  write_lmm_fit(fit, dir / "fit.txt");
  artifacts->push_back("fit.txt");
  return fit;
}

struct CurveArtifacts {
  std::vector<AgingCurve> imp_curves;
  PooledCurve pooled;
};

CurveArtifacts per_imputation_curves(const ImputationRun& run, const PipelineConfig& config,
                                     const fs::path& dir, std::vector<std::string>* artifacts) {
  CurveArtifacts out;
  for (size_t i = 0; i < run.completed.size(); ++i) {
    AgingCurve c = panel_to_curve(run.completed[i], config.loess, CellUse::kAll);
    const std::string name = "curve_imp_" + std::to_string(i + 1) + ".csv";
    write_curve_csv(c, dir / name);
    artifacts->push_back(name);
    out.imp_curves.push_back(std::move(c));
  }
  out.pooled = pool_curve(out.imp_curves, config.level);
  write_pooled_curve_csv(out.pooled, dir / "curve_pooled.csv");
  write_pooled_curve_csv(pooled_curve_to_ops_units(out.pooled, config.transform),
                         dir / "curve_pooled_ops.csv");
  artifacts->push_back("curve_pooled.csv");
  artifacts->push_back("curve_pooled_ops.csv");
  return out;
}

std::vector<double> ages_of(const AgeGrid& grid) {
  std::vector<double> ages(static_cast<size_t>(grid.size()));
  for (int a = 0; a < grid.size(); ++a) ages[static_cast<size_t>(a)] = grid.age_at(a);
  return ages;
}

svg::Series curve_series(const AgingCurve& c, const std::string& label, const std::string& color,
                         bool dashed = false) {
  return {label, ages_of(c.grid), c.mean, color, 1.8, dashed};
}

void write_pooled_svg(const PooledCurve& pooled, const fs::path& path, const std::string& title) {
  svg::Band band{ages_of(pooled.grid), pooled.ci_low, pooled.ci_high, "#d62728", 0.18};
  svg::Series mid{"pooled estimate", ages_of(pooled.grid), pooled.estimate, "#d62728", 2.0, false};
  svg::write_line_chart(path, {title, "age", "transformed OPS", 720, 480}, {mid}, {band});
}

// KDE rows for observed values and each chain's imputations, on a shared grid.
void write_kde_csv(const std::vector<double>& observed,
                   const std::vector<std::vector<double>>& imputed, const fs::path& path,
                   std::vector<svg::Series>* series) {
  DensityEstimate base = kde(observed);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for writing: " + path.string());
  out << "x,density,source\n";
  auto emit = [&](const DensityEstimate& est, const std::string& source) {
    for (size_t i = 0; i < est.grid.size(); ++i) {
      out << csv::format_double(est.grid[i]) << ',' << csv::format_double(est.density[i]) << ','
          << source << '\n';
    }
  };
  emit(base, "observed");
  if (series) series->push_back({"observed", base.grid, base.density, "#333333", 2.0, false});
  const char* palette[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
                           "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};
  for (size_t c = 0; c < imputed.size(); ++c) {
    DensityEstimate est = kde(imputed[c], base.grid);
    const std::string label = "imp_" + std::to_string(c + 1);
    emit(est, label);
    if (series) {
      series->push_back({label, est.grid, est.density, palette[c % 10], 1.2, true});
    }
  }
}

std::vector<double> observed_values(const CareerPanel& panel) {
  std::vector<double> v;
  for (int p = 0; p < panel.n_players(); ++p) {
    for (int a = 0; a < panel.grid().size(); ++a) {
      if (panel.observed(p, a)) v.push_back(panel.value(p, a));
    }
  }
  return v;
}

// values each chain drew for the cells that the mask removed
std::vector<std::vector<double>> imputed_values(const ImputationRun& run,
                                                const CareerPanel& masked) {
  std::vector<std::vector<double>> out;
  for (const CareerPanel& completed : run.completed) {
    std::vector<double> v;
    for (int p = 0; p < masked.n_players(); ++p) {
      for (int a = 0; a < masked.grid().size(); ++a) {
        if (!masked.observed(p, a)) v.push_back(completed.value(p, a));
      }
    }
    out.push_back(std::move(v));
  }
  return out;
}

std::vector<double> to_ops(const std::vector<double>& values, const TransformSpec& spec) {
  std::vector<double> out;
  out.reserve(values.size());
  for (double v : values) {
    out.push_back(inverse_transform_ops(std::clamp(v, 0.0, kHalfPi), spec));
  }
  return out;
}

void write_diagnostics(const ImputationRun& run, const CareerPanel& masked,
                       const PipelineConfig& config, const fs::path& dir,
                       std::vector<std::string>* artifacts) {
  write_traces_csv(run.traces, dir / "traces.csv");
  artifacts->push_back("traces.csv");

  TraceStats stats = trace_stats(run);
  char buf[160];
  std::snprintf(buf, sizeof(buf),
                "mean_mixing_score = %.6f\nsd_mixing_score = %.6f\nwindow = last %d iterations\n",
                stats.mean_mixing, stats.sd_mixing, std::min(10, run.config.n_iter));
  write_text(dir / "mixing.txt", buf);
  artifacts->push_back("mixing.txt");

  const auto obs = observed_values(masked);
  const auto imps = imputed_values(run, masked);
  std::vector<svg::Series> kde_series;
  write_kde_csv(obs, imps, dir / "kde.csv", &kde_series);
  artifacts->push_back("kde.csv");
  std::vector<std::vector<double>> imps_ops;
  for (const auto& v : imps) imps_ops.push_back(to_ops(v, config.transform));
  write_kde_csv(to_ops(obs, config.transform), imps_ops, dir / "kde_ops.csv", nullptr);
  artifacts->push_back("kde_ops.csv");
  svg::write_line_chart(dir / "kde.svg",
                        {"observed vs imputed value densities", "transformed OPS", "density"},
                        kde_series);
  artifacts->push_back("kde.svg");

  const char* palette[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd"};
  std::vector<svg::Series> mean_series(static_cast<size_t>(run.config.m));
  std::vector<svg::Series> sd_series(static_cast<size_t>(run.config.m));
  for (int c = 0; c < run.config.m; ++c) {
    auto& ms = mean_series[static_cast<size_t>(c)];
    auto& ss = sd_series[static_cast<size_t>(c)];
    ms.label = ss.label = "chain " + std::to_string(c + 1);
    ms.color = ss.color = palette[c % 5];
    ms.width = ss.width = 1.4;
  }
  for (const TraceRow& row : run.traces) {
    auto& ms = mean_series[static_cast<size_t>(row.chain - 1)];
    auto& ss = sd_series[static_cast<size_t>(row.chain - 1)];
    ms.x.push_back(row.iteration);
    ms.y.push_back(row.imputed_mean);
    ss.x.push_back(row.iteration);
    ss.y.push_back(row.imputed_sd);
  }
  svg::write_line_chart(dir / "traces_mean.svg",
                        {"imputed value mean by iteration", "iteration", "mean"}, mean_series);
  svg::write_line_chart(dir / "traces_sd.svg",
                        {"imputed value sd by iteration", "iteration", "sd"}, sd_series);
  artifacts->push_back("traces_mean.svg");
  artifacts->push_back("traces_sd.svg");

  if (!run.warnings.empty()) {
    std::string text;
    for (const auto& w : run.warnings) text += w + "\n";
    write_text(dir / "impute_warnings.txt", text);
    artifacts->push_back("impute_warnings.txt");
  }
}

}  // namespace

int run_pipeline_sim(const PipelineConfig& config) {
  try {
    validate_common(config);
    if (config.fit_path.empty() && (config.batting_path.empty() || config.people_path.empty())) {
      throw std::invalid_argument("pipeline-sim needs --fit or --batting/--people");
    }
  } catch (const std::exception& e) {
    std::cerr << "bad config: " << e.what() << "\n";
    return kBadConfig;
  }

  const fs::path dir(config.out_dir);
  fs::create_directories(dir);
  StageGuard guard(dir);
  std::vector<std::string> artifacts;
  const SeededRng root{config.seed, 0};

  try {
    LmmFit fit = obtain_fit(config, guard, &artifacts, dir);

    guard.enter("simulate");
    CareerPanel truth = simulate_careers(fit, config.n_players, config.grid,
                                         root.derive("pipeline.sim"));
    write_panel_csv(truth, dir / "panel_true.csv");
    artifacts.push_back("panel_true.csv");

    guard.enter("dropout");
    CareerPanel masked =
        apply_dropout(truth, config.dropout, config.transform, root.derive("pipeline.dropout"));
    write_panel_csv(masked, dir / "panel_dropout.csv");
    artifacts.push_back("panel_dropout.csv");
    json meta = dropout_json(config.dropout);
    meta["seed"] = config.seed;
    write_text(dir / "dropout_meta.json", meta.dump(2) + "\n");
    artifacts.push_back("dropout_meta.json");
    const PanelSummary summary = panel_summary(masked);
    std::cout << "[dropout] " << summary.n_observed << " observed cells of "
              << static_cast<long long>(masked.n_players()) * masked.grid().size() << "\n";

    guard.enter("curves");
    AgingCurve true_curve = panel_to_curve(truth, config.loess, CellUse::kAll);
    AgingCurve survivor_curve = panel_to_curve(masked, config.loess, CellUse::kObservedOnly);
    write_curve_csv(true_curve, dir / "curve_true.csv");
    write_curve_csv(survivor_curve, dir / "curve_survivor.csv");
    artifacts.push_back("curve_true.csv");
    artifacts.push_back("curve_survivor.csv");

    guard.enter("impute");
    MiConfig mi_config = config.mi;
    mi_config.seed = config.seed;
    ImputationRun run = impute(masked, mi_config, config.threads);
    for (size_t i = 0; i < run.completed.size(); ++i) {
      const std::string name = "completed_" + std::to_string(i + 1) + ".csv";
      write_panel_csv(run.completed[i], dir / name);
      artifacts.push_back(name);
    }

    guard.enter("pool");
    CurveArtifacts curves = per_imputation_curves(run, config, dir, &artifacts);
    AgingCurve pooled_mean = pooled_curve_mean(curves.pooled);

    const double mae_survivor = curve_mae(survivor_curve, true_curve);
    const double mae_pooled = curve_mae(pooled_mean, true_curve);
    {
      std::ofstream mae(dir / "mae_report.csv", std::ios::binary);
      mae << "comparison,mae\n";
      mae << "survivor_vs_true," << csv::format_double(mae_survivor) << '\n';
      mae << "pooled_imputed_vs_true," << csv::format_double(mae_pooled) << '\n';
      for (size_t i = 0; i < curves.imp_curves.size(); ++i) {
        mae << "imp_" << (i + 1) << "_vs_true,"
            << csv::format_double(curve_mae(curves.imp_curves[i], true_curve)) << '\n';
      }
    }
    artifacts.push_back("mae_report.csv");
    std::cout << "[pool] MAE survivor vs true = " << mae_survivor
              << ", pooled imputed vs true = " << mae_pooled << "\n";

    std::vector<svg::Series> overview{
        curve_series(true_curve, "true (fully observed)", "#333333"),
        curve_series(survivor_curve, "survivors only", "#1f77b4", true),
        curve_series(pooled_mean, "pooled imputed", "#d62728")};
    svg::write_line_chart(dir / "curves.svg",
                          {"aging curves under dropout (" + to_string(config.dropout.mechanism) +
                               ")",
                           "age", "transformed OPS"},
                          overview);
    artifacts.push_back("curves.svg");
    write_pooled_svg(curves.pooled, dir / "pooled_curve.svg", "pooled imputed curve with CI");
    artifacts.push_back("pooled_curve.svg");

    guard.enter("diagnostics");
    write_diagnostics(run, masked, config, dir, &artifacts);

    guard.enter("manifest");
    write_manifest(dir, "pipeline-sim", config, artifacts,
                   json{{"mae_survivor_vs_true", mae_survivor},
                        {"mae_pooled_vs_true", mae_pooled},
                        {"n_players", config.n_players}});
    return kOk;
  } catch (const IngestError& e) {
    return guard.fail(e, kIngestFailure);
  } catch (const std::exception& e) {
    return guard.fail(e, kNumericFailure);
  }
}

int run_pipeline_mlb(const PipelineConfig& config) {
  try {
    validate_common(config);
    if (config.batting_path.empty() || config.people_path.empty()) {
      throw std::invalid_argument("pipeline-mlb needs --batting and --people");
    }
  } catch (const std::exception& e) {
    std::cerr << "bad config: " << e.what() << "\n";
    return kBadConfig;
  }

  const fs::path dir(config.out_dir);
  fs::create_directories(dir);
  StageGuard guard(dir);
  std::vector<std::string> artifacts;

  try {
    guard.enter("ingest");
    IngestLog log;
    std::vector<BattingRow> batting;
    std::vector<PersonRow> people;
    CareerPanel panel = [&] {
      try {
        batting = read_batting_csv(fs::path(config.batting_path), log);
        people = read_people_csv(fs::path(config.people_path), log);
        return build_panel(batting, people, config.grid, config.min_pa, config.min_debut,
                           config.transform, &log);
      } catch (const std::exception& e) {
        throw IngestError(e.what());
      }
    }();
    std::cout << "[ingest] players in panel: " << panel.n_players() << "\n";
    write_panel_csv(panel, dir / "panel_mlb.csv");
    artifacts.push_back("panel_mlb.csv");

    guard.enter("curves");
    AgingCurve observed_curve = panel_to_curve(panel, config.loess, CellUse::kObservedOnly);
    write_curve_csv(observed_curve, dir / "curve_observed.csv");
    write_curve_csv(curve_to_ops_units(observed_curve, config.transform),
                    dir / "curve_observed_ops.csv");
    artifacts.push_back("curve_observed.csv");
    artifacts.push_back("curve_observed_ops.csv");

    guard.enter("impute");
    MiConfig mi_config = config.mi;
    mi_config.seed = config.seed;
    ImputationRun run = impute(panel, mi_config, config.threads);
    for (size_t i = 0; i < run.completed.size(); ++i) {
      const std::string name = "completed_" + std::to_string(i + 1) + ".csv";
      write_panel_csv(run.completed[i], dir / name);
      artifacts.push_back(name);
    }

    guard.enter("pool");
    CurveArtifacts curves = per_imputation_curves(run, config, dir, &artifacts);
    AgingCurve pooled_mean = pooled_curve_mean(curves.pooled);
    std::vector<svg::Series> overview{
        curve_series(observed_curve, "observed seasons only", "#1f77b4", true),
        curve_series(pooled_mean, "pooled imputed", "#d62728")};
    svg::write_line_chart(dir / "curves.svg",
                          {"aging curve with and without imputation", "age", "transformed OPS"},
                          overview);
    artifacts.push_back("curves.svg");
    write_pooled_svg(curves.pooled, dir / "pooled_curve.svg", "pooled imputed curve with CI");
    artifacts.push_back("pooled_curve.svg");

    guard.enter("diagnostics");
    write_diagnostics(run, panel, config, dir, &artifacts);

    guard.enter("manifest");
    write_manifest(dir, "pipeline-mlb", config, artifacts,
                   json{{"n_players", panel.n_players()}});
    return kOk;
  } catch (const IngestError& e) {
    return guard.fail(e, kIngestFailure);
  } catch (const std::exception& e) {
    return guard.fail(e, kNumericFailure);
  }
}

int run_fit(const PipelineConfig& config) {
  try {
    validate_common(config);
    if (config.batting_path.empty() || config.people_path.empty()) {
      throw std::invalid_argument("fit needs --batting and --people");
    }
  } catch (const std::exception& e) {
    std::cerr << "bad config: " << e.what() << "\n";
    return kBadConfig;
  }
  const fs::path dir(config.out_dir);
  fs::create_directories(dir);
  StageGuard guard(dir);
  try {
    std::vector<std::string> artifacts;
    LmmFit fit = obtain_fit(config, guard, &artifacts, dir);
    std::cout << "[fit] loglik = " << fit.loglik << ", tau2 = " << fit.tau2
              << ", sigma2 = " << fit.sigma2 << (fit.converged ? "" : " (not converged)") << "\n";
    write_manifest(dir, "fit", config, artifacts,
                   json{{"converged", fit.converged},
                        {"loglik", fit.loglik},
                        {"n_players", fit.n_players},
                        {"n_obs", fit.n_obs}});
    return kOk;
  } catch (const IngestError& e) {
    return guard.fail(e, kIngestFailure);
  } catch (const std::exception& e) {
    return guard.fail(e, kNumericFailure);
  }
}

int run_simulate(const PipelineConfig& config) {
  try {
    validate_common(config);
    if (config.fit_path.empty()) throw std::invalid_argument("simulate needs --fit");
  } catch (const std::exception& e) {
    std::cerr << "bad config: " << e.what() << "\n";
    return kBadConfig;
  }
  const fs::path dir(config.out_dir);
  fs::create_directories(dir);
  StageGuard guard(dir);
  try {
    guard.enter("simulate");
    LmmFit fit = [&] {
      try {
        return read_lmm_fit(config.fit_path);
      } catch (const std::exception& e) {
        throw IngestError(e.what());
      }
    }();
    const SeededRng root{config.seed, 0};
    CareerPanel panel = simulate_careers(fit, config.n_players, config.grid,
                                         root.derive("pipeline.sim"));
    write_panel_csv(panel, dir / "panel_sim.csv");
    write_manifest(dir, "simulate", config, {"panel_sim.csv"});
    return kOk;
  } catch (const IngestError& e) {
    return guard.fail(e, kIngestFailure);
  } catch (const std::exception& e) {
    return guard.fail(e, kNumericFailure);
  }
}

int run_impute(const PipelineConfig& config) {
  try {
    validate_common(config);
    if (config.panel_path.empty()) throw std::invalid_argument("impute needs --panel");
  } catch (const std::exception& e) {
    std::cerr << "bad config: " << e.what() << "\n";
    return kBadConfig;
  }
  const fs::path dir(config.out_dir);
  fs::create_directories(dir);
  StageGuard guard(dir);
  try {
    guard.enter("impute");
    CareerPanel panel = [&] {
      try {
        return read_panel_csv(fs::path(config.panel_path));
      } catch (const std::exception& e) {
        throw IngestError(e.what());
      }
    }();
    MiConfig mi_config = config.mi;
    mi_config.seed = config.seed;
    ImputationRun run = impute(panel, mi_config, config.threads);
    std::vector<std::string> artifacts;
    for (size_t i = 0; i < run.completed.size(); ++i) {
      const std::string name = "completed_" + std::to_string(i + 1) + ".csv";
      write_panel_csv(run.completed[i], dir / name);
      artifacts.push_back(name);
    }
    guard.enter("diagnostics");
    write_diagnostics(run, panel, config, dir, &artifacts);
    write_manifest(dir, "impute", config, artifacts);
    return kOk;
  } catch (const IngestError& e) {
    return guard.fail(e, kIngestFailure);
  } catch (const std::exception& e) {
    return guard.fail(e, kNumericFailure);
  }
}

int run_curve(const PipelineConfig& config) {
  try {
    validate_common(config);
    if (config.panel_path.empty()) throw std::invalid_argument("curve needs --panel");
  } catch (const std::exception& e) {
    std::cerr << "bad config: " << e.what() << "\n";
    return kBadConfig;
  }
  const fs::path dir(config.out_dir);
  fs::create_directories(dir);
  StageGuard guard(dir);
  try {
    guard.enter("curve");
    CareerPanel panel = [&] {
      try {
        return read_panel_csv(fs::path(config.panel_path));
      } catch (const std::exception& e) {
        throw IngestError(e.what());
      }
    }();
    AgingCurve curve = panel_to_curve(panel, config.loess, config.curve_use);
    write_curve_csv(curve, dir / "curve.csv");
    std::vector<std::string> artifacts{"curve.csv"};
    if (config.emit_ops) {
      write_curve_csv(curve_to_ops_units(curve, config.transform), dir / "curve_ops.csv");
      artifacts.push_back("curve_ops.csv");
    }
    svg::write_line_chart(dir / "curve.svg", {"aging curve", "age", "transformed OPS"},
                          {curve_series(curve, "loess fit", "#1f77b4")});
    artifacts.push_back("curve.svg");
    write_manifest(dir, "curve", config, artifacts);
    return kOk;
  } catch (const IngestError& e) {
    return guard.fail(e, kIngestFailure);
  } catch (const std::exception& e) {
    return guard.fail(e, kNumericFailure);
  }
}

}  // namespace agecurve
