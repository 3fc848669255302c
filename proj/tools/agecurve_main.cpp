// agecurve: aging-curve estimation under player dropout.
//
// Subcommands: fit, simulate, impute, curve, pipeline-sim, pipeline-mlb.
// Flags can also be supplied through a config file (--config, INI format);
// command-line flags override file values.
#include <CLI11.hpp>
#include <string>

#include "agecurve/pipeline.hpp"

namespace {

void add_common_options(CLI::App* cmd, agecurve::PipelineConfig* config) {
  cmd->add_option("--out", config->out_dir, "output directory")->required();
  cmd->add_option("--seed", config->seed, "root seed for all random streams");
  cmd->add_option("--age-min", config->grid.min_age, "first age of the career window");
  cmd->add_option("--age-max", config->grid.max_age, "last age of the career window");
  cmd->add_option("--scale-min", config->transform.scale_min, "OPS scaling lower bound");
  cmd->add_option("--scale-max", config->transform.scale_max, "OPS scaling upper bound");
  cmd->add_option("--threads", config->threads, "worker threads for imputation chains");
}

void add_loess_options(CLI::App* cmd, agecurve::PipelineConfig* config) {
  cmd->add_option("--span", config->loess.span, "loess span in (0, 1]");
  cmd->add_option("--degree", config->loess.degree, "loess local polynomial degree (1 or 2)");
}

void add_mi_options(CLI::App* cmd, agecurve::PipelineConfig* config) {
  cmd->add_option("--m", config->mi.m, "number of imputations");
  cmd->add_option("--iters", config->mi.n_iter, "Gibbs iterations per imputation");
  cmd->add_option("--level", config->level, "confidence level for pooled intervals");
}

void add_ingest_options(CLI::App* cmd, agecurve::PipelineConfig* config, bool required) {
  auto* batting = cmd->add_option("--batting", config->batting_path, "Lahman Batting CSV");
  auto* people = cmd->add_option("--people", config->people_path, "Lahman People CSV");
  if (required) {
    batting->required();
    people->required();
  }
  cmd->add_option("--min-pa", config->min_pa, "plate appearances needed for an observed season");
  cmd->add_option("--min-debut", config->min_debut, "earliest debut year kept in the sample");
}

void add_dropout_options(CLI::App* cmd, agecurve::PipelineConfig* config,
                         std::string* mechanism) {
  cmd->add_option("--mechanism", *mechanism, "dropout mechanism: rolling4 | early | random30");
  cmd->add_option("--threshold", config->dropout.threshold, "dropout OPS threshold");
  cmd->add_option("--retire-prob", config->dropout.retire_prob,
                  "retirement probability for random30");
  cmd->add_option("--retire-age", config->dropout.retire_age, "retirement age for random30");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"aging-curve estimation under player dropout"};
  app.require_subcommand(1);
  // INI config file; subcommand options live in [subcommand] sections and
  // command-line flags override file values
  app.set_config("--config", "", "read options from an INI config file");

  agecurve::PipelineConfig config;
  std::string mechanism = "early";
  std::string use = "observed";

  CLI::App* fit = app.add_subcommand("fit", "fit the random-intercept model to Lahman data");
  add_common_options(fit, &config);
  add_ingest_options(fit, &config, true);

  CLI::App* simulate = app.add_subcommand("simulate", "simulate careers from a fitted model");
  add_common_options(simulate, &config);
  simulate->add_option("--fit", config.fit_path, "fitted model file")->required();
  simulate->add_option("--n-players", config.n_players, "number of simulated careers");

  CLI::App* impute = app.add_subcommand("impute", "multiply impute a panel's missing cells");
  add_common_options(impute, &config);
  impute->add_option("--panel", config.panel_path, "panel CSV with missing cells")->required();
  add_mi_options(impute, &config);
  add_loess_options(impute, &config);

  CLI::App* curve = app.add_subcommand("curve", "loess aging curve from a panel");
  add_common_options(curve, &config);
  curve->add_option("--panel", config.panel_path, "panel CSV")->required();
  curve->add_option("--use", use, "cells to smooth: observed | all");
  curve->add_flag("--ops", config.emit_ops, "also write the curve in OPS units");
  add_loess_options(curve, &config);

  CLI::App* psim = app.add_subcommand("pipeline-sim",
                                      "simulation study: fit, simulate, dropout, impute, pool");
  add_common_options(psim, &config);
  psim->add_option("--fit", config.fit_path, "fitted model file (skips the fitting stage)");
  add_ingest_options(psim, &config, false);
  psim->add_option("--n-players", config.n_players, "number of simulated careers");
  add_dropout_options(psim, &config, &mechanism);
  add_mi_options(psim, &config);
  add_loess_options(psim, &config);

  CLI::App* pmlb = app.add_subcommand("pipeline-mlb",
                                      "application pipeline over real Batting/People files");
  add_common_options(pmlb, &config);
  add_ingest_options(pmlb, &config, true);
  add_mi_options(pmlb, &config);
  add_loess_options(pmlb, &config);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : agecurve::kBadConfig;
  }

  try {
    config.dropout.mechanism = agecurve::dropout_mechanism_from_string(mechanism);
  } catch (const std::exception& e) {
    std::cerr << e.what() << "\n";
    return agecurve::kBadConfig;
  }
  if (use == "all") {
    config.curve_use = agecurve::CellUse::kAll;
  } else if (use != "observed") {
    std::cerr << "unknown --use value: " << use << "\n";
    return agecurve::kBadConfig;
  }

  if (fit->parsed()) return agecurve::run_fit(config);
  if (simulate->parsed()) return agecurve::run_simulate(config);
  if (impute->parsed()) return agecurve::run_impute(config);
  if (curve->parsed()) return agecurve::run_curve(config);
  if (psim->parsed()) return agecurve::run_pipeline_sim(config);
  if (pmlb->parsed()) return agecurve::run_pipeline_mlb(config);
  return agecurve::kBadConfig;
}
