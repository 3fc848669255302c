// End-to-end pipelines behind the CLI subcommands: the simulation study
// (fit -> simulate -> dropout -> impute -> curves -> pool -> diagnostics) and
// the application pipeline over real Batting/People files. Every artifact is
// a CSV or SVG under the output directory; a JSON manifest records all
// parameters and the root seed.
#pragma once

#include <cstdint>
#include <string>

#include "agecurve/core.hpp"
#include "agecurve/curve.hpp"
#include "agecurve/mi.hpp"
#include "agecurve/sim.hpp"

namespace agecurve {

// Process exit codes shared by all subcommands.
enum ExitCode : int {
  kOk = 0,
  kBadConfig = 2,
  kIngestFailure = 3,
  kNumericFailure = 4,
};

struct PipelineConfig {
  std::string batting_path;
  std::string people_path;
  std::string fit_path;    // pre-fitted model file (alternative to raw CSVs)
  std::string panel_path;  // input panel for impute/curve stages
  std::string out_dir;

  uint64_t seed = 20240817;
  int n_players = 1000;
  MiConfig mi;
  DropoutSpec dropout;
  LoessSpec loess;
  TransformSpec transform;
  AgeGrid grid;
  int min_pa = 100;
  int min_debut = 1985;
  double level = 0.95;
  int threads = 1;
  CellUse curve_use = CellUse::kObservedOnly;
  bool emit_ops = false;  // also express single-stage curve output in OPS units
};

int run_fit(const PipelineConfig& config);
int run_simulate(const PipelineConfig& config);
int run_impute(const PipelineConfig& config);
int run_curve(const PipelineConfig& config);
int run_pipeline_sim(const PipelineConfig& config);
int run_pipeline_mlb(const PipelineConfig& config);

}  // namespace agecurve
