#pragma once

#include <Eigen/Dense>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "impdens/diagnostics.hpp"
#include "impdens/error.hpp"
#include "impdens/interp.hpp"
#include "impdens/pricing.hpp"
#include "impdens/solver.hpp"

namespace impdens {

enum class RunMode { Fit, Scan };

// Every optional field falls back to the preset value, then to the built-in default.
struct RunConfig {
  RunMode mode = RunMode::Fit;
  std::optional<std::string> preset;
  std::optional<std::string> input_path;
  std::string output_dir = "impdens_out";

  std::optional<double> x_min;
  std::optional<double> x_max;
  std::optional<Eigen::Index> n_points;
  std::optional<Eigen::Index> rank;
  std::vector<double> lambdas;

  SolverConfig solver;
  bool warm_start = true;
  unsigned threads = 1;
  double elbow_epsilon = 0.10;
  std::optional<double> chi2_budget;

  std::optional<double> spot;
  std::optional<double> forward;
  std::optional<double> rate;
  std::optional<double> tau;
  std::optional<double> rescale_factor;
  std::optional<ModelFamily> quote_family;

  std::optional<ModelFamily> smile_family;
  int smile_points = 201;
  std::optional<double> smile_min;
  std::optional<double> smile_max;
};

struct PipelineOutcome {
  int exit_code = 0;
  std::string message;
  std::vector<std::string> artifacts;
  ScanResult scan;
  std::optional<Density> density;
  std::optional<SmileCurve> smile;
  double rescale_factor = 1.0;
};

namespace exit_code {
constexpr int kOk = 0;
constexpr int kValidation = 1;
constexpr int kNoConvergence = 2;
constexpr int kIo = 3;
}  // namespace exit_code

int exit_code_for(ErrorCode code);

PipelineOutcome run_pipeline(const RunConfig& cfg, std::ostream* log = nullptr);

struct SmileRequest {
  std::string density_path;
  std::string output_path;
  MarketContext ctx;
  ModelFamily family = ModelFamily::Bachelier;
  std::vector<double> strikes;
  std::optional<std::pair<double, double>> quoted_range;
};
PipelineOutcome run_smile(const SmileRequest& req, std::ostream* log = nullptr);

struct DiagnoseRequest {
  std::string output_dir = "impdens_diag";
  double x_min = 0.0;
  double x_max = 1.0;
  Eigen::Index n_condition = 10000;
  std::vector<Eigen::Index> strike_counts{10, 20, 40, 80};
  Eigen::Index n_spectrum = 1000;
  Eigen::Index spectrum_strikes = 25;
  int fit_count = 10;
};
PipelineOutcome run_diagnose(const DiagnoseRequest& req, std::ostream* log = nullptr);

}  // namespace impdens
