#pragma once

#include <Eigen/Dense>
#include <optional>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "impdens/grid_kernel.hpp"
#include "impdens/solver.hpp"
#include "impdens/svd_sparse.hpp"

namespace impdens {

// 0.5 * ||U^T Pr - S phi'||^2
double chi_squared(const SparseModel& model, const Eigen::VectorXd& prices,
                   const Eigen::VectorXd& phi_prime);

// -ln(w^T sqrt(p q)); +inf when the overlap underflows 1e-300.
double bhattacharyya(const Density& p, const Density& q);

int count_significant(const Eigen::VectorXd& phi_prime, double threshold);

struct ScanEntry {
  double lambda = 0.0;
  double chi2 = 0.0;
  double objective = 0.0;
  std::optional<double> d_b;
  std::vector<std::pair<double, int>> significant_counts;
  bool converged = false;
  std::optional<SolveResult> solve;
  std::string error;

  int count_at(double threshold) const;
};

struct ScanOptions {
  std::vector<double> thresholds{1e-2, 1e-3};
  bool warm_start = true;
  // Used only when warm_start is off.
  unsigned threads = 1;
  double elbow_epsilon = 0.10;
  std::optional<double> chi2_budget;
};

struct ScanResult {
  std::vector<ScanEntry> entries;
  std::optional<double> selected_lambda;

  const ScanEntry* find(double lambda) const;
};

ScanResult lambda_scan(const SparseModel& model, const Eigen::VectorXd& prices,
                       std::vector<double> lambdas, const SolverConfig& cfg_template,
                       const std::optional<Density>& reference = std::nullopt,
                       const ScanOptions& opts = {});

// Largest lambda whose chi2 is within (1 + epsilon) of the scan minimum.
double select_elbow(const ScanResult& scan, double epsilon = 0.10);
// Largest lambda whose chi2 does not exceed the budget.
double select_by_budget(const ScanResult& scan, double chi2_budget);

std::vector<double> log_spaced(double lo, double hi, int count);
std::vector<double> default_lambda_grid();

void write_scan_csv(std::ostream& os, const ScanResult& scan);

}  // namespace impdens
