#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string_view>

#include "impdens/grid_kernel.hpp"
#include "impdens/svd_sparse.hpp"

namespace impdens {

enum class SolverMethod {
  // Exact dual active-set quadratic programming (default).
  ActiveSet,
  // Three-block ADMM with closed-form sub-steps.
  Admm,
};

std::string_view to_string(SolverMethod method);
SolverMethod parse_solver_method(std::string_view name);

struct SolverConfig {
  double lambda = 0.0;
  double rho = 1.0;
  int max_iter = 50000;
  double tol_primal = 1e-10;
  double tol_dual = 1e-10;
  std::optional<Eigen::VectorXd> warm_start;
  SolverMethod method = SolverMethod::ActiveSet;
  // ADMM only: rebalance rho when primal and dual residuals drift apart.
  bool adaptive_rho = true;
};

void validate(const SolverConfig& cfg);

struct SolveResult {
  Eigen::VectorXd phi_prime;
  Density phi;
  // 0.5 * ||U^T Pr - S phi'||^2
  double chi2 = 0.0;
  // 0.5 * ||Pr - U S phi'||^2, includes the energy of Pr outside span(U).
  double chi2_prices = 0.0;
  double objective = 0.0;
  int iterations = 0;
  bool converged = false;
  double primal_residual = 0.0;
  double dual_residual = 0.0;
  // Most negative raw density value before clipping (0 when none).
  double min_raw_density = 0.0;
  SolverMethod method = SolverMethod::ActiveSet;
};

// Minimizes 0.5 * ||U^T Pr - S phi'||^2 + lambda * ||phi'||_1
// subject to V phi' >= 0 and w^T V phi' = 1.
SolveResult solve(const SparseModel& model, const Eigen::VectorXd& prices, const SolverConfig& cfg);

// Euclidean projection onto {phi >= 0, w^T phi = 1}.
Eigen::VectorXd project_feasible(const Eigen::VectorXd& candidate, const Eigen::VectorXd& w);

Eigen::VectorXd soft_threshold(const Eigen::VectorXd& v, double kappa);

// Zeroes negative entries and rescales to unit trapezoid mass. Returns the
// most negative entry seen.
double clip_and_renormalize(Density& phi);

}  // namespace impdens
