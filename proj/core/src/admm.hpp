#pragma once

#include <Eigen/Dense>

#include "active_set.hpp"

namespace impdens::detail {

struct AdmmSettings {
  double rho = 1.0;
  int max_iter = 50000;
  double tol_primal = 1e-10;
  double tol_dual = 1e-10;
  bool adaptive_rho = true;
};

// Splitting x = z1 (L1 block) and V x = z2 (feasible-density block) in
// scaled dual form. The x-update is diagonal because V^T V = I.
QpOutcome solve_admm(const QpProblem& prob, const Eigen::VectorXd& weights,
                     const Eigen::VectorXd* warm_start, const AdmmSettings& settings);

}  // namespace impdens::detail
