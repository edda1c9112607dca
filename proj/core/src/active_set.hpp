#pragma once

#include <Eigen/Dense>

namespace impdens::detail {

struct QpProblem {
  const Eigen::VectorXd* target;    // U^T Pr
  const Eigen::VectorXd* sing;      // s, all > 0
  const Eigen::MatrixXd* basis;     // V, N x Q
  const Eigen::VectorXd* mass_row;  // V^T w
  double lambda = 0.0;
};

struct QpOutcome {
  Eigen::VectorXd x;
  int iterations = 0;
  bool hit_limit = false;
  double primal_residual = 0.0;
  double dual_residual = 0.0;
};

// Goldfarb-Idnani dual active-set method in the scaled variable y = S x,
// where the Hessian is the identity. The L1 term is handled orthant by
// orthant: sign constraints sigma_i y_i >= 0 carry multipliers capped at
// 2 lambda / s_i, and reaching the cap moves the iterate into the adjacent
// orthant instead of keeping the constraint.
QpOutcome solve_active_set(const QpProblem& prob, const Eigen::VectorXd* sign_hint, int max_iter);

}  // namespace impdens::detail
