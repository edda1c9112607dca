#include "admm.hpp"

#include <cmath>

#include "impdens/solver.hpp"

namespace impdens::detail {

QpOutcome solve_admm(const QpProblem& prob, const Eigen::VectorXd& weights,
                     const Eigen::VectorXd* warm_start, const AdmmSettings& settings) {
  const Eigen::VectorXd& b = *prob.target;
  const Eigen::VectorXd& s = *prob.sing;
  const Eigen::MatrixXd& v = *prob.basis;
  const Eigen::Index q = s.size();

  Eigen::VectorXd x = warm_start ? *warm_start : Eigen::VectorXd::Zero(q);
  Eigen::VectorXd z1 = soft_threshold(x, 0.0);
  Eigen::VectorXd z2 = project_feasible(v * x, weights);
  Eigen::VectorXd u1 = Eigen::VectorXd::Zero(q);
  Eigen::VectorXd u2 = Eigen::VectorXd::Zero(v.rows());
  const Eigen::VectorXd sb = s.cwiseProduct(b);
  const Eigen::VectorXd s2 = s.cwiseAbs2();
  double rho = settings.rho;

  QpOutcome out;
  for (int it = 1; it <= settings.max_iter; ++it) {
    const Eigen::VectorXd rhs = sb + rho * (z1 - u1) + rho * (v.transpose() * (z2 - u2));
    x = rhs.cwiseQuotient((s2.array() + 2.0 * rho).matrix());
    const Eigen::VectorXd vx = v * x;

    const Eigen::VectorXd z1_old = z1;
    const Eigen::VectorXd z2_old = z2;
    z1 = soft_threshold(x + u1, prob.lambda / rho);
    z2 = project_feasible(vx + u2, weights);
    u1 += x - z1;
    u2 += vx - z2;

    const double primal = std::sqrt((x - z1).squaredNorm() + (vx - z2).squaredNorm());
    const double dual = rho * ((z1 - z1_old) + v.transpose() * (z2 - z2_old)).norm();
    out.iterations = it;
    out.primal_residual = primal;
    out.dual_residual = dual;
    if (primal <= settings.tol_primal && dual <= settings.tol_dual) break;

    if (settings.adaptive_rho) {
      if (primal > 10.0 * dual) {
        rho *= 2.0;
        u1 /= 2.0;
        u2 /= 2.0;
      } else if (dual > 10.0 * primal) {
        rho /= 2.0;
        u1 *= 2.0;
        u2 *= 2.0;
      }
    }
  }
  out.hit_limit = !(out.primal_residual <= settings.tol_primal &&
                    out.dual_residual <= settings.tol_dual);
  out.x = x;
  return out;
}

}  // namespace impdens::detail
