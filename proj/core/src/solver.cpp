#include "impdens/solver.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <string>

#include "active_set.hpp"
#include "admm.hpp"
#include "impdens/error.hpp"

namespace impdens {

std::string_view to_string(SolverMethod method) {
  return method == SolverMethod::ActiveSet ? "active-set" : "admm";
}

SolverMethod parse_solver_method(std::string_view name) {
  std::string s(name);
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char ch) { return static_cast<char>(std::tolower(ch)); });
  if (s == "active-set" || s == "activeset" || s == "active_set" || s == "exact") {
    return SolverMethod::ActiveSet;
  }
  if (s == "admm") return SolverMethod::Admm;
  throw Error(ErrorCode::InvalidArgument, "unknown solver method '" + std::string(name) + "'");
}

void validate(const SolverConfig& cfg) {
  if (!(cfg.lambda >= 0.0) || !std::isfinite(cfg.lambda)) {
    throw Error(ErrorCode::InvalidArgument, "lambda must be finite and nonnegative");
  }
  if (!(cfg.rho > 0.0) || !std::isfinite(cfg.rho)) {
    throw Error(ErrorCode::InvalidArgument, "rho must be positive");
  }
  if (!(cfg.tol_primal > 0.0) || !(cfg.tol_dual > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "tolerances must be positive");
  }
  if (cfg.max_iter < 1) throw Error(ErrorCode::InvalidArgument, "max_iter must be at least 1");
}

SolveResult solve(const SparseModel& model, const Eigen::VectorXd& prices, const SolverConfig& cfg) {
  validate(cfg);
  if (!model.grid) throw Error(ErrorCode::GridMismatch, "model carries no grid");
  if (model.grid->size() != model.n_nodes()) {
    throw Error(ErrorCode::GridMismatch, "model grid differs from basis length");
  }
  if (!prices.allFinite()) throw Error(ErrorCode::InvalidArgument, "prices must be finite");
  const Eigen::VectorXd b = transform_prices(model, prices);
  if (model.rank() == 0 || !(model.s(model.rank() - 1) > kNumericalZeroRatio * model.s(0))) {
    throw Error(ErrorCode::SingularKernel, "rank exceeds the numerical rank of the kernel");
  }
  if (cfg.warm_start && cfg.warm_start->size() != model.rank()) {
    throw Error(ErrorCode::DimensionMismatch, "warm start length differs from rank");
  }
  const Eigen::VectorXd& w = model.grid->weights();
  const Eigen::VectorXd mass_row = model.v.transpose() * w;

  detail::QpProblem prob{&b, &model.s, &model.v, &mass_row, cfg.lambda};
  const Eigen::VectorXd warm = cfg.warm_start ? *cfg.warm_start : Eigen::VectorXd();
  const Eigen::VectorXd* warm_ptr = cfg.warm_start ? &warm : nullptr;

  detail::QpOutcome qp;
  if (cfg.method == SolverMethod::ActiveSet) {
    qp = detail::solve_active_set(prob, warm_ptr, cfg.max_iter);
  } else {
    if (!(w.array() >= 0.0).all() || !(w.sum() > 0.0)) {
      throw Error(ErrorCode::InfeasibleConstraints, "grid weights cannot carry unit mass");
    }
    qp = detail::solve_admm(prob, w, warm_ptr,
                            {cfg.rho, cfg.max_iter, cfg.tol_primal, cfg.tol_dual, cfg.adaptive_rho});
  }

  SolveResult res;
  res.method = cfg.method;
  res.phi_prime = qp.x;
  const Eigen::VectorXd fitted = model.s.cwiseProduct(qp.x);
  res.chi2 = 0.5 * (b - fitted).squaredNorm();
  res.chi2_prices = 0.5 * (prices - model.u * fitted).squaredNorm();
  res.objective = res.chi2 + cfg.lambda * qp.x.lpNorm<1>();
  res.iterations = qp.iterations;
  res.primal_residual = qp.primal_residual;
  res.dual_residual = qp.dual_residual;
  res.phi = density_from_transformed(model, qp.x);
  res.min_raw_density = clip_and_renormalize(res.phi);
  res.converged = !qp.hit_limit && qp.primal_residual <= cfg.tol_primal &&
                  qp.dual_residual <= cfg.tol_dual && res.phi.mass() > 0.0;
  return res;
}

}  // namespace impdens
