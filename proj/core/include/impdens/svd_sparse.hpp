#pragma once

#include <Eigen/Dense>
#include <optional>
#include <ostream>
#include <vector>

#include "impdens/grid_kernel.hpp"

namespace impdens {

// Thin factorization G = U diag(s) V^T with s descending. Columns are
// oriented so that every right singular vector has a nonnegative sum.
struct SvdFactors {
  Eigen::MatrixXd u;
  Eigen::VectorXd s;
  Eigen::MatrixXd v;
  std::optional<Grid> grid;
};

struct SparseModel {
  Eigen::MatrixXd u;
  Eigen::VectorXd s;
  Eigen::MatrixXd v;
  std::optional<Grid> grid;

  Eigen::Index rank() const { return s.size(); }
  Eigen::Index n_quotes() const { return u.rows(); }
  Eigen::Index n_nodes() const { return v.rows(); }
  double condition() const;
};

constexpr double kNumericalZeroRatio = 1e-14;

SvdFactors decompose(const Eigen::MatrixXd& g, std::optional<Grid> grid = std::nullopt);
// Factors the weighted kernel rows.
SvdFactors decompose(const KernelMatrix& kernel);

SparseModel truncate(const SvdFactors& f, Eigen::Index rank);

double condition_number(const SvdFactors& f);
// Count of singular values at or above kNumericalZeroRatio * s1.
Eigen::Index numerical_rank(const SvdFactors& f);

Eigen::MatrixXd reconstruct(const SvdFactors& f);
Eigen::MatrixXd reconstruct(const SparseModel& model);

Eigen::VectorXd transform_prices(const SparseModel& model, const Eigen::VectorXd& prices);
Eigen::VectorXd expand_transformed(const SparseModel& model, const Eigen::VectorXd& phi_prime);
Density density_from_transformed(const SparseModel& model, const Eigen::VectorXd& phi_prime);

// Conditioning studies on call-only kernels with M interior, equally spaced strikes.
KernelMatrix call_only_kernel(const Grid& grid, Eigen::Index n_strikes, double rate = 0.0,
                              double tau = 1.0);

struct ConditionPoint {
  Eigen::Index n_strikes = 0;
  double condition = 0.0;
};
std::vector<ConditionPoint> condition_series(const Grid& grid,
                                             const std::vector<Eigen::Index>& strike_counts);

Eigen::VectorXd normalized_singular_values(const SvdFactors& f);

// y ~ a * x^k by least squares on log-log data.
struct PowerLawFit {
  double exponent = 0.0;
  double log_prefactor = 0.0;
};
PowerLawFit fit_power_law(const std::vector<double>& x, const std::vector<double>& y);

void write_singular_values_csv(std::ostream& os, const Eigen::VectorXd& normalized);
void write_condition_csv(std::ostream& os, const std::vector<ConditionPoint>& series);

}  // namespace impdens
