#include "impdens/svd_sparse.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "format.hpp"
#include "impdens/error.hpp"

namespace impdens {

double SparseModel::condition() const {
  if (s.size() == 0 || s(s.size() - 1) <= 0.0) return std::numeric_limits<double>::infinity();
  return s(0) / s(s.size() - 1);
}

SvdFactors decompose(const Eigen::MatrixXd& g, std::optional<Grid> grid) {
  if (g.size() == 0) throw Error(ErrorCode::DimensionMismatch, "empty matrix");
  if (!g.allFinite()) throw Error(ErrorCode::InvalidArgument, "matrix has non-finite entries");
  if (grid && grid->size() != g.cols()) {
    throw Error(ErrorCode::GridMismatch, "grid size differs from matrix column count");
  }
  Eigen::BDCSVD<Eigen::MatrixXd> svd(g, Eigen::ComputeThinU | Eigen::ComputeThinV);
  if (svd.info() != Eigen::Success) {
    throw Error(ErrorCode::NumericalFailure, "SVD did not converge");
  }
  SvdFactors f{svd.matrixU(), svd.singularValues(), svd.matrixV(), std::move(grid)};
  if (!f.u.allFinite() || !f.s.allFinite() || !f.v.allFinite()) {
    throw Error(ErrorCode::NumericalFailure, "SVD produced non-finite factors");
  }
  for (Eigen::Index k = 0; k < f.s.size(); ++k) {
    if (f.v.col(k).sum() < 0.0) {
      f.v.col(k) *= -1.0;
      f.u.col(k) *= -1.0;
    }
  }
  return f;
}

SvdFactors decompose(const KernelMatrix& kernel) {
  return decompose(weighted_system(kernel).matrix, kernel.grid);
}

SparseModel truncate(const SvdFactors& f, Eigen::Index rank) {
  if (rank < 1 || rank > f.s.size()) {
    throw Error(ErrorCode::RankOutOfRange, "rank " + std::to_string(rank) + " outside [1, " +
                                               std::to_string(f.s.size()) + "]");
  }
  return {f.u.leftCols(rank), f.s.head(rank), f.v.leftCols(rank), f.grid};
}

double condition_number(const SvdFactors& f) {
  if (f.s.size() == 0) throw Error(ErrorCode::SingularKernel, "no singular values");
  const double last = f.s(f.s.size() - 1);
  if (last <= 1e-300) throw Error(ErrorCode::SingularKernel, "smallest singular value is zero");
  return f.s(0) / last;
}

Eigen::Index numerical_rank(const SvdFactors& f) {
  if (f.s.size() == 0) return 0;
  const double cut = kNumericalZeroRatio * f.s(0);
  Eigen::Index r = 0;
  while (r < f.s.size() && f.s(r) >= cut && f.s(r) > 0.0) ++r;
  return r;
}

Eigen::MatrixXd reconstruct(const SvdFactors& f) {
  return f.u * f.s.asDiagonal() * f.v.transpose();
}

Eigen::MatrixXd reconstruct(const SparseModel& model) {
  return model.u * model.s.asDiagonal() * model.v.transpose();
}

Eigen::VectorXd transform_prices(const SparseModel& model, const Eigen::VectorXd& prices) {
  if (prices.size() != model.u.rows()) {
    throw Error(ErrorCode::DimensionMismatch, "price vector length differs from quote count");
  }
  return model.u.transpose() * prices;
}

Eigen::VectorXd expand_transformed(const SparseModel& model, const Eigen::VectorXd& phi_prime) {
  if (phi_prime.size() != model.rank()) {
    throw Error(ErrorCode::DimensionMismatch, "transformed density length differs from rank");
  }
  return model.v * phi_prime;
}

Density density_from_transformed(const SparseModel& model, const Eigen::VectorXd& phi_prime) {
  if (!model.grid) throw Error(ErrorCode::GridMismatch, "model carries no grid");
  return {*model.grid, expand_transformed(model, phi_prime)};
}

KernelMatrix call_only_kernel(const Grid& grid, Eigen::Index n_strikes, double rate, double tau) {
  if (n_strikes < 1) throw Error(ErrorCode::EmptyQuotes, "need at least one strike");
  std::vector<Quote> quotes;
  quotes.reserve(static_cast<std::size_t>(n_strikes));
  const double span = grid.x_max() - grid.x_min();
  for (Eigen::Index j = 1; j <= n_strikes; ++j) {
    const double k = grid.x_min() + span * static_cast<double>(j) / static_cast<double>(n_strikes + 1);
    quotes.push_back({OptionKind::Call, k, 0.0, 1.0});
  }
  MarketContext ctx{rate, tau, 1.0, std::exp(rate * tau)};
  return build_kernel(quotes, grid, ctx);
}

std::vector<ConditionPoint> condition_series(const Grid& grid,
                                             const std::vector<Eigen::Index>& strike_counts) {
  std::vector<ConditionPoint> out;
  out.reserve(strike_counts.size());
  for (Eigen::Index m : strike_counts) {
    out.push_back({m, condition_number(decompose(call_only_kernel(grid, m)))});
  }
  return out;
}

Eigen::VectorXd normalized_singular_values(const SvdFactors& f) {
  if (f.s.size() == 0 || f.s(0) <= 0.0) {
    throw Error(ErrorCode::SingularKernel, "leading singular value is zero");
  }
  return f.s / f.s(0);
}

PowerLawFit fit_power_law(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size()) throw Error(ErrorCode::DimensionMismatch, "x and y lengths differ");
  if (x.size() < 2) throw Error(ErrorCode::InvalidArgument, "need at least two points");
  const auto n = static_cast<double>(x.size());
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] > 0.0) || !(y[i] > 0.0)) {
      throw Error(ErrorCode::InvalidArgument, "power-law fit needs positive data");
    }
    const double lx = std::log(x[i]);
    const double ly = std::log(y[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  const double denom = n * sxx - sx * sx;
  if (denom <= 0.0) throw Error(ErrorCode::InvalidArgument, "x values must not all coincide");
  const double k = (n * sxy - sx * sy) / denom;
  return {k, (sy - k * sx) / n};
}

void write_singular_values_csv(std::ostream& os, const Eigen::VectorXd& normalized) {
  os << "i,s_over_s1\n";
  for (Eigen::Index i = 0; i < normalized.size(); ++i) {
    os << (i + 1) << ',' << detail::fmt(normalized(i)) << '\n';
  }
}

void write_condition_csv(std::ostream& os, const std::vector<ConditionPoint>& series) {
  os << "M,C\n";
  for (const auto& p : series) os << p.n_strikes << ',' << detail::fmt(p.condition) << '\n';
}

}  // namespace impdens
