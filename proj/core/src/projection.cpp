#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "impdens/error.hpp"
#include "impdens/solver.hpp"

namespace impdens {

Eigen::VectorXd soft_threshold(const Eigen::VectorXd& v, double kappa) {
  if (!(kappa >= 0.0)) throw Error(ErrorCode::InvalidArgument, "threshold must be nonnegative");
  Eigen::VectorXd out(v.size());
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    const double mag = std::abs(v(i)) - kappa;
    out(i) = mag > 0.0 ? std::copysign(mag, v(i)) : 0.0;
  }
  return out;
}

// The projection is max(0, v - theta * w) for the unique theta giving unit
// mass; theta is found by sweeping the sorted breakpoints v_j / w_j.
Eigen::VectorXd project_feasible(const Eigen::VectorXd& candidate, const Eigen::VectorXd& w) {
  if (candidate.size() != w.size()) {
    throw Error(ErrorCode::DimensionMismatch, "candidate and weights differ in length");
  }
  if (!candidate.allFinite() || !w.allFinite()) {
    throw Error(ErrorCode::InvalidArgument, "non-finite projection input");
  }
  if ((w.array() < 0.0).any()) throw Error(ErrorCode::InvalidArgument, "weights must be nonnegative");
  if (!(w.sum() > 0.0)) throw Error(ErrorCode::InfeasibleConstraints, "weights are identically zero");

  std::vector<Eigen::Index> idx;
  for (Eigen::Index j = 0; j < w.size(); ++j) {
    if (w(j) > 0.0) idx.push_back(j);
  }
  std::sort(idx.begin(), idx.end(), [&](Eigen::Index a, Eigen::Index b) {
    return candidate(a) / w(a) > candidate(b) / w(b);
  });

  double sum_wv = 0.0;
  double sum_ww = 0.0;
  double theta = 0.0;
  for (std::size_t k = 0; k < idx.size(); ++k) {
    const Eigen::Index j = idx[k];
    sum_wv += w(j) * candidate(j);
    sum_ww += w(j) * w(j);
    theta = (sum_wv - 1.0) / sum_ww;
    const bool last = k + 1 == idx.size();
    if (last || candidate(idx[k + 1]) / w(idx[k + 1]) <= theta) break;
  }

  Eigen::VectorXd out(candidate.size());
  for (Eigen::Index j = 0; j < candidate.size(); ++j) {
    out(j) = std::max(0.0, candidate(j) - theta * w(j));
  }
  return out;
}

double clip_and_renormalize(Density& phi) {
  double most_negative = 0.0;
  for (Eigen::Index j = 0; j < phi.values.size(); ++j) {
    if (phi.values(j) < 0.0) {
      most_negative = std::min(most_negative, phi.values(j));
      phi.values(j) = 0.0;
    }
  }
  const double mass = phi.mass();
  if (mass > 0.0 && std::isfinite(mass)) phi.values /= mass;
  return most_negative;
}

}  // namespace impdens
