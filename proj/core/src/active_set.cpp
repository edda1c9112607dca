#include "active_set.hpp"

#include <cmath>
#include <limits>
#include <vector>

#include "impdens/error.hpp"

namespace impdens::detail {

namespace {

enum class Kind { Mass, Density, Sign };

struct Constraint {
  Kind kind;
  Eigen::Index index;
  Eigen::VectorXd normal;  // unit length, y-space
  double rhs;
};

// Orthogonal J and upper-triangular R with active normals = J[:, :q] R.
class Factorization {
 public:
  explicit Factorization(Eigen::Index dim)
      : j_(Eigen::MatrixXd::Identity(dim, dim)), r_(Eigen::MatrixXd::Zero(dim, dim)) {}

  Eigen::Index active() const { return q_; }
  Eigen::Index dim() const { return j_.rows(); }

  // z: component of n in the null space of the active normals.
  // r: coefficients of the remaining part in the active normals.
  void directions(const Eigen::VectorXd& n, Eigen::VectorXd& d, Eigen::VectorXd& z,
                  Eigen::VectorXd& r) const {
    d.noalias() = j_.transpose() * n;
    z.noalias() = j_.rightCols(dim() - q_) * d.tail(dim() - q_);
    r = r_.topLeftCorner(q_, q_).triangularView<Eigen::Upper>().solve(d.head(q_));
  }

  void add(Eigen::VectorXd d) {
    for (Eigen::Index k = dim() - 1; k > q_; --k) {
      const double a = d(k - 1);
      const double b = d(k);
      if (b == 0.0) continue;
      const double h = std::hypot(a, b);
      const double c = a / h;
      const double s = b / h;
      d(k - 1) = h;
      d(k) = 0.0;
      rotate_columns(k - 1, k, c, s);
    }
    r_.col(q_).head(q_ + 1) = d.head(q_ + 1);
    r_.col(q_).tail(dim() - q_ - 1).setZero();
    ++q_;
  }

  void drop(Eigen::Index k) {
    for (Eigen::Index col = k; col + 1 < q_; ++col) r_.col(col) = r_.col(col + 1);
    r_.col(q_ - 1).setZero();
    for (Eigen::Index row = k; row + 1 < q_; ++row) {
      const double a = r_(row, row);
      const double b = r_(row + 1, row);
      if (b == 0.0) continue;
      const double h = std::hypot(a, b);
      const double c = a / h;
      const double s = b / h;
      for (Eigen::Index col = row; col + 1 < q_; ++col) {
        const double top = r_(row, col);
        const double bot = r_(row + 1, col);
        r_(row, col) = c * top + s * bot;
        r_(row + 1, col) = -s * top + c * bot;
      }
      r_(row + 1, row) = 0.0;
      rotate_columns(row, row + 1, c, s);
    }
    --q_;
  }

 private:
  void rotate_columns(Eigen::Index a, Eigen::Index b, double c, double s) {
    for (Eigen::Index i = 0; i < j_.rows(); ++i) {
      const double ja = j_(i, a);
      const double jb = j_(i, b);
      j_(i, a) = c * ja + s * jb;
      j_(i, b) = -s * ja + c * jb;
    }
  }

  Eigen::MatrixXd j_;
  Eigen::MatrixXd r_;
  Eigen::Index q_ = 0;
};

constexpr double kDependenceTol = 1e-15;
constexpr double kFeasTol = 1e-12;

}  // namespace

QpOutcome solve_active_set(const QpProblem& prob, const Eigen::VectorXd* sign_hint, int max_iter) {
  const Eigen::VectorXd& b = *prob.target;
  const Eigen::VectorXd& s = *prob.sing;
  const Eigen::MatrixXd& v = *prob.basis;
  const Eigen::Index q = s.size();
  const Eigen::Index n = v.rows();
  const double lambda = prob.lambda;
  const bool use_signs = lambda > 0.0;

  const Eigen::VectorXd inv_s = s.cwiseInverse();
  const Eigen::MatrixXd vy = v * inv_s.asDiagonal();
  const Eigen::VectorXd vy_norm = vy.rowwise().norm();
  const double vy_scale = vy_norm.maxCoeff();

  Eigen::VectorXd mass_normal = prob.mass_row->cwiseProduct(inv_s);
  const double mass_norm = mass_normal.norm();
  if (!(mass_norm > 0.0) || !std::isfinite(mass_norm)) {
    throw Error(ErrorCode::InfeasibleConstraints, "grid weights cannot carry unit mass");
  }
  mass_normal /= mass_norm;
  double mass_rhs = 1.0 / mass_norm;

  Eigen::VectorXd sigma = Eigen::VectorXd::Ones(q);
  for (Eigen::Index i = 0; i < q; ++i) {
    const double hint = sign_hint ? (*sign_hint)(i) : 0.0;
    const double ref = hint != 0.0 ? hint : b(i);
    sigma(i) = ref < 0.0 ? -1.0 : 1.0;
  }
  const Eigen::VectorXd cap = 2.0 * lambda * inv_s;
  auto target_of = [&](Eigen::Index i) { return b(i) - lambda * sigma(i) * inv_s(i); };

  Eigen::VectorXd c(q);
  for (Eigen::Index i = 0; i < q; ++i) c(i) = target_of(i);
  Eigen::VectorXd y = c;

  std::vector<Constraint> act;
  std::vector<double> mult;
  std::vector<char> density_active(static_cast<std::size_t>(n), 0);
  std::vector<char> sign_active(static_cast<std::size_t>(q), 0);
  Factorization fac(q);

  auto set_active = [&](const Constraint& con, char flag) {
    if (con.kind == Kind::Density) density_active[static_cast<std::size_t>(con.index)] = flag;
    if (con.kind == Kind::Sign) sign_active[static_cast<std::size_t>(con.index)] = flag;
  };
  auto flip_sign = [&](Eigen::Index i) {
    sigma(i) = -sigma(i);
    c(i) = target_of(i);
  };

  Eigen::VectorXd d(q), z(q), r;
  QpOutcome out;
  bool mass_pending = true;
  bool polished = false;
  int iter = 0;

  for (;;) {
    Constraint p{Kind::Mass, 0, Eigen::VectorXd(), 0.0};
    if (mass_pending) {
      if (mass_normal.dot(y) - mass_rhs > 0.0) {
        mass_normal = -mass_normal;
        mass_rhs = -mass_rhs;
      }
      p = {Kind::Mass, 0, mass_normal, mass_rhs};
      mass_pending = false;
    } else {
      const Eigen::VectorXd phi = vy * y;
      const double phi_tol = kFeasTol * std::max(1.0, phi.cwiseAbs().maxCoeff());
      const double sign_tol = kFeasTol * std::max(1.0, y.cwiseAbs().maxCoeff());
      double worst = 0.0;
      Kind worst_kind = Kind::Mass;
      Eigen::Index worst_idx = -1;
      for (Eigen::Index j = 0; j < n; ++j) {
        if (density_active[static_cast<std::size_t>(j)] || vy_norm(j) <= 1e-14 * vy_scale) continue;
        if (phi(j) >= -phi_tol) continue;
        const double slack = phi(j) / vy_norm(j);
        if (slack < worst) {
          worst = slack;
          worst_kind = Kind::Density;
          worst_idx = j;
        }
      }
      if (use_signs) {
        for (Eigen::Index i = 0; i < q; ++i) {
          if (sign_active[static_cast<std::size_t>(i)]) continue;
          const double slack = sigma(i) * y(i);
          if (slack >= -sign_tol) continue;
          if (slack < worst) {
            worst = slack;
            worst_kind = Kind::Sign;
            worst_idx = i;
          }
        }
      }
      if (worst_idx < 0) {
        if (polished) break;
        // Remove drift accumulated along the free directions; active
        // constraint values are unchanged by this move.
        fac.directions(y - c, d, z, r);
        y -= z;
        polished = true;
        continue;
      }
      polished = false;
      if (worst_kind == Kind::Density) {
        p = {Kind::Density, worst_idx, vy.row(worst_idx).transpose() / vy_norm(worst_idx), 0.0};
      } else {
        Eigen::VectorXd e = Eigen::VectorXd::Zero(q);
        e(worst_idx) = sigma(worst_idx);
        p = {Kind::Sign, worst_idx, e, 0.0};
      }
    }

    double tp = 0.0;
    for (;;) {
      if (++iter > max_iter) {
        out.hit_limit = true;
        break;
      }
      fac.directions(p.normal, d, z, r);

      double t1 = std::numeric_limits<double>::infinity();
      Eigen::Index k1 = -1;
      bool k1_cap = false;
      for (std::size_t k = 0; k < act.size(); ++k) {
        const double rk = r(static_cast<Eigen::Index>(k));
        if (act[k].kind == Kind::Mass) continue;
        if (rk > 0.0) {
          const double t = mult[k] / rk;
          if (t < t1) {
            t1 = t;
            k1 = static_cast<Eigen::Index>(k);
            k1_cap = false;
          }
        } else if (act[k].kind == Kind::Sign && rk < 0.0) {
          const double t = (cap(act[k].index) - mult[k]) / (-rk);
          if (t < t1) {
            t1 = t;
            k1 = static_cast<Eigen::Index>(k);
            k1_cap = true;
          }
        }
      }

      const double zn = z.dot(p.normal);
      double t2 = std::numeric_limits<double>::infinity();
      if (zn > kDependenceTol) t2 = -(p.normal.dot(y) - p.rhs) / zn;
      if (t2 < 0.0) t2 = 0.0;
      double t3 = std::numeric_limits<double>::infinity();
      if (p.kind == Kind::Sign) t3 = std::max(0.0, cap(p.index) - tp);

      const double t = std::min({t1, t2, t3});
      if (!std::isfinite(t)) {
        throw Error(ErrorCode::InfeasibleConstraints, "density constraints admit no solution");
      }
      if (std::isfinite(t2)) y += t * z;
      for (std::size_t k = 0; k < act.size(); ++k) mult[k] -= t * r(static_cast<Eigen::Index>(k));
      tp += t;

      if (t == t2) {
        fac.add(d);
        act.push_back(p);
        mult.push_back(tp);
        set_active(p, 1);
        break;
      }
      if (t == t3) {
        flip_sign(p.index);
        break;
      }
      const auto ku = static_cast<std::size_t>(k1);
      if (k1_cap) flip_sign(act[ku].index);
      set_active(act[ku], 0);
      fac.drop(k1);
      act.erase(act.begin() + k1);
      mult.erase(mult.begin() + k1);
    }
    if (out.hit_limit) break;
  }

  out.iterations = iter;
  out.x = y.cwiseProduct(inv_s);

  // KKT check of the returned point: multipliers re-solved on the final
  // active face, stationarity measured off that face.
  Eigen::VectorXd fd(q), fz(q), fr;
  fac.directions(y - c, fd, fz, fr);
  double dual = fz.cwiseAbs().maxCoeff();
  for (std::size_t k = 0; k < act.size(); ++k) {
    const double uk = fr(static_cast<Eigen::Index>(k));
    if (act[k].kind == Kind::Mass) continue;
    dual = std::max(dual, -uk);
    if (act[k].kind == Kind::Sign) dual = std::max(dual, uk - cap(act[k].index));
  }
  out.dual_residual = dual;

  const Eigen::VectorXd phi = v * out.x;
  double primal = std::abs(prob.mass_row->dot(out.x) - 1.0);
  primal = std::max(primal, std::max(0.0, -phi.minCoeff()));
  if (use_signs) primal = std::max(primal, std::max(0.0, -(sigma.cwiseProduct(y)).minCoeff()));
  out.primal_residual = primal;
  return out;
}

}  // namespace impdens::detail
