#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <functional>
#include <limits>
#include <random>
#include <vector>

// Independent reference implementations used only by tests.
namespace oracle {

// Trapezoid rule on n uniform points.
inline double trapezoid(const std::function<double(double)>& f, double a, double b, int n) {
  const double h = (b - a) / (n - 1);
  double acc = 0.5 * (f(a) + f(b));
  for (int i = 1; i < n - 1; ++i) acc += f(a + h * i);
  return acc * h;
}

inline double gauss_pdf(double x, double mu, double sd) {
  const double z = (x - mu) / sd;
  return std::exp(-0.5 * z * z) / (sd * std::sqrt(2.0 * M_PI));
}

// Bhattacharyya distance between N(m1, s1^2) and N(m2, s2^2).
inline double gaussian_bhattacharyya(double m1, double s1, double m2, double s2) {
  const double v = s1 * s1 + s2 * s2;
  return 0.25 * (m1 - m2) * (m1 - m2) / v + 0.5 * std::log(v / (2.0 * s1 * s2));
}

// Euclidean projection onto {x >= 0, w^T x = 1} by enumerating every support.
inline Eigen::VectorXd projection_bruteforce(const Eigen::VectorXd& v, const Eigen::VectorXd& w) {
  const int n = static_cast<int>(v.size());
  double best = std::numeric_limits<double>::infinity();
  Eigen::VectorXd best_x = Eigen::VectorXd::Zero(n);
  for (int mask = 1; mask < (1 << n); ++mask) {
    double wv = 0.0, ww = 0.0;
    for (int j = 0; j < n; ++j) {
      if (mask & (1 << j)) {
        wv += w(j) * v(j);
        ww += w(j) * w(j);
      }
    }
    if (ww == 0.0) continue;
    const double theta = (wv - 1.0) / ww;
    Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
    bool ok = true;
    for (int j = 0; j < n; ++j) {
      if (mask & (1 << j)) {
        x(j) = v(j) - theta * w(j);
        if (x(j) < -1e-14) ok = false;
      }
    }
    if (!ok) continue;
    const double d = (x - v).squaredNorm();
    if (d < best) {
      best = d;
      best_x = x.cwiseMax(0.0);
    }
  }
  return best_x;
}

// min 0.5 ||G x - p||^2 s.t. x >= 0, w^T x = 1, by solving the equality-
// constrained least squares on every support and keeping the best feasible one.
inline Eigen::VectorXd nnls_bruteforce(const Eigen::MatrixXd& g, const Eigen::VectorXd& p,
                                       const Eigen::VectorXd& w) {
  const int n = static_cast<int>(g.cols());
  double best = std::numeric_limits<double>::infinity();
  Eigen::VectorXd best_x = Eigen::VectorXd::Zero(n);
  for (int mask = 1; mask < (1 << n); ++mask) {
    std::vector<int> idx;
    for (int j = 0; j < n; ++j) {
      if (mask & (1 << j)) idx.push_back(j);
    }
    const int k = static_cast<int>(idx.size());
    Eigen::MatrixXd kkt = Eigen::MatrixXd::Zero(k + 1, k + 1);
    Eigen::VectorXd rhs(k + 1);
    for (int a = 0; a < k; ++a) {
      for (int b = 0; b < k; ++b) kkt(a, b) = g.col(idx[a]).dot(g.col(idx[b]));
      kkt(a, k) = w(idx[a]);
      kkt(k, a) = w(idx[a]);
      rhs(a) = g.col(idx[a]).dot(p);
    }
    rhs(k) = 1.0;
    const Eigen::VectorXd sol = kkt.fullPivLu().solve(rhs);
    if (!((kkt * sol - rhs).norm() < 1e-9 * (1.0 + rhs.norm()))) continue;
    Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
    bool ok = true;
    for (int a = 0; a < k; ++a) {
      x(idx[a]) = sol(a);
      if (sol(a) < -1e-13) ok = false;
    }
    if (!ok) continue;
    x = x.cwiseMax(0.0);
    const double f = 0.5 * (g * x - p).squaredNorm();
    if (f < best) {
      best = f;
      best_x = x;
    }
  }
  return best_x;
}

// Number of strict local maxima of a 5-point centred moving average.
inline std::vector<int> smoothed_peaks(const Eigen::VectorXd& y) {
  const Eigen::Index n = y.size();
  Eigen::VectorXd s = y;
  for (Eigen::Index i = 2; i + 2 < n; ++i) s(i) = (y(i - 2) + y(i - 1) + y(i) + y(i + 1) + y(i + 2)) / 5.0;
  std::vector<int> peaks;
  for (Eigen::Index i = 3; i + 3 < n; ++i) {
    if (s(i) > s(i - 1) && s(i) >= s(i + 1)) peaks.push_back(static_cast<int>(i));
  }
  return peaks;
}

}  // namespace oracle
