#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "impdens/presets.hpp"
#include "impdens/svd_sparse.hpp"
#include "test_util.hpp"

using namespace impdens;

namespace {

Eigen::MatrixXd random_matrix(int rows, int cols, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n(0.0, 1.0);
  Eigen::MatrixXd m(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) m(i, j) = n(rng);
  return m;
}

const SvdFactors& normal_factors() {
  static const SvdFactors f = [] {
    const Preset p = make_preset("normal");
    return decompose(build_kernel(p.quotes, make_grid(p.x_min, p.x_max, p.n_points), p.ctx));
  }();
  return f;
}

}  // namespace

TEST(Decompose, Identity) {
  const SvdFactors f = decompose(Eigen::MatrixXd::Identity(4, 4));
  EXPECT_LT((f.s - Eigen::VectorXd::Ones(4)).cwiseAbs().maxCoeff(), 1e-15);
  EXPECT_DOUBLE_EQ(condition_number(f), 1.0);
}

TEST(Decompose, EmbeddedDiagonal) {
  Eigen::MatrixXd g = Eigen::MatrixXd::Zero(2, 4);
  g(0, 0) = 3.0;
  g(1, 1) = 1.0;
  const SvdFactors f = decompose(g);
  ASSERT_EQ(f.s.size(), 2);
  EXPECT_NEAR(f.s(0), 3.0, 1e-15);
  EXPECT_NEAR(f.s(1), 1.0, 1e-15);
}

TEST(Decompose, ConditionOfDiagonal) {
  Eigen::MatrixXd g = Eigen::MatrixXd::Zero(2, 2);
  g(0, 0) = 4.0;
  g(1, 1) = 2.0;
  EXPECT_NEAR(condition_number(decompose(g)), 2.0, 1e-15);
}

TEST(Decompose, SingularKernelRejected) {
  Eigen::MatrixXd g = Eigen::MatrixXd::Zero(2, 2);
  g(0, 0) = 1.0;
  EXPECT_ERROR_CODE(condition_number(decompose(g)), ErrorCode::SingularKernel);
  EXPECT_EQ(numerical_rank(decompose(g)), 1);
}

TEST(Decompose, RejectsNonFinite) {
  Eigen::MatrixXd g = Eigen::MatrixXd::Ones(3, 3);
  g(1, 2) = NAN;
  EXPECT_ERROR_CODE(decompose(g), ErrorCode::InvalidArgument);
}

TEST(Decompose, FactorInvariantsOnNormalKernel) {
  const SvdFactors& f = normal_factors();
  const Eigen::Index q = f.s.size();
  EXPECT_EQ(q, 400);
  EXPECT_LT((f.u.transpose() * f.u - Eigen::MatrixXd::Identity(q, q)).cwiseAbs().maxCoeff(), 1e-10);
  EXPECT_LT((f.v.transpose() * f.v - Eigen::MatrixXd::Identity(q, q)).cwiseAbs().maxCoeff(), 1e-10);
  for (Eigen::Index i = 1; i < q; ++i) EXPECT_LE(f.s(i), f.s(i - 1));
  EXPECT_GE(f.s.minCoeff(), 0.0);
}

TEST(Truncate, FullRankReproducesKernel) {
  const Preset p = make_preset("normal");
  const KernelMatrix k = build_kernel(p.quotes, make_grid(p.x_min, p.x_max, p.n_points), p.ctx);
  const SvdFactors& f = normal_factors();
  const SparseModel full = truncate(f, f.s.size());
  EXPECT_LE((reconstruct(full) - k.entries).cwiseAbs().maxCoeff(), 1e-10 * f.s(0));
}

TEST(Truncate, RankOneHasVanishingMinors) {
  const SparseModel m = truncate(decompose(random_matrix(6, 9, 5)), 1);
  const Eigen::MatrixXd g = reconstruct(m);
  double worst = 0.0;
  for (int i = 0; i < 6; ++i)
    for (int k = i + 1; k < 6; ++k)
      for (int j = 0; j < 9; ++j)
        for (int l = j + 1; l < 9; ++l) worst = std::max(worst, std::abs(g(i, j) * g(k, l) - g(i, l) * g(k, j)));
  EXPECT_LE(worst, 1e-10 * m.s(0) * m.s(0));
}

TEST(Truncate, RankBounds) {
  const SvdFactors f = decompose(random_matrix(4, 6, 1));
  EXPECT_ERROR_CODE(truncate(f, 0), ErrorCode::RankOutOfRange);
  EXPECT_ERROR_CODE(truncate(f, 5), ErrorCode::RankOutOfRange);
  EXPECT_EQ(truncate(f, 4).rank(), 4);
}

TEST(Truncate, PrefixAndConditionMonotone) {
  const SvdFactors& f = normal_factors();
  double prev = 0.0;
  for (Eigen::Index q : {10, 50, 100, 150, 200}) {
    const SparseModel m = truncate(f, q);
    EXPECT_EQ(m.s, f.s.head(q));
    EXPECT_GE(m.condition(), 1.0);
    EXPECT_GE(m.condition(), prev);
    prev = m.condition();
  }
  EXPECT_LT(truncate(f, 150).condition(), f.s(0) / f.s(f.s.size() - 1));
}

TEST(Transform, ZeroAndColumnsOfU) {
  const SparseModel m = truncate(decompose(random_matrix(8, 12, 2)), 5);
  EXPECT_EQ(transform_prices(m, Eigen::VectorXd::Zero(8)).cwiseAbs().maxCoeff(), 0.0);
  const Eigen::VectorXd pr = transform_prices(m, 2.5 * m.u.col(3));
  Eigen::VectorXd expected = Eigen::VectorXd::Zero(5);
  expected(3) = 2.5;
  EXPECT_LT((pr - expected).cwiseAbs().maxCoeff(), 1e-14);
  EXPECT_ERROR_CODE(transform_prices(m, Eigen::VectorXd::Zero(7)), ErrorCode::DimensionMismatch);
}

TEST(Transform, ProjectionContracts) {
  const SparseModel m = truncate(decompose(random_matrix(20, 30, 3)), 7);
  for (unsigned seed = 0; seed < 20; ++seed) {
    const Eigen::VectorXd pr = random_matrix(20, 1, 100 + seed).col(0);
    EXPECT_LE(transform_prices(m, pr).norm(), pr.norm() * (1 + 1e-15));
  }
}

TEST(Transform, DensityRoundTripAndPricingIdentity) {
  const SvdFactors f = decompose(random_matrix(10, 15, 4), make_grid(0, 1, 15));
  const SparseModel m = truncate(f, 6);
  const Eigen::VectorXd coeffs = random_matrix(6, 1, 9).col(0);
  const Density phi = density_from_transformed(m, coeffs);
  EXPECT_LT((m.v.transpose() * phi.values - coeffs).cwiseAbs().maxCoeff(), 1e-12);
  const Eigen::VectorXd lhs = m.u * m.s.cwiseProduct(coeffs);
  const Eigen::VectorXd rhs = reconstruct(m) * phi.values;
  EXPECT_LE((lhs - rhs).cwiseAbs().maxCoeff(), 1e-10 * m.s(0));
  EXPECT_EQ(density_from_transformed(m, Eigen::VectorXd::Zero(6)).values.cwiseAbs().maxCoeff(), 0.0);
  EXPECT_ERROR_CODE(density_from_transformed(m, Eigen::VectorXd::Zero(5)), ErrorCode::DimensionMismatch);
  EXPECT_ERROR_CODE(expand_transformed(m, Eigen::VectorXd::Zero(7)), ErrorCode::DimensionMismatch);
}

TEST(Conditioning, GrowsQuadraticallyWithStrikes) {
  const auto series = condition_series(make_grid(0.0, 1.0, 10000), {10, 20, 40, 80});
  std::vector<double> m, c;
  for (const auto& p : series) {
    m.push_back(static_cast<double>(p.n_strikes));
    c.push_back(p.condition);
  }
  const double k = fit_power_law(m, c).exponent;
  EXPECT_GE(k, 1.7);
  EXPECT_LE(k, 2.3);
}

TEST(Conditioning, SingularValuesDecayAsPowerLaw) {
  const Eigen::VectorXd s = normalized_singular_values(decompose(call_only_kernel(make_grid(0.0, 1.0, 1000), 25)));
  ASSERT_EQ(s.size(), 25);
  EXPECT_DOUBLE_EQ(s(0), 1.0);
  auto slope = [&](int first, int last) {
    std::vector<double> i, v;
    for (int k = first; k <= last; ++k) {
      i.push_back(k);
      v.push_back(s(k - 1));
    }
    return -fit_power_law(i, v).exponent;
  };
  EXPECT_GE(slope(1, 10), 2.2);
  EXPECT_LE(slope(1, 10), 3.2);
  EXPECT_LT(std::abs(slope(18, 25)), std::abs(slope(1, 8)));
}

TEST(PowerLaw, RecoversExactExponent) {
  std::vector<double> x{1, 2, 4, 8, 16}, y;
  for (double v : x) y.push_back(3.0 * std::pow(v, -1.5));
  const PowerLawFit fit = fit_power_law(x, y);
  EXPECT_NEAR(fit.exponent, -1.5, 1e-12);
  EXPECT_NEAR(fit.log_prefactor, std::log(3.0), 1e-12);
  EXPECT_ERROR_CODE(fit_power_law({1.0}, {1.0}), ErrorCode::InvalidArgument);
}

TEST(Export, CsvHeaders) {
  std::ostringstream a, b;
  write_singular_values_csv(a, Eigen::Vector2d(1.0, 0.5));
  write_condition_csv(b, {{10, 100.0}});
  EXPECT_EQ(a.str().substr(0, a.str().find('\n')), "i,s_over_s1");
  EXPECT_EQ(b.str().substr(0, b.str().find('\n')), "M,C");
  EXPECT_NE(a.str().find("2,0.5"), std::string::npos);
}
