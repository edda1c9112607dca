#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "impdens/diagnostics.hpp"
#include "impdens/interp.hpp"
#include "impdens/presets.hpp"
#include "impdens/solver.hpp"
#include "impdens/svd_sparse.hpp"
#include "oracles.hpp"
#include "test_util.hpp"

using namespace impdens;

namespace {

Density random_density(const Grid& g, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Density phi{g, Eigen::VectorXd(g.size())};
  for (Eigen::Index i = 0; i < g.size(); ++i) phi.values(i) = u(rng) < 0.2 ? 0.0 : u(rng);
  phi.values /= phi.mass();
  return phi;
}

// Fitted normal-preset density at the d_B-minimizing scan entry.
const Density& fitted_normal() {
  static const Density phi = [] {
    const Preset p = make_preset("normal");
    const Grid grid = make_grid(p.x_min, p.x_max, p.n_points);
    const KernelMatrix k = build_kernel(p.quotes, grid, p.ctx);
    const ScanResult scan = lambda_scan(truncate(decompose(k), p.rank), weighted_system(k).prices,
                                        default_lambda_grid(), SolverConfig{}, reference_density(p, grid));
    const ScanEntry* best = &scan.entries.front();
    for (const auto& e : scan.entries) {
      if (*e.d_b < *best->d_b) best = &e;
    }
    return best->solve->phi;
  }();
  return phi;
}

}  // namespace

TEST(Interp, NodesAndMidpoints) {
  const Grid g = make_grid(0.0, 1.0, 11);
  const Density phi = random_density(g, 1);
  for (Eigen::Index j = 0; j < g.size(); ++j) EXPECT_EQ(interp_density(phi, g.nodes()[j]), phi.values(j));
  for (Eigen::Index j = 0; j + 1 < g.size(); ++j) {
    const double mid = 0.5 * (g.nodes()[j] + g.nodes()[j + 1]);
    EXPECT_NEAR(interp_density(phi, mid), 0.5 * (phi.values(j) + phi.values(j + 1)),
                4e-16 * (1.0 + phi.values(j) + phi.values(j + 1)));
  }
  EXPECT_ERROR_CODE(interp_density(phi, 1.0001), ErrorCode::OutOfSupport);
  EXPECT_ERROR_CODE(interp_density(phi, -0.1), ErrorCode::OutOfSupport);
}

TEST(Interp, NonnegativeEverywhereItIsEvaluated) {
  const Grid g = make_grid(-1.0, 1.0, 41);
  const Density phi = random_density(g, 2);
  for (int i = 0; i <= 4000; ++i) EXPECT_GE(interp_density(phi, -1.0 + 2.0 * i / 4000.0), 0.0);
}

TEST(Interp, RefinementPreservesMass) {
  const Grid g = make_grid(0.0, 3.0, 31);
  const Density phi = random_density(g, 3);
  for (int factor : {1, 2, 7}) {
    const Density fine = refine_density(phi, factor);
    EXPECT_EQ(fine.grid.size(), (g.size() - 1) * factor + 1);
    EXPECT_NEAR(fine.mass(), 1.0, 1e-10);
  }
  EXPECT_NEAR(interpolant_mass(phi), 1.0, 1e-14);
  EXPECT_ERROR_CODE(refine_density(phi, 0), ErrorCode::InvalidArgument);
}

TEST(Interp, MeanOfInterpolantMatchesFineQuadrature) {
  const Grid g = make_grid(0.2, 1.7, 16);
  const Density phi = random_density(g, 4);
  const double expected = oracle::trapezoid([&](double x) { return x * interp_density(phi, x); }, 0.2, 1.7, 300001);
  EXPECT_NEAR(interpolant_mean(phi), expected, 1e-9);
}

TEST(Interp, PricingMeanAveragesInterpolantAndNodeMasses) {
  const Grid g = make_grid(0.2, 1.7, 16);
  const Density phi = random_density(g, 4);
  double atoms = 0.0;
  for (Eigen::Index j = 0; j < g.size(); ++j) atoms += g.weights()(j) * g.nodes()[j] * phi.values(j);
  EXPECT_NEAR(pricing_mean(phi), 0.5 * (interpolant_mean(phi) + atoms), 1e-15);
}

TEST(PriceAtStrike, StrikeBelowSupportGivesForwardMinusStrike) {
  const Grid g = make_grid(0.0, 2.0, 51);
  const Density phi = random_density(g, 5);
  const auto ctx = MarketContext::from_spot(1.0, 0.0, 1.0);
  for (double strike : {0.0, -0.4}) {
    EXPECT_NEAR(price_at_strike(phi, OptionKind::Call, strike, ctx), pricing_mean(phi) - strike, 1e-14);
  }
}

TEST(PriceAtStrike, StrikeAboveSupportCallIsZero) {
  const Grid g = make_grid(0.0, 2.0, 51);
  const Density phi = random_density(g, 6);
  const auto ctx = MarketContext::from_spot(1.0, 0.02, 1.0);
  EXPECT_EQ(price_at_strike(phi, OptionKind::Call, 2.0, ctx), 0.0);
  EXPECT_EQ(price_at_strike(phi, OptionKind::Call, 2.5, ctx), 0.0);
  EXPECT_NEAR(price_at_strike(phi, OptionKind::Put, 2.5, ctx), ctx.discount() * (2.5 - pricing_mean(phi)), 1e-14);
}

TEST(PriceAtStrike, SampledNormalMatchesBachelier) {
  const Preset p = make_preset("normal");
  const Grid g = make_grid(p.x_min, p.x_max, p.n_points);
  const Density phi = sample_density(g, [&](double x) { return oracle::gauss_pdf(x, p.ctx.forward, 0.1); });
  for (int i = 0; i < 50; ++i) {
    const double strike = -0.7 + 1.4 * (i + 0.37) / 50.0;
    for (OptionKind kind : {OptionKind::Call, OptionKind::Put}) {
      EXPECT_NEAR(price_at_strike(phi, kind, strike, p.ctx), bachelier_price(kind, p.ctx, strike, 0.1), 1e-6);
    }
  }
}

TEST(PriceAtStrike, AgreesWithFineQuadratureOfMixedMeasure) {
  const Grid g = make_grid(0.0, 1.0, 21);
  const Density phi = random_density(g, 7);
  const auto ctx = MarketContext::from_spot(0.5, 0.03, 0.5);
  for (double strike : {0.0137, 0.5, 0.61803}) {
    const double smooth = oracle::trapezoid(
        [&](double x) { return std::max(0.0, x - strike) * interp_density(phi, x); }, 0.0, 1.0, 400001);
    double atoms = 0.0;
    for (Eigen::Index j = 0; j < g.size(); ++j) {
      atoms += g.weights()(j) * std::max(0.0, g.nodes()[j] - strike) * phi.values(j);
    }
    const double expected = ctx.discount() * 0.5 * (smooth + atoms);
    EXPECT_NEAR(price_at_strike(phi, OptionKind::Call, strike, ctx), expected, 1e-10);
  }
}

TEST(PriceAtStrike, LipschitzAndConvexInStrike) {
  const Grid g = make_grid(0.0, 1.0, 41);
  const Density phi = random_density(g, 8);
  const auto ctx = MarketContext::from_spot(0.5, 0.05, 1.0);
  const double h = 1e-3;
  std::vector<double> c;
  for (int i = 0; i <= 1400; ++i) c.push_back(price_at_strike(phi, OptionKind::Call, -0.2 + h * i, ctx));
  for (std::size_t i = 1; i < c.size(); ++i) {
    EXPECT_LE(std::abs(c[i] - c[i - 1]), ctx.discount() * h * (1 + 1e-12));
    EXPECT_LE(c[i], c[i - 1] + 1e-16);
    if (i + 1 < c.size()) EXPECT_GE(c[i - 1] - 2 * c[i] + c[i + 1], -1e-10) << i;
  }
}

TEST(PriceAtStrike, RejectsNegativeDensity) {
  const Grid g = make_grid(0.0, 1.0, 5);
  Density phi{g, Eigen::VectorXd::Ones(5)};
  phi.values(2) = -0.5;
  EXPECT_ERROR_CODE(price_at_strike(phi, OptionKind::Call, 0.5, MarketContext::from_spot(0.5, 0, 1)),
                    ErrorCode::InvalidArgument);
}

// Strikes within three standard deviations of the forward. Further out the OTM
// price falls below the price resolution of the grid and the vol is not
// determined to 1e-3.
TEST(Smile, NormalFitReproducesFlatNormalVol) {
  const Preset p = make_preset("normal");
  std::vector<double> strikes;
  for (const auto& q : p.quotes) {
    if (std::abs(q.strike - p.ctx.forward) <= 0.3) strikes.push_back(q.strike);
  }
  std::sort(strikes.begin(), strikes.end());
  strikes.erase(std::unique(strikes.begin(), strikes.end()), strikes.end());
  const SmileCurve smile = build_smile(fitted_normal(), strikes, p.ctx, ModelFamily::Bachelier);
  for (std::size_t i = 0; i < strikes.size(); ++i) {
    ASSERT_TRUE(smile.vol_valid[i]) << strikes[i] << " " << smile.vol_errors[i];
    EXPECT_NEAR(smile.implied_vols[i], 0.1, 1e-3) << strikes[i];
    EXPECT_FALSE(smile.extrapolated[i]);
  }
}

TEST(Smile, NoArbitrageInvariants) {
  const Density& phi = fitted_normal();
  const auto ctx = MarketContext::from_spot(0.1, 0.05, 1.0);
  const std::vector<double> strikes = linspace(-0.85, 0.85, 301);
  SmileOptions opts;
  opts.quoted_range = std::make_pair(-0.7, 0.7);
  const SmileCurve smile = build_smile(phi, strikes, ctx, ModelFamily::Bachelier, opts);
  const double df = ctx.discount();
  const double mean = pricing_mean(phi);
  EXPECT_NEAR(smile.density_ctx.forward, mean, 1e-15);
  for (std::size_t i = 0; i < strikes.size(); ++i) {
    const double k = strikes[i];
    EXPECT_NEAR(smile.call_prices[i] + k * df, smile.put_prices[i] + df * mean, 1e-12);
    EXPECT_GE(smile.call_prices[i], df * std::max(0.0, mean - k) - 1e-15);
    EXPECT_GE(smile.put_prices[i], df * std::max(0.0, k - mean) - 1e-15);
    EXPECT_EQ(smile.extrapolated[i], k < -0.7 || k > 0.7);
    if (i > 0) EXPECT_LE(smile.call_prices[i], smile.call_prices[i - 1]);
    if (i > 0 && i + 1 < strikes.size()) {
      EXPECT_GE(smile.call_prices[i - 1] - 2 * smile.call_prices[i] + smile.call_prices[i + 1], -1e-10);
    }
  }
}

TEST(Smile, UninvertiblePointsAreFlagged) {
  const Grid g = make_grid(0.0, 1.0, 21);
  const Density phi = random_density(g, 9);
  const auto ctx = MarketContext::from_spot(0.5, 0.0, 1.0);
  const SmileCurve smile = build_smile(phi, {0.5, 1.2}, ctx, ModelFamily::BlackScholes);
  EXPECT_TRUE(smile.vol_valid[0]);
  EXPECT_FALSE(smile.vol_valid[1]);
  EXPECT_FALSE(smile.vol_errors[1].empty());
  EXPECT_TRUE(std::isnan(smile.implied_vols[1]));
}

TEST(Smile, Preconditions) {
  const Grid g = make_grid(0.0, 1.0, 21);
  const Density phi = random_density(g, 10);
  const auto ctx = MarketContext::from_spot(0.5, 0.0, 1.0);
  EXPECT_ERROR_CODE(build_smile(phi, {0.5, 0.4}, ctx, ModelFamily::Bachelier), ErrorCode::InvalidArgument);
  EXPECT_ERROR_CODE(build_smile(phi, {0.0, 0.4}, ctx, ModelFamily::BlackScholes), ErrorCode::InvalidArgument);
  EXPECT_NO_THROW(build_smile(phi, {0.0, 0.4}, ctx, ModelFamily::Bachelier));
}

TEST(Smile, CsvLayout) {
  const Grid g = make_grid(0.0, 1.0, 21);
  const Density phi = random_density(g, 11);
  SmileOptions opts;
  opts.quoted_range = std::make_pair(0.3, 0.6);
  const SmileCurve smile = build_smile(phi, {0.2, 0.5}, MarketContext::from_spot(0.5, 0, 1), ModelFamily::Bachelier, opts);
  std::ostringstream os;
  write_smile_csv(os, smile);
  std::istringstream in(os.str());
  std::string header, first, second;
  std::getline(in, header);
  std::getline(in, first);
  std::getline(in, second);
  EXPECT_EQ(header, "strike,call_price,put_price,implied_vol,model_family,extrapolated_flag");
  EXPECT_EQ(first.substr(first.rfind(',') + 1), "true");
  EXPECT_EQ(second.substr(second.rfind(',') + 1), "false");
  EXPECT_NE(first.find(",bachelier,"), std::string::npos);
}
