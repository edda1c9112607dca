#pragma once

#include <optional>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "impdens/grid_kernel.hpp"
#include "impdens/pricing.hpp"

namespace impdens {

// Piecewise-linear value; throws OutOfSupport outside [x_min, x_max].
double interp_density(const Density& phi, double x);

// Linear interpolation of phi onto a grid with `factor` sub-intervals per cell.
Density refine_density(const Density& phi, int factor);

// Mass and mean of the piecewise-linear interpolant.
double interpolant_mass(const Density& phi);
double interpolant_mean(const Density& phi);

// Mean of the pricing measure used by price_at_strike.
double pricing_mean(const Density& phi);

// Discounted payoff integrated against an even mix of the piecewise-linear
// interpolant (exact, strike inserted as a node) and the trapezoid point
// masses on the nodes. Both parts are nonnegative measures of the same mass,
// so prices are convex in the strike; the mix halves the leading O(dx^2)
// error of either part alone.
double price_at_strike(const Density& phi, OptionKind kind, double strike, const MarketContext& ctx);

struct SmileOptions {
  std::optional<std::pair<double, double>> quoted_range;
  ImpliedVolOptions iv;
  // Context for the vol inversion; defaults to the one implied by the density.
  std::optional<MarketContext> inversion_ctx;
};

struct SmileCurve {
  std::vector<double> strikes;
  std::vector<double> call_prices;
  std::vector<double> put_prices;
  std::vector<double> implied_vols;
  std::vector<bool> vol_valid;
  std::vector<bool> extrapolated;
  std::vector<std::string> vol_errors;
  ModelFamily family = ModelFamily::Bachelier;
  // Context implied by the density: forward = mean, spot = discounted mean.
  MarketContext density_ctx;
};

SmileCurve build_smile(const Density& phi, const std::vector<double>& strikes, const MarketContext& ctx,
                       ModelFamily family, const SmileOptions& opts = {});

void write_smile_csv(std::ostream& os, const SmileCurve& smile);

}  // namespace impdens
