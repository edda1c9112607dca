#pragma once

#include <string>
#include <string_view>

namespace impdens {

enum class OptionKind { Call, Put };

enum class ModelFamily { Bachelier, BlackScholes, Black };

std::string_view to_string(OptionKind kind);
std::string_view to_string(ModelFamily family);
ModelFamily parse_family(std::string_view name);

struct MarketContext {
  double rate = 0.0;
  double tau = 1.0;
  double spot = 0.0;
  double forward = 0.0;

  static MarketContext from_spot(double spot, double rate, double tau);
  static MarketContext from_forward(double forward, double rate, double tau);

  double discount() const;
  bool forward_consistent(double rel_tol = 1e-12) const;
};

struct PricingModel {
  ModelFamily family = ModelFamily::Bachelier;
  double sigma = 0.0;
};

struct Quote {
  OptionKind kind = OptionKind::Call;
  double strike = 0.0;
  double price = 0.0;
  double weight = 1.0;
};

double normal_cdf(double x);
double normal_pdf(double x);

// Forward-based normal model, discounted at ctx.rate.
double bachelier_price(OptionKind kind, const MarketContext& ctx, double strike, double sigma);
// Lognormal model on the spot.
double black_scholes_price(OptionKind kind, const MarketContext& ctx, double strike, double sigma);
// Lognormal model on the forward with external discount.
double black_price(OptionKind kind, const MarketContext& ctx, double strike, double sigma);

double model_price(const PricingModel& model, OptionKind kind, const MarketContext& ctx,
                   double strike);

// Opposite-kind quote at the same strike: C + K e^{-r tau} = P + S0.
Quote parity_transform(const Quote& quote, const MarketContext& ctx);

struct ImpliedVolOptions {
  double sigma_lo = 1e-9;
  double sigma_hi = 10.0;
  double tol = 1e-12;
  int max_iter = 200;
};

// No-arbitrage price bounds for the family; upper may be +inf.
struct PriceBounds {
  double lower = 0.0;
  double upper = 0.0;
};
PriceBounds price_bounds(OptionKind kind, ModelFamily family, const MarketContext& ctx,
                         double strike);

// Bisection on the volatility. Throws PriceOutOfBounds or NoConvergence.
double implied_vol(double price, OptionKind kind, ModelFamily family, const MarketContext& ctx,
                   double strike, const ImpliedVolOptions& opts = {});

}  // namespace impdens
