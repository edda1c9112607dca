#include "impdens/pricing.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "impdens/error.hpp"

namespace impdens {

namespace {

void check_common(const MarketContext& ctx, double strike, double sigma) {
  require_finite("rate", ctx.rate);
  require_finite("tau", ctx.tau);
  require_finite("strike", strike);
  require_finite("sigma", sigma);
  if (ctx.tau <= 0.0) throw Error(ErrorCode::InvalidArgument, "tau must be positive");
  if (sigma < 0.0) throw Error(ErrorCode::InvalidArgument, "volatility must be nonnegative");
}

double sign_of(OptionKind kind) { return kind == OptionKind::Call ? 1.0 : -1.0; }

}  // namespace

std::string_view to_string(OptionKind kind) { return kind == OptionKind::Call ? "C" : "P"; }

std::string_view to_string(ModelFamily family) {
  switch (family) {
    case ModelFamily::Bachelier: return "bachelier";
    case ModelFamily::BlackScholes: return "blackscholes";
    case ModelFamily::Black: return "black";
  }
  return "unknown";
}

ModelFamily parse_family(std::string_view name) {
  std::string s(name);
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  std::erase_if(s, [](char c) { return c == '-' || c == '_' || c == ' '; });
  if (s == "bachelier" || s == "normal") return ModelFamily::Bachelier;
  if (s == "blackscholes" || s == "bs" || s == "lognormal") return ModelFamily::BlackScholes;
  if (s == "black" || s == "black76") return ModelFamily::Black;
  throw Error(ErrorCode::UnknownFamily, "unknown model family '" + std::string(name) + "'");
}

MarketContext MarketContext::from_spot(double spot, double rate, double tau) {
  return {rate, tau, spot, spot * std::exp(rate * tau)};
}

MarketContext MarketContext::from_forward(double forward, double rate, double tau) {
  return {rate, tau, forward * std::exp(-rate * tau), forward};
}

double MarketContext::discount() const { return std::exp(-rate * tau); }

bool MarketContext::forward_consistent(double rel_tol) const {
  const double implied = spot * std::exp(rate * tau);
  return std::abs(implied - forward) <= rel_tol * std::max(std::abs(forward), 1.0);
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x * std::numbers::sqrt2 / 2.0); }

double normal_pdf(double x) {
  return std::exp(-0.5 * x * x) * std::numbers::inv_sqrtpi / std::numbers::sqrt2;
}

double bachelier_price(OptionKind kind, const MarketContext& ctx, double strike, double sigma) {
  check_common(ctx, strike, sigma);
  require_finite("forward", ctx.forward);
  const double df = ctx.discount();
  const double eps = sign_of(kind);
  const double sd = sigma * std::sqrt(ctx.tau);
  const double diff = eps * (ctx.forward - strike);
  if (sd == 0.0) return df * std::max(0.0, diff);
  const double m = diff / sd;
  return df * (diff * normal_cdf(m) + sd * normal_pdf(m));
}

double black_scholes_price(OptionKind kind, const MarketContext& ctx, double strike,
                           double sigma) {
  check_common(ctx, strike, sigma);
  require_finite("spot", ctx.spot);
  if (strike <= 0.0) throw Error(ErrorCode::InvalidArgument, "strike must be positive");
  if (ctx.spot <= 0.0) throw Error(ErrorCode::InvalidArgument, "spot must be positive");
  const double eps = sign_of(kind);
  const double pv_strike = strike * ctx.discount();
  const double sd = sigma * std::sqrt(ctx.tau);
  if (sd == 0.0) return std::max(0.0, eps * (ctx.spot - pv_strike));
  const double d1 = std::log(ctx.spot / pv_strike) / sd + 0.5 * sd;
  const double d2 = d1 - sd;
  return eps * (ctx.spot * normal_cdf(eps * d1) - pv_strike * normal_cdf(eps * d2));
}

double black_price(OptionKind kind, const MarketContext& ctx, double strike, double sigma) {
  check_common(ctx, strike, sigma);
  require_finite("forward", ctx.forward);
  if (strike <= 0.0) throw Error(ErrorCode::InvalidArgument, "strike must be positive");
  if (ctx.forward <= 0.0) throw Error(ErrorCode::InvalidArgument, "forward must be positive");
  const double eps = sign_of(kind);
  const double df = ctx.discount();
  const double sd = sigma * std::sqrt(ctx.tau);
  if (sd == 0.0) return df * std::max(0.0, eps * (ctx.forward - strike));
  const double d1 = std::log(ctx.forward / strike) / sd + 0.5 * sd;
  const double d2 = d1 - sd;
  return df * eps * (ctx.forward * normal_cdf(eps * d1) - strike * normal_cdf(eps * d2));
}

double model_price(const PricingModel& model, OptionKind kind, const MarketContext& ctx,
                   double strike) {
  switch (model.family) {
    case ModelFamily::Bachelier: return bachelier_price(kind, ctx, strike, model.sigma);
    case ModelFamily::BlackScholes: return black_scholes_price(kind, ctx, strike, model.sigma);
    case ModelFamily::Black: return black_price(kind, ctx, strike, model.sigma);
  }
  throw Error(ErrorCode::UnknownFamily, "unhandled model family");
}

Quote parity_transform(const Quote& quote, const MarketContext& ctx) {
  require_finite("price", quote.price);
  require_finite("strike", quote.strike);
  require_finite("spot", ctx.spot);
  const double pv_strike = quote.strike * ctx.discount();
  Quote out = quote;
  if (quote.kind == OptionKind::Call) {
    out.kind = OptionKind::Put;
    out.price = quote.price + pv_strike - ctx.spot;
  } else {
    out.kind = OptionKind::Call;
    out.price = quote.price + ctx.spot - pv_strike;
  }
  return out;
}

PriceBounds price_bounds(OptionKind kind, ModelFamily family, const MarketContext& ctx,
                         double strike) {
  const double df = ctx.discount();
  const double eps = sign_of(kind);
  const double inf = std::numeric_limits<double>::infinity();
  switch (family) {
    case ModelFamily::Bachelier:
      return {df * std::max(0.0, eps * (ctx.forward - strike)), inf};
    case ModelFamily::BlackScholes:
      return {std::max(0.0, eps * (ctx.spot - strike * df)),
              kind == OptionKind::Call ? ctx.spot : strike * df};
    case ModelFamily::Black:
      return {df * std::max(0.0, eps * (ctx.forward - strike)),
              df * (kind == OptionKind::Call ? ctx.forward : strike)};
  }
  return {0.0, inf};
}

double implied_vol(double price, OptionKind kind, ModelFamily family, const MarketContext& ctx,
                   double strike, const ImpliedVolOptions& opts) {
  require_finite("price", price);
  if (!(opts.sigma_lo >= 0.0 && opts.sigma_hi > opts.sigma_lo && opts.tol > 0.0 &&
        opts.max_iter >= 1)) {
    throw Error(ErrorCode::InvalidArgument, "invalid implied-vol options");
  }
  const PriceBounds bounds = price_bounds(kind, family, ctx, strike);
  if (!(price > bounds.lower && price < bounds.upper)) {
    throw Error(ErrorCode::PriceOutOfBounds,
                "price " + std::to_string(price) + " outside no-arbitrage bounds at strike " +
                    std::to_string(strike));
  }
  const PricingModel lo_model{family, opts.sigma_lo};
  const PricingModel hi_model{family, opts.sigma_hi};
  if (price < model_price(lo_model, kind, ctx, strike) ||
      price > model_price(hi_model, kind, ctx, strike)) {
    throw Error(ErrorCode::PriceOutOfBounds,
                "price " + std::to_string(price) + " not attainable inside the volatility bracket");
  }
  double lo = opts.sigma_lo;
  double hi = opts.sigma_hi;
  for (int it = 0; it < opts.max_iter; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (hi - lo <= opts.tol) return mid;
    if (model_price({family, mid}, kind, ctx, strike) < price) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  if (hi - lo <= opts.tol) return 0.5 * (lo + hi);
  throw Error(ErrorCode::NoConvergence, "implied-vol bisection did not converge");
}

}  // namespace impdens
