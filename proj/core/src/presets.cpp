#include "impdens/presets.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "impdens/error.hpp"

namespace impdens {

std::vector<std::string> preset_names() { return {"normal", "lognormal", "multimodal", "arbitrage", "spx", "kinked"}; }

std::vector<double> linspace(double a, double b, int n) {
  if (n < 1) throw Error(ErrorCode::InvalidArgument, "linspace needs at least one point");
  std::vector<double> out(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    out[static_cast<std::size_t>(i)] = n == 1 ? a : a + (b - a) * static_cast<double>(i) / (n - 1);
  }
  if (n > 1) out.back() = b;
  return out;
}

std::vector<Quote> model_quotes(const std::vector<double>& strikes, const MarketContext& ctx,
                                const PricingModel& model) {
  std::vector<Quote> out;
  out.reserve(2 * strikes.size());
  for (OptionKind kind : {OptionKind::Call, OptionKind::Put}) {
    for (double k : strikes) out.push_back({kind, k, model_price(model, kind, ctx, k), 1.0});
  }
  return out;
}

std::vector<Quote> mixture_quotes(const std::vector<double>& strikes, const std::vector<MixtureComponent>& mix,
                                  double rate, double tau) {
  std::vector<Quote> out;
  out.reserve(2 * strikes.size());
  for (OptionKind kind : {OptionKind::Call, OptionKind::Put}) {
    for (double k : strikes) {
      double price = 0.0;
      for (const auto& c : mix) {
        price += c.weight * bachelier_price(kind, MarketContext::from_forward(c.mean, rate, tau), k, c.sigma);
      }
      out.push_back({kind, k, price, 1.0});
    }
  }
  return out;
}

double mixture_pdf(const std::vector<MixtureComponent>& mix, double x) {
  double acc = 0.0;
  for (const auto& c : mix) acc += c.weight * normal_pdf((x - c.mean) / c.sigma) / c.sigma;
  return acc;
}

double KinkedSmile::vol(double strike) const {
  return base + left_slope * std::max(0.0, corner - strike) + right_slope * std::max(0.0, strike - corner);
}

std::vector<Quote> kinked_quotes(const KinkedSmile& smile, const std::vector<double>& strikes) {
  const MarketContext ctx = MarketContext::from_forward(smile.forward, smile.rate, smile.tau);
  std::vector<Quote> out;
  for (OptionKind kind : {OptionKind::Call, OptionKind::Put}) {
    for (double k : strikes) out.push_back({kind, k, black_price(kind, ctx, k, smile.vol(k)), 1.0});
  }
  return out;
}

Preset make_preset(std::string_view name) {
  Preset p;
  p.name = std::string(name);
  if (name == "normal") {
    const double sigma = 0.1;
    p.ctx = MarketContext::from_spot(0.1, 0.05, 1.0);
    p.quotes = model_quotes(linspace(-0.7, 0.7, 200), p.ctx, {ModelFamily::Bachelier, sigma});
    p.x_min = -0.9;
    p.x_max = 0.9;
    const double mu = p.ctx.forward;
    const double sd = sigma * std::sqrt(p.ctx.tau);
    p.reference_pdf = [mu, sd](double x) { return normal_pdf((x - mu) / sd) / sd; };
    p.smile_family = ModelFamily::Bachelier;
  } else if (name == "lognormal") {
    const double sigma = 0.2;
    p.ctx = MarketContext::from_spot(0.5, 0.0, 1.0);
    p.quotes = model_quotes(linspace(0.01, 1.0, 200), p.ctx, {ModelFamily::BlackScholes, sigma});
    p.x_min = 0.0;
    p.x_max = 1.5;
    const double m = std::log(p.ctx.spot) + (p.ctx.rate - 0.5 * sigma * sigma) * p.ctx.tau;
    const double s = sigma * std::sqrt(p.ctx.tau);
    p.reference_pdf = [m, s](double x) {
      if (x <= 0.0) return 0.0;
      return normal_pdf((std::log(x) - m) / s) / (s * x);
    };
    p.smile_family = ModelFamily::BlackScholes;
  } else if (name == "multimodal" || name == "arbitrage") {
    const bool multi = name == "multimodal";
    const std::vector<MixtureComponent> mix =
        multi ? std::vector<MixtureComponent>{{0.5, -0.2, 0.1}, {0.45, 0.15, 0.15}, {0.05, 0.55, 0.05}}
              : std::vector<MixtureComponent>{{0.55, 0.8, 0.1}, {-0.2, 1.15, 0.07}, {0.65, 1.35, 0.2}};
    const double rate = 0.05;
    const double tau = 1.0;
    p.quotes = mixture_quotes(multi ? linspace(-0.7, 0.7, 200) : linspace(0.3, 1.7, 200), mix, rate, tau);
    p.ctx = MarketContext::from_spot(multi ? 0.0 : 1.0, rate, tau);
    if (multi) {
      double mean = 0.0;
      for (const auto& c : mix) mean += c.weight * c.mean;
      p.ctx = MarketContext::from_forward(mean, rate, tau);
    }
    p.x_min = multi ? -0.9 : 0.1;
    p.x_max = multi ? 0.9 : 2.2;
    p.reference_pdf = [mix](double x) { return std::max(0.0, mixture_pdf(mix, x)); };
    p.smile_family = multi ? ModelFamily::Bachelier : ModelFamily::BlackScholes;
  } else if (name == "spx") {
    p.ctx = MarketContext::from_forward(2700.0, 0.0, 1.0 / 12.0);
    p.x_min = 1400.0;
    p.x_max = 3400.0;
    p.rank = 70;
    p.smile_family = ModelFamily::Black;
    p.needs_input = true;
  } else if (name == "kinked") {
    const KinkedSmile smile;
    p.ctx = MarketContext::from_forward(smile.forward, smile.rate, smile.tau);
    p.quotes = kinked_quotes(smile, linspace(1.9, 2.9, 75));
    p.x_min = 1.4;
    p.x_max = 3.4;
    p.rank = 70;
    p.smile_family = ModelFamily::Black;
  } else {
    throw Error(ErrorCode::InvalidArgument, "unknown preset '" + std::string(name) + "'");
  }
  return p;
}

std::optional<Density> reference_density(const Preset& preset, const Grid& grid) {
  if (!preset.reference_pdf) return std::nullopt;
  Density d = sample_density(grid, preset.reference_pdf);
  d.values = d.values.cwiseMax(0.0);
  return d;
}

}  // namespace impdens
