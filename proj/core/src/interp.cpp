#include "impdens/interp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "format.hpp"
#include "impdens/error.hpp"

namespace impdens {

namespace {

void check_density(const Density& phi) {
  if (phi.values.size() != phi.grid.size()) {
    throw Error(ErrorCode::GridMismatch, "density length differs from grid size");
  }
  for (Eigen::Index j = 0; j < phi.values.size(); ++j) {
    if (!std::isfinite(phi.values(j)) || phi.values(j) < 0.0) {
      throw Error(ErrorCode::InvalidArgument, "density must be finite and nonnegative");
    }
  }
}

// Exact integral of f(x) * phi_lin(x) over [lo, hi] within one cell [a, b]
// for linear f; Simpson's rule is exact for the quadratic product.
template <class F>
double cell_integral(double a, double b, double pa, double pb, double lo, double hi, F f) {
  if (!(hi > lo)) return 0.0;
  const double slope = (pb - pa) / (b - a);
  auto g = [&](double x) { return f(x) * (pa + slope * (x - a)); };
  const double mid = 0.5 * (lo + hi);
  return (hi - lo) / 6.0 * (g(lo) + 4.0 * g(mid) + g(hi));
}

}  // namespace

double interp_density(const Density& phi, double x) {
  const auto& nodes = phi.grid.nodes();
  if (!(x >= nodes.front() && x <= nodes.back())) {
    throw Error(ErrorCode::OutOfSupport, "query point outside the density grid");
  }
  auto it = std::upper_bound(nodes.begin(), nodes.end(), x);
  if (it == nodes.end()) return phi.values(phi.values.size() - 1);
  const auto j = static_cast<Eigen::Index>(it - nodes.begin()) - 1;
  const double a = nodes[static_cast<std::size_t>(j)];
  const double b = nodes[static_cast<std::size_t>(j + 1)];
  if (x == a) return phi.values(j);
  const double t = (x - a) / (b - a);
  return (1.0 - t) * phi.values(j) + t * phi.values(j + 1);
}

Density refine_density(const Density& phi, int factor) {
  if (factor < 1) throw Error(ErrorCode::InvalidArgument, "refinement factor must be positive");
  const auto& nodes = phi.grid.nodes();
  std::vector<double> fine;
  fine.reserve((nodes.size() - 1) * static_cast<std::size_t>(factor) + 1);
  for (std::size_t j = 0; j + 1 < nodes.size(); ++j) {
    for (int k = 0; k < factor; ++k) {
      fine.push_back(nodes[j] + (nodes[j + 1] - nodes[j]) * k / factor);
    }
  }
  fine.push_back(nodes.back());
  Grid g = phi.grid.uniform() ? make_grid(nodes.front(), nodes.back(), static_cast<Eigen::Index>(fine.size()))
                              : make_grid_from_nodes(fine);
  Density out{g, Eigen::VectorXd(g.size())};
  for (Eigen::Index j = 0; j < g.size(); ++j) {
    out.values(j) = interp_density(phi, g.nodes()[static_cast<std::size_t>(j)]);
  }
  return out;
}

double interpolant_mass(const Density& phi) { return phi.grid.weights().dot(phi.values); }

double interpolant_mean(const Density& phi) {
  const auto& x = phi.grid.nodes();
  double acc = 0.0;
  for (std::size_t j = 0; j + 1 < x.size(); ++j) {
    const auto jj = static_cast<Eigen::Index>(j);
    acc += cell_integral(x[j], x[j + 1], phi.values(jj), phi.values(jj + 1), x[j], x[j + 1],
                         [](double s) { return s; });
  }
  return acc;
}

double pricing_mean(const Density& phi) {
  const auto& x = phi.grid.nodes();
  const auto& w = phi.grid.weights();
  double atoms = 0.0;
  for (std::size_t j = 0; j < x.size(); ++j) {
    const auto jj = static_cast<Eigen::Index>(j);
    atoms += w(jj) * x[j] * phi.values(jj);
  }
  return 0.5 * (interpolant_mean(phi) + atoms);
}

double price_at_strike(const Density& phi, OptionKind kind, double strike, const MarketContext& ctx) {
  require_finite("strike", strike);
  require_finite("rate", ctx.rate);
  require_finite("tau", ctx.tau);
  check_density(phi);
  const auto& x = phi.grid.nodes();
  const auto& w = phi.grid.weights();
  double atoms = 0.0;
  for (std::size_t j = 0; j < x.size(); ++j) {
    const double payoff = kind == OptionKind::Call ? x[j] - strike : strike - x[j];
    if (payoff > 0.0) atoms += w(static_cast<Eigen::Index>(j)) * payoff * phi.values(static_cast<Eigen::Index>(j));
  }
  double acc = 0.0;
  for (std::size_t j = 0; j + 1 < x.size(); ++j) {
    const auto jj = static_cast<Eigen::Index>(j);
    const double a = x[j];
    const double b = x[j + 1];
    if (kind == OptionKind::Call) {
      acc += cell_integral(a, b, phi.values(jj), phi.values(jj + 1), std::max(a, strike), b,
                           [strike](double s) { return s - strike; });
    } else {
      acc += cell_integral(a, b, phi.values(jj), phi.values(jj + 1), a, std::min(b, strike),
                           [strike](double s) { return strike - s; });
    }
  }
  return ctx.discount() * 0.5 * (acc + atoms);
}

SmileCurve build_smile(const Density& phi, const std::vector<double>& strikes, const MarketContext& ctx,
                       ModelFamily family, const SmileOptions& opts) {
  check_density(phi);
  for (std::size_t k = 0; k < strikes.size(); ++k) {
    require_finite("strike", strikes[k]);
    if (k > 0 && !(strikes[k] > strikes[k - 1])) {
      throw Error(ErrorCode::InvalidArgument, "smile strikes must be strictly ascending");
    }
  }
  if (family != ModelFamily::Bachelier && !strikes.empty() && !(strikes.front() > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "lognormal families need positive strikes");
  }

  SmileCurve smile;
  smile.family = family;
  smile.strikes = strikes;
  const double mass = interpolant_mass(phi);
  const double forward = pricing_mean(phi) / mass;
  smile.density_ctx = MarketContext::from_forward(forward, ctx.rate, ctx.tau);
  const MarketContext& inv_ctx = opts.inversion_ctx ? *opts.inversion_ctx : smile.density_ctx;
  const double split = inv_ctx.forward;

  for (double k : strikes) {
    const double call = price_at_strike(phi, OptionKind::Call, k, ctx);
    const double put = price_at_strike(phi, OptionKind::Put, k, ctx);
    smile.call_prices.push_back(call);
    smile.put_prices.push_back(put);
    bool extra = false;
    if (opts.quoted_range) extra = k < opts.quoted_range->first || k > opts.quoted_range->second;
    smile.extrapolated.push_back(extra);

    const bool use_put = k < split;
    try {
      const double vol = implied_vol(use_put ? put : call, use_put ? OptionKind::Put : OptionKind::Call, family,
                                     inv_ctx, k, opts.iv);
      smile.implied_vols.push_back(vol);
      smile.vol_valid.push_back(true);
      smile.vol_errors.emplace_back();
    } catch (const Error& err) {
      smile.implied_vols.push_back(std::numeric_limits<double>::quiet_NaN());
      smile.vol_valid.push_back(false);
      smile.vol_errors.emplace_back(err.what());
    }
  }
  return smile;
}

void write_smile_csv(std::ostream& os, const SmileCurve& smile) {
  os << "strike,call_price,put_price,implied_vol,model_family,extrapolated_flag\n";
  for (std::size_t k = 0; k < smile.strikes.size(); ++k) {
    os << detail::fmt(smile.strikes[k]) << ',' << detail::fmt(smile.call_prices[k]) << ','
       << detail::fmt(smile.put_prices[k]) << ',';
    if (smile.vol_valid[k]) os << detail::fmt(smile.implied_vols[k]);
    os << ',' << to_string(smile.family) << ',' << (smile.extrapolated[k] ? "true" : "false") << '\n';
  }
}

}  // namespace impdens
