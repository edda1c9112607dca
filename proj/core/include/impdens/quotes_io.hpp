#pragma once

#include <istream>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "impdens/grid_kernel.hpp"
#include "impdens/pricing.hpp"

namespace impdens {

struct LoadOptions {
  // Family for vol-quoted rows that leave the family column empty.
  std::optional<ModelFamily> default_family;
};

// CSV with header columns kind, strike, price | implied_vol [, family] [, weight].
// A file whose first row is already data is read as kind, strike, price [, weight].
std::vector<Quote> load_quotes(const std::string& path, const MarketContext& ctx,
                               const LoadOptions& opts = {});
std::vector<Quote> parse_quotes(std::istream& in, const MarketContext& ctx,
                                const LoadOptions& opts = {}, const std::string& source = "<stream>");

struct Rescaled {
  std::vector<Quote> quotes;
  MarketContext ctx;
};

// Strikes, prices, spot and forward divided by factor.
Rescaled apply_rescale(const std::vector<Quote>& quotes, const MarketContext& ctx, double factor);
Rescaled undo_rescale(const std::vector<Quote>& quotes, const MarketContext& ctx, double factor);

// Smallest power of ten bringing every |strike| to at most 10 (1 when none exceed 10).
double choose_rescale_factor(const std::vector<Quote>& quotes);

// Density in rescaled units mapped back to original units.
Density unscale_density(const Density& phi, double factor);

void write_density_csv(std::ostream& os, const Density& phi);
Density read_density_csv(const std::string& path);

}  // namespace impdens
