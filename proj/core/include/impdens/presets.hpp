#pragma once

#include <Eigen/Dense>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "impdens/grid_kernel.hpp"
#include "impdens/pricing.hpp"

namespace impdens {

struct MixtureComponent {
  double weight;
  double mean;
  double sigma;
};

struct Preset {
  std::string name;
  std::vector<Quote> quotes;
  MarketContext ctx;
  double x_min = 0.0;
  double x_max = 1.0;
  Eigen::Index n_points = 1000;
  Eigen::Index rank = 150;
  ModelFamily smile_family = ModelFamily::Bachelier;
  // Exact density of the generating model, when known.
  std::function<double(double)> reference_pdf;
  // Quotes must come from a user file.
  bool needs_input = false;
};

std::vector<std::string> preset_names();
Preset make_preset(std::string_view name);

std::vector<double> linspace(double a, double b, int n);

// Calls and puts at every strike.
std::vector<Quote> model_quotes(const std::vector<double>& strikes, const MarketContext& ctx,
                                const PricingModel& model);
// Discounted expectations under a mixture of normals, Bachelier per component.
std::vector<Quote> mixture_quotes(const std::vector<double>& strikes, const std::vector<MixtureComponent>& mix,
                                  double rate, double tau);
double mixture_pdf(const std::vector<MixtureComponent>& mix, double x);

// Black-quoted smile sigma(K) = base + left * (corner - K)^+ + right * (K - corner)^+.
struct KinkedSmile {
  double forward = 2.7;
  double rate = 0.0;
  double tau = 1.0 / 12.0;
  double base = 0.11;
  double left_slope = 0.35;
  double right_slope = 0.05;
  double corner = 2.8;

  double vol(double strike) const;
};
std::vector<Quote> kinked_quotes(const KinkedSmile& smile, const std::vector<double>& strikes);

// Reference density on a grid, with negative parts cut to zero.
std::optional<Density> reference_density(const Preset& preset, const Grid& grid);

}  // namespace impdens
