#pragma once

#include <Eigen/Dense>
#include <functional>
#include <vector>

#include "impdens/pricing.hpp"

namespace impdens {

class Grid {
 public:
  Grid() = default;

  double x_min() const { return nodes_.front(); }
  double x_max() const { return nodes_.back(); }
  Eigen::Index size() const { return static_cast<Eigen::Index>(nodes_.size()); }
  // Uniform spacing; the mean spacing for non-uniform grids.
  double dx() const { return (x_max() - x_min()) / static_cast<double>(nodes_.size() - 1); }
  bool uniform() const { return uniform_; }
  const std::vector<double>& nodes() const { return nodes_; }
  const Eigen::VectorXd& weights() const { return weights_; }

  bool operator==(const Grid& other) const { return nodes_ == other.nodes_; }

  friend Grid make_grid(double x_min, double x_max, Eigen::Index n_points);
  friend Grid make_grid_from_nodes(std::vector<double> nodes);

 private:
  std::vector<double> nodes_;
  Eigen::VectorXd weights_;
  bool uniform_ = true;
};

Grid make_grid(double x_min, double x_max, Eigen::Index n_points);
// Strictly ascending nodes with per-interval trapezoid weights.
Grid make_grid_from_nodes(std::vector<double> nodes);

Eigen::VectorXd trapezoid_weights(const Grid& grid);

struct Density {
  Grid grid;
  Eigen::VectorXd values;

  double mass() const { return grid.weights().dot(values); }
  double mean() const;
};

Density sample_density(const Grid& grid, const std::function<double(double)>& pdf);

struct KernelMatrix {
  Eigen::MatrixXd entries;
  std::vector<Quote> quotes;
  Grid grid;
  MarketContext ctx;
  bool strikes_outside_grid = false;

  Eigen::VectorXd prices() const;
};

KernelMatrix build_kernel(const std::vector<Quote>& quotes, const Grid& grid,
                          const MarketContext& ctx);

Eigen::VectorXd price_from_density(const KernelMatrix& kernel, const Density& phi);

// Rows and target prices scaled by each quote's weight.
struct WeightedSystem {
  Eigen::MatrixXd matrix;
  Eigen::VectorXd prices;
};
WeightedSystem weighted_system(const KernelMatrix& kernel);

}  // namespace impdens
