#include "impdens/grid_kernel.hpp"

#include <cmath>
#include <string>

#include "impdens/error.hpp"

namespace impdens {

Grid make_grid(double x_min, double x_max, Eigen::Index n_points) {
  require_finite("x_min", x_min);
  require_finite("x_max", x_max);
  if (n_points < 3 || !(x_max > x_min)) {
    throw Error(ErrorCode::DegenerateInterval,
                "grid needs x_max > x_min and at least 3 points (got N = " +
                    std::to_string(n_points) + ")");
  }
  Grid g;
  const double dx = (x_max - x_min) / static_cast<double>(n_points - 1);
  g.nodes_.resize(static_cast<std::size_t>(n_points));
  for (Eigen::Index j = 0; j < n_points; ++j) {
    g.nodes_[static_cast<std::size_t>(j)] = x_min + dx * static_cast<double>(j);
  }
  g.nodes_.back() = x_max;
  g.weights_ = Eigen::VectorXd::Constant(n_points, dx);
  g.weights_(0) = 0.5 * dx;
  g.weights_(n_points - 1) = 0.5 * dx;
  g.uniform_ = true;
  return g;
}

Grid make_grid_from_nodes(std::vector<double> nodes) {
  if (nodes.size() < 3) throw Error(ErrorCode::DegenerateInterval, "grid needs at least 3 nodes");
  for (std::size_t j = 0; j < nodes.size(); ++j) {
    require_finite("grid node", nodes[j]);
    if (j > 0 && !(nodes[j] > nodes[j - 1])) {
      throw Error(ErrorCode::DegenerateInterval, "grid nodes must be strictly ascending");
    }
  }
  Grid g;
  const auto n = static_cast<Eigen::Index>(nodes.size());
  g.weights_ = Eigen::VectorXd::Zero(n);
  for (Eigen::Index j = 0; j + 1 < n; ++j) {
    const double h = nodes[static_cast<std::size_t>(j + 1)] - nodes[static_cast<std::size_t>(j)];
    g.weights_(j) += 0.5 * h;
    g.weights_(j + 1) += 0.5 * h;
  }
  g.nodes_ = std::move(nodes);
  g.uniform_ = false;
  return g;
}

Eigen::VectorXd trapezoid_weights(const Grid& grid) { return grid.weights(); }

double Density::mean() const {
  double acc = 0.0;
  const auto& x = grid.nodes();
  const auto& w = grid.weights();
  for (Eigen::Index j = 0; j < values.size(); ++j) {
    acc += w(j) * x[static_cast<std::size_t>(j)] * values(j);
  }
  return acc;
}

Density sample_density(const Grid& grid, const std::function<double(double)>& pdf) {
  Density d{grid, Eigen::VectorXd(grid.size())};
  for (Eigen::Index j = 0; j < grid.size(); ++j) {
    d.values(j) = pdf(grid.nodes()[static_cast<std::size_t>(j)]);
  }
  return d;
}

Eigen::VectorXd KernelMatrix::prices() const {
  Eigen::VectorXd p(static_cast<Eigen::Index>(quotes.size()));
  for (std::size_t i = 0; i < quotes.size(); ++i) p(static_cast<Eigen::Index>(i)) = quotes[i].price;
  return p;
}

KernelMatrix build_kernel(const std::vector<Quote>& quotes, const Grid& grid,
                          const MarketContext& ctx) {
  if (quotes.empty()) throw Error(ErrorCode::EmptyQuotes, "no quotes supplied");
  require_finite("rate", ctx.rate);
  require_finite("tau", ctx.tau);
  const auto m = static_cast<Eigen::Index>(quotes.size());
  const Eigen::Index n = grid.size();
  const double df = ctx.discount();
  const auto& x = grid.nodes();
  const auto& w = grid.weights();

  KernelMatrix k{Eigen::MatrixXd::Zero(m, n), quotes, grid, ctx, false};
  for (Eigen::Index i = 0; i < m; ++i) {
    const Quote& q = quotes[static_cast<std::size_t>(i)];
    require_finite("strike", q.strike);
    if (q.strike < grid.x_min() || q.strike > grid.x_max()) k.strikes_outside_grid = true;
    const double eps = q.kind == OptionKind::Call ? 1.0 : -1.0;
    for (Eigen::Index j = 0; j < n; ++j) {
      const double payoff = eps * (x[static_cast<std::size_t>(j)] - q.strike);
      if (payoff > 0.0) k.entries(i, j) = w(j) * df * payoff;
    }
  }
  return k;
}

Eigen::VectorXd price_from_density(const KernelMatrix& kernel, const Density& phi) {
  if (!(phi.grid == kernel.grid)) {
    throw Error(ErrorCode::GridMismatch, "density grid differs from kernel grid");
  }
  return kernel.entries * phi.values;
}

WeightedSystem weighted_system(const KernelMatrix& kernel) {
  WeightedSystem ws{kernel.entries, kernel.prices()};
  for (Eigen::Index i = 0; i < ws.matrix.rows(); ++i) {
    const double wt = kernel.quotes[static_cast<std::size_t>(i)].weight;
    if (!(wt >= 0.0) || !std::isfinite(wt)) {
      throw Error(ErrorCode::InvalidArgument, "quote weights must be finite and nonnegative");
    }
    if (wt != 1.0) {
      ws.matrix.row(i) *= wt;
      ws.prices(i) *= wt;
    }
  }
  return ws;
}

}  // namespace impdens
