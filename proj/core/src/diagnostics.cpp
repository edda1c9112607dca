#include "impdens/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <limits>

#include "format.hpp"
#include "impdens/error.hpp"

namespace impdens {

double chi_squared(const SparseModel& model, const Eigen::VectorXd& prices,
                   const Eigen::VectorXd& phi_prime) {
  if (phi_prime.size() != model.rank()) {
    throw Error(ErrorCode::DimensionMismatch, "transformed density length differs from rank");
  }
  const Eigen::VectorXd b = transform_prices(model, prices);
  return 0.5 * (b - model.s.cwiseProduct(phi_prime)).squaredNorm();
}

double bhattacharyya(const Density& p, const Density& q) {
  if (!(p.grid == q.grid)) throw Error(ErrorCode::GridMismatch, "densities on different grids");
  if ((p.values.array() < 0.0).any() || (q.values.array() < 0.0).any()) {
    throw Error(ErrorCode::InvalidArgument, "densities must be nonnegative");
  }
  const double overlap = p.grid.weights().dot((p.values.cwiseProduct(q.values)).cwiseSqrt());
  if (!(overlap >= 1e-300)) return std::numeric_limits<double>::infinity();
  return -std::log(overlap);
}

int count_significant(const Eigen::VectorXd& phi_prime, double threshold) {
  if (!(threshold > 0.0)) throw Error(ErrorCode::InvalidArgument, "threshold must be positive");
  return static_cast<int>((phi_prime.array().abs() > threshold).count());
}

int ScanEntry::count_at(double threshold) const {
  for (const auto& [a, n] : significant_counts) {
    if (a == threshold) return n;
  }
  return -1;
}

const ScanEntry* ScanResult::find(double lambda) const {
  for (const auto& e : entries) {
    if (e.lambda == lambda) return &e;
  }
  return nullptr;
}

namespace {

ScanEntry run_entry(const SparseModel& model, const Eigen::VectorXd& prices, double lambda,
                    SolverConfig cfg, const std::optional<Density>& reference,
                    const ScanOptions& opts) {
  ScanEntry e;
  e.lambda = lambda;
  cfg.lambda = lambda;
  try {
    SolveResult r = solve(model, prices, cfg);
    e.chi2 = r.chi2;
    e.objective = r.objective;
    e.converged = r.converged;
    if (reference) e.d_b = bhattacharyya(r.phi, *reference);
    for (double a : opts.thresholds) e.significant_counts.emplace_back(a, count_significant(r.phi_prime, a));
    if (!r.converged) e.error = "solver did not reach tolerance";
    e.solve = std::move(r);
  } catch (const Error& err) {
    e.converged = false;
    e.chi2 = std::numeric_limits<double>::quiet_NaN();
    e.objective = std::numeric_limits<double>::quiet_NaN();
    e.error = err.what();
  }
  return e;
}

}  // namespace

ScanResult lambda_scan(const SparseModel& model, const Eigen::VectorXd& prices,
                       std::vector<double> lambdas, const SolverConfig& cfg_template,
                       const std::optional<Density>& reference, const ScanOptions& opts) {
  if (lambdas.empty()) throw Error(ErrorCode::InvalidArgument, "lambda list is empty");
  for (double l : lambdas) {
    if (!(l >= 0.0) || !std::isfinite(l)) {
      throw Error(ErrorCode::InvalidArgument, "lambda values must be finite and nonnegative");
    }
  }
  std::sort(lambdas.begin(), lambdas.end());
  lambdas.erase(std::unique(lambdas.begin(), lambdas.end()), lambdas.end());

  ScanResult scan;
  scan.entries.resize(lambdas.size());
  if (opts.warm_start || opts.threads <= 1) {
    SolverConfig cfg = cfg_template;
    for (std::size_t k = 0; k < lambdas.size(); ++k) {
      scan.entries[k] = run_entry(model, prices, lambdas[k], cfg, reference, opts);
      if (opts.warm_start && scan.entries[k].solve) cfg.warm_start = scan.entries[k].solve->phi_prime;
    }
  } else {
    for (std::size_t start = 0; start < lambdas.size(); start += opts.threads) {
      std::vector<std::future<ScanEntry>> jobs;
      const std::size_t stop = std::min(lambdas.size(), start + opts.threads);
      for (std::size_t k = start; k < stop; ++k) {
        jobs.push_back(std::async(std::launch::async, run_entry, std::cref(model), std::cref(prices),
                                  lambdas[k], cfg_template, std::cref(reference), std::cref(opts)));
      }
      for (std::size_t k = start; k < stop; ++k) scan.entries[k] = jobs[k - start].get();
    }
  }

  try {
    scan.selected_lambda =
        opts.chi2_budget ? select_by_budget(scan, *opts.chi2_budget) : select_elbow(scan, opts.elbow_epsilon);
  } catch (const Error&) {
    scan.selected_lambda.reset();
  }
  return scan;
}

double select_elbow(const ScanResult& scan, double epsilon) {
  if (!(epsilon >= 0.0)) throw Error(ErrorCode::InvalidArgument, "epsilon must be nonnegative");
  double best = std::numeric_limits<double>::infinity();
  for (const auto& e : scan.entries) {
    if (e.converged) best = std::min(best, e.chi2);
  }
  if (!std::isfinite(best)) throw Error(ErrorCode::NoConvergedEntries, "no converged scan entries");
  return select_by_budget(scan, (1.0 + epsilon) * best);
}

double select_by_budget(const ScanResult& scan, double chi2_budget) {
  std::optional<double> pick;
  bool any = false;
  for (const auto& e : scan.entries) {
    if (!e.converged) continue;
    any = true;
    if (e.chi2 <= chi2_budget && (!pick || e.lambda > *pick)) pick = e.lambda;
  }
  if (!any) throw Error(ErrorCode::NoConvergedEntries, "no converged scan entries");
  if (!pick) {
    throw Error(ErrorCode::InvalidArgument, "no scan entry meets the chi2 budget");
  }
  return *pick;
}

std::vector<double> log_spaced(double lo, double hi, int count) {
  if (!(lo > 0.0) || !(hi >= lo) || count < 1) {
    throw Error(ErrorCode::InvalidArgument, "invalid log-spaced range");
  }
  std::vector<double> out(static_cast<std::size_t>(count));
  const double a = std::log10(lo);
  const double b = std::log10(hi);
  for (int k = 0; k < count; ++k) {
    const double t = count == 1 ? 0.0 : static_cast<double>(k) / (count - 1);
    out[static_cast<std::size_t>(k)] = std::pow(10.0, a + (b - a) * t);
  }
  return out;
}

std::vector<double> default_lambda_grid() { return log_spaced(1e-12, 1e-4, 33); }

void write_scan_csv(std::ostream& os, const ScanResult& scan) {
  os << "lambda,chi2,objective,d_B,count@1e-2,count@1e-3,converged\n";
  for (const auto& e : scan.entries) {
    os << detail::fmt(e.lambda) << ',' << detail::fmt(e.chi2) << ',' << detail::fmt(e.objective) << ',';
    if (e.d_b) os << detail::fmt(*e.d_b);
    const int c2 = e.count_at(1e-2);
    const int c3 = e.count_at(1e-3);
    os << ',' << (c2 >= 0 ? std::to_string(c2) : "") << ',' << (c3 >= 0 ? std::to_string(c3) : "")
       << ',' << (e.converged ? "true" : "false") << '\n';
  }
}

}  // namespace impdens
