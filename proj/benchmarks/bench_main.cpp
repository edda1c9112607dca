#include <benchmark/benchmark.h>

#include <cmath>
#include <map>
#include <random>
#include <string>

#include "impdens/diagnostics.hpp"
#include "impdens/grid_kernel.hpp"
#include "impdens/presets.hpp"
#include "impdens/solver.hpp"
#include "impdens/svd_sparse.hpp"

using namespace impdens;

namespace {

struct Problem {
  Preset preset;
  Grid grid;
  KernelMatrix kernel;
  SparseModel model;
  Eigen::VectorXd prices;
};

const Problem& problem(const char* name) {
  static std::map<std::string, Problem> cache;
  auto it = cache.find(name);
  if (it == cache.end()) {
    Preset p = make_preset(name);
    Grid g = make_grid(p.x_min, p.x_max, p.n_points);
    KernelMatrix k = build_kernel(p.quotes, g, p.ctx);
    SparseModel m = truncate(decompose(k), p.rank);
    Eigen::VectorXd prices = weighted_system(k).prices;
    it = cache.emplace(name, Problem{std::move(p), g, std::move(k), std::move(m), std::move(prices)}).first;
  }
  return it->second;
}

void BM_BuildKernel(benchmark::State& state) {
  const Preset p = make_preset("normal");
  const Grid g = make_grid(p.x_min, p.x_max, state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(build_kernel(p.quotes, g, p.ctx));
}
BENCHMARK(BM_BuildKernel)->Arg(1000)->Arg(4000)->Unit(benchmark::kMicrosecond);

void BM_Decompose(benchmark::State& state) {
  const Preset p = make_preset("normal");
  const KernelMatrix k = build_kernel(p.quotes, make_grid(p.x_min, p.x_max, state.range(0)), p.ctx);
  for (auto _ : state) benchmark::DoNotOptimize(decompose(k));
}
BENCHMARK(BM_Decompose)->Arg(1000)->Arg(4000)->Unit(benchmark::kMillisecond);

void solve_bench(benchmark::State& state, const char* preset, SolverMethod method, double tol = 1e-10) {
  const Problem& pr = problem(preset);
  SolverConfig cfg;
  cfg.method = method;
  cfg.tol_primal = tol;
  cfg.tol_dual = tol;
  cfg.lambda = std::pow(10.0, -static_cast<double>(state.range(0)));
  int iterations = 0;
  bool converged = false;
  for (auto _ : state) {
    const SolveResult r = solve(pr.model, pr.prices, cfg);
    iterations = r.iterations;
    converged = r.converged;
    benchmark::DoNotOptimize(r.chi2);
  }
  state.counters["iterations"] = iterations;
  state.counters["converged"] = converged ? 1 : 0;
}

void BM_SolveActiveSet(benchmark::State& state) { solve_bench(state, "normal", SolverMethod::ActiveSet); }
BENCHMARK(BM_SolveActiveSet)->Arg(10)->Arg(8)->Arg(6)->Unit(benchmark::kMillisecond);

void BM_SolveAdmm(benchmark::State& state) { solve_bench(state, "arbitrage", SolverMethod::Admm, 1e-7); }
BENCHMARK(BM_SolveAdmm)->Arg(8)->Arg(6)->Iterations(1)->Unit(benchmark::kMillisecond);

void BM_SolveActiveSetArbitrage(benchmark::State& state) { solve_bench(state, "arbitrage", SolverMethod::ActiveSet); }
BENCHMARK(BM_SolveActiveSetArbitrage)->Arg(8)->Arg(6)->Unit(benchmark::kMillisecond);

void BM_LambdaScan(benchmark::State& state) {
  const Problem& pr = problem("normal");
  const auto lambdas = default_lambda_grid();
  for (auto _ : state) benchmark::DoNotOptimize(lambda_scan(pr.model, pr.prices, lambdas, SolverConfig{}));
}
BENCHMARK(BM_LambdaScan)->Unit(benchmark::kMillisecond);

void BM_ProjectFeasible(benchmark::State& state) {
  const Grid g = make_grid(0.0, 1.0, state.range(0));
  std::mt19937_64 rng(5);
  std::normal_distribution<double> z(0.0, 1.0);
  Eigen::VectorXd v(g.size());
  for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = z(rng);
  for (auto _ : state) benchmark::DoNotOptimize(project_feasible(v, g.weights()));
}
BENCHMARK(BM_ProjectFeasible)->Arg(1000)->Arg(10000)->Unit(benchmark::kMicrosecond);

}  // namespace

BENCHMARK_MAIN();
