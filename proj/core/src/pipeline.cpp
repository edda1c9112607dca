#include "impdens/pipeline.hpp"

#include <Eigen/Core>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <json.hpp>

#include "impdens/error.hpp"
#include "impdens/grid_kernel.hpp"
#include "impdens/presets.hpp"
#include "impdens/quotes_io.hpp"
#include "impdens/svd_sparse.hpp"

namespace impdens {

namespace {

using json = nlohmann::ordered_json;
using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

std::ofstream open_output(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string());
  return out;
}

void ensure_dir(const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::Io, "cannot create " + dir.string() + ": " + ec.message());
}

json versions() {
  return {{"impdens", IMPDENS_VERSION},
          {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
                        std::to_string(EIGEN_MINOR_VERSION)},
          {"compiler", __VERSION__},
          {"cxx_standard", static_cast<long>(__cplusplus)}};
}

void say(std::ostream* log, const std::string& msg) {
  if (log) *log << msg << '\n';
}

std::vector<double> smile_strikes(const RunConfig& cfg, double lo_quote, double hi_quote, double x_min,
                                  double x_max, ModelFamily family) {
  const double pad = 0.25 * (hi_quote - lo_quote);
  double lo = cfg.smile_min.value_or(std::max(lo_quote - pad, x_min + 0.02 * (x_max - x_min)));
  const double hi = cfg.smile_max.value_or(std::min(hi_quote + pad, x_max - 0.02 * (x_max - x_min)));
  if (family != ModelFamily::Bachelier && lo <= 0.0 && !cfg.smile_min) lo = std::min(lo_quote, hi) * 0.5;
  if (!(hi > lo) || cfg.smile_points < 2) throw Error(ErrorCode::InvalidArgument, "invalid smile strike range");
  return linspace(lo, hi, cfg.smile_points);
}

}  // namespace

int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::Io: return exit_code::kIo;
    case ErrorCode::NoConvergence:
    case ErrorCode::NoConvergedEntries:
    case ErrorCode::NumericalFailure: return exit_code::kNoConvergence;
    default: return exit_code::kValidation;
  }
}

PipelineOutcome run_pipeline(const RunConfig& cfg, std::ostream* log) {
  PipelineOutcome out;
  const auto t_start = Clock::now();
  json manifest;
  json timings;
  try {
    Preset preset;
    if (cfg.preset) preset = make_preset(*cfg.preset);

    MarketContext ctx = preset.ctx;
    if (cfg.rate) ctx.rate = *cfg.rate;
    if (cfg.tau) ctx.tau = *cfg.tau;
    if (cfg.spot && cfg.forward) {
      ctx.spot = *cfg.spot;
      ctx.forward = *cfg.forward;
    } else if (cfg.spot) {
      ctx = MarketContext::from_spot(*cfg.spot, ctx.rate, ctx.tau);
    } else if (cfg.forward) {
      ctx = MarketContext::from_forward(*cfg.forward, ctx.rate, ctx.tau);
    } else if (cfg.rate || cfg.tau) {
      ctx = MarketContext::from_spot(ctx.spot, ctx.rate, ctx.tau);
    }
    if (!(ctx.tau > 0.0)) throw Error(ErrorCode::InvalidArgument, "tau must be positive");

    std::vector<Quote> quotes = preset.quotes;
    if (cfg.input_path) {
      LoadOptions lo;
      lo.default_family = cfg.quote_family ? cfg.quote_family : std::optional<ModelFamily>(preset.smile_family);
      quotes = load_quotes(*cfg.input_path, ctx, lo);
    } else if (!cfg.preset || preset.needs_input) {
      throw Error(ErrorCode::InvalidArgument, "a quote file is required (--input)");
    }
    if (quotes.empty()) throw Error(ErrorCode::EmptyQuotes, "no quotes to fit");

    const double factor = cfg.rescale_factor.value_or(choose_rescale_factor(quotes));
    if (!(factor > 0.0) || std::abs(std::log10(factor) - std::round(std::log10(factor))) > 1e-12) {
      throw Error(ErrorCode::InvalidArgument, "rescale factor must be a positive power of 10");
    }
    out.rescale_factor = factor;
    const Rescaled scaled = apply_rescale(quotes, ctx, factor);

    const double x_min = cfg.x_min.value_or(preset.x_min);
    const double x_max = cfg.x_max.value_or(preset.x_max);
    const Eigen::Index n_points = cfg.n_points.value_or(preset.n_points);
    const Eigen::Index rank = cfg.rank.value_or(preset.rank);
    const std::vector<double> lambdas = cfg.lambdas.empty() ? default_lambda_grid() : cfg.lambdas;

    auto t0 = Clock::now();
    const Grid grid = make_grid(x_min / factor, x_max / factor, n_points);
    const KernelMatrix kernel = build_kernel(scaled.quotes, grid, scaled.ctx);
    timings["kernel_ms"] = ms_since(t0);
    if (kernel.strikes_outside_grid) say(log, "warning: some strikes lie outside the density grid");

    t0 = Clock::now();
    const SvdFactors factors = decompose(kernel);
    const SparseModel model = truncate(factors, rank);
    timings["svd_ms"] = ms_since(t0);

    std::optional<Density> reference;
    if (preset.reference_pdf && !cfg.input_path) {
      const auto pdf = preset.reference_pdf;
      reference = sample_density(grid, [pdf, factor](double x) { return std::max(0.0, factor * pdf(x * factor)); });
    }

    ScanOptions sopts;
    sopts.warm_start = cfg.warm_start;
    sopts.threads = cfg.threads;
    sopts.elbow_epsilon = cfg.elbow_epsilon;
    sopts.chi2_budget = cfg.chi2_budget;

    t0 = Clock::now();
    const Eigen::VectorXd prices = weighted_system(kernel).prices;
    out.scan = lambda_scan(model, prices, lambdas, cfg.solver, reference, sopts);
    timings["scan_ms"] = ms_since(t0);

    const std::filesystem::path dir(cfg.output_dir);
    ensure_dir(dir);
    {
      auto f = open_output(dir / "scan.csv");
      write_scan_csv(f, out.scan);
      out.artifacts.push_back((dir / "scan.csv").string());
    }

    bool all_converged = true;
    for (const auto& e : out.scan.entries) all_converged = all_converged && e.converged;

    const ScanEntry* chosen = out.scan.selected_lambda ? out.scan.find(*out.scan.selected_lambda) : nullptr;
    if (!chosen) {
      for (const auto& e : out.scan.entries) {
        if (e.solve && (!chosen || e.chi2 < chosen->chi2)) chosen = &e;
      }
    }

    json results;
    results["strikes_outside_grid"] = kernel.strikes_outside_grid;
    results["condition_truncated"] = model.condition();
    results["numerical_rank"] = numerical_rank(factors);
    results["all_converged"] = all_converged;
    if (out.scan.selected_lambda) results["selected_lambda"] = *out.scan.selected_lambda;

    bool selected_converged = false;
    if (cfg.mode == RunMode::Fit && chosen && chosen->solve) {
      const SolveResult& sr = *chosen->solve;
      selected_converged = sr.converged;
      t0 = Clock::now();
      Density density = unscale_density(sr.phi, factor);
      {
        auto f = open_output(dir / "density.csv");
        write_density_csv(f, density);
        out.artifacts.push_back((dir / "density.csv").string());
      }
      double q_lo = quotes.front().strike, q_hi = quotes.front().strike;
      for (const auto& q : quotes) {
        q_lo = std::min(q_lo, q.strike);
        q_hi = std::max(q_hi, q.strike);
      }
      const ModelFamily family = cfg.smile_family.value_or(preset.smile_family);
      SmileOptions smopts;
      smopts.quoted_range = std::make_pair(q_lo, q_hi);
      const auto strikes = smile_strikes(cfg, q_lo, q_hi, x_min, x_max, family);
      SmileCurve smile = build_smile(density, strikes, ctx, family, smopts);
      {
        auto f = open_output(dir / "smile.csv");
        write_smile_csv(f, smile);
        out.artifacts.push_back((dir / "smile.csv").string());
      }
      timings["smile_ms"] = ms_since(t0);
      results["fit"] = {{"lambda", chosen->lambda},
                        {"chi2", sr.chi2},
                        {"chi2_prices", sr.chi2_prices * factor * factor},
                        {"objective", sr.objective},
                        {"iterations", sr.iterations},
                        {"converged", sr.converged},
                        {"primal_residual", sr.primal_residual},
                        {"dual_residual", sr.dual_residual},
                        {"min_raw_density", sr.min_raw_density},
                        {"mass", sr.phi.mass()}};
      if (chosen->d_b) results["fit"]["d_B"] = *chosen->d_b;
      int failed_vols = 0;
      for (bool ok : smile.vol_valid) failed_vols += ok ? 0 : 1;
      results["smile"] = {{"points", smile.strikes.size()},
                          {"family", std::string(to_string(family))},
                          {"failed_vol_inversions", failed_vols},
                          {"density_forward", smile.density_ctx.forward}};
      out.density = std::move(density);
      out.smile = std::move(smile);
    }

    manifest["command"] = cfg.mode == RunMode::Fit ? "fit" : "scan";
    manifest["inputs"] = {{"preset", cfg.preset ? json(*cfg.preset) : json(nullptr)},
                          {"input_path", cfg.input_path ? json(*cfg.input_path) : json(nullptr)},
                          {"quotes", quotes.size()},
                          {"rate", ctx.rate},
                          {"tau", ctx.tau},
                          {"spot", ctx.spot},
                          {"forward", ctx.forward},
                          {"forward_consistent", ctx.forward_consistent()},
                          {"x_min", x_min},
                          {"x_max", x_max},
                          {"n_points", n_points},
                          {"rank", rank},
                          {"lambdas", lambdas}};
    manifest["decisions"] = {{"solver_method", std::string(to_string(cfg.solver.method))},
                             {"rho", cfg.solver.rho},
                             {"adaptive_rho", cfg.solver.adaptive_rho},
                             {"tol_primal", cfg.solver.tol_primal},
                             {"tol_dual", cfg.solver.tol_dual},
                             {"max_iter", cfg.solver.max_iter},
                             {"warm_start", cfg.warm_start},
                             {"elbow_epsilon", cfg.elbow_epsilon},
                             {"chi2_budget", cfg.chi2_budget ? json(*cfg.chi2_budget) : json(nullptr)},
                             {"rescale_factor", factor},
                             {"significance_thresholds", {1e-2, 1e-3}},
                             {"numerical_zero_ratio", kNumericalZeroRatio},
                             {"iv_bracket", {ImpliedVolOptions{}.sigma_lo, ImpliedVolOptions{}.sigma_hi}},
                             {"iv_tolerance", ImpliedVolOptions{}.tol}};
    manifest["results"] = results;

    if (!all_converged || !out.scan.selected_lambda || (cfg.mode == RunMode::Fit && !selected_converged)) {
      out.exit_code = exit_code::kNoConvergence;
      out.message = "one or more solves did not converge";
    }
  } catch (const Error& err) {
    out.exit_code = exit_code_for(err.code());
    out.message = err.what();
    manifest["error"] = {{"code", std::string(to_string(err.code()))}, {"message", err.what()}};
  }

  timings["total_ms"] = ms_since(t_start);
  manifest["versions"] = versions();
  manifest["timings"] = timings;
  manifest["exit_code"] = out.exit_code;
  {
    try {
      const std::filesystem::path dir(cfg.output_dir);
      ensure_dir(dir);
      auto f = open_output(dir / "manifest.json");
      f << manifest.dump(2) << '\n';
      out.artifacts.push_back((dir / "manifest.json").string());
    } catch (const Error& err) {
      out.exit_code = exit_code::kIo;
      out.message = err.what();
    }
  }
  if (!out.message.empty()) say(log, out.message);
  return out;
}

PipelineOutcome run_smile(const SmileRequest& req, std::ostream* log) {
  PipelineOutcome out;
  try {
    const Density phi = read_density_csv(req.density_path);
    SmileOptions opts;
    opts.quoted_range = req.quoted_range;
    out.smile = build_smile(phi, req.strikes, req.ctx, req.family, opts);
    const std::filesystem::path path(req.output_path);
    if (path.has_parent_path()) ensure_dir(path.parent_path());
    auto f = open_output(path);
    write_smile_csv(f, *out.smile);
    out.artifacts.push_back(path.string());
  } catch (const Error& err) {
    out.exit_code = exit_code_for(err.code());
    out.message = err.what();
    say(log, out.message);
  }
  return out;
}

PipelineOutcome run_diagnose(const DiagnoseRequest& req, std::ostream* log) {
  PipelineOutcome out;
  try {
    const std::filesystem::path dir(req.output_dir);
    ensure_dir(dir);

    const auto series = condition_series(make_grid(req.x_min, req.x_max, req.n_condition), req.strike_counts);
    {
      auto f = open_output(dir / "condition.csv");
      write_condition_csv(f, series);
      out.artifacts.push_back((dir / "condition.csv").string());
    }
    const SvdFactors f_spec = decompose(call_only_kernel(make_grid(req.x_min, req.x_max, req.n_spectrum),
                                                         req.spectrum_strikes));
    const Eigen::VectorXd normalized = normalized_singular_values(f_spec);
    {
      auto f = open_output(dir / "singular_values.csv");
      write_singular_values_csv(f, normalized);
      out.artifacts.push_back((dir / "singular_values.csv").string());
    }

    std::vector<double> ms, cs;
    for (const auto& p : series) {
      ms.push_back(static_cast<double>(p.n_strikes));
      cs.push_back(p.condition);
    }
    std::vector<double> idx, sv;
    const int count = std::min<int>(req.fit_count, static_cast<int>(normalized.size()));
    for (int i = 0; i < count; ++i) {
      idx.push_back(i + 1.0);
      sv.push_back(normalized(i));
    }
    if (series.size() >= 2) say(log, "condition exponent: " + std::to_string(fit_power_law(ms, cs).exponent));
    if (count >= 2) say(log, "singular-value exponent: " + std::to_string(-fit_power_law(idx, sv).exponent));
  } catch (const Error& err) {
    out.exit_code = exit_code_for(err.code());
    out.message = err.what();
    say(log, out.message);
  }
  return out;
}

}  // namespace impdens
