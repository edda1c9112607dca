#include <CLI11.hpp>
#include <algorithm>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "impdens/error.hpp"
#include "impdens/pipeline.hpp"
#include "impdens/presets.hpp"

using namespace impdens;

namespace {

struct FitFlags {
  std::optional<std::string> preset, input, method, quote_family, smile_family;
  std::string out = "impdens_out";
  std::optional<double> x_min, x_max, spot, forward, rate, tau, rescale, chi2_budget, smile_min, smile_max;
  std::optional<Eigen::Index> n_points, rank;
  std::vector<double> lambdas;
  std::optional<double> lambda_min, lambda_max;
  int lambda_count = 33;
  double rho = 1.0, tol_primal = 1e-10, tol_dual = 1e-10, elbow_epsilon = 0.10;
  int max_iter = 50000;
  bool no_warm_start = false, fixed_rho = false;
  unsigned threads = 1;
  int smile_points = 201;
};

// Fills every option of `sub` not given on the command line from a key = value
// file. Keys are option names without the leading dashes.
void apply_config(CLI::App* sub, const std::string& path) {
  std::vector<CLI::ConfigItem> items;
  try {
    items = CLI::ConfigINI().from_file(path);
  } catch (const CLI::FileError& e) {
    throw Error(ErrorCode::Io, e.what());
  }
  for (const auto& item : items) {
    if (item.name == "++" || item.name == "--") continue;
    if (!item.parents.empty() && !(item.parents.size() == 1 && item.parents[0] == sub->get_name())) continue;
    std::string key = item.name;
    std::replace(key.begin(), key.end(), '_', '-');
    CLI::Option* opt = key == "config" ? nullptr : sub->get_option_no_throw("--" + key);
    if (!opt) throw Error(ErrorCode::InvalidArgument, path + ": unknown key '" + item.name + "'");
    if (opt->count() > 0) continue;
    opt->add_result(item.inputs.empty() ? std::vector<std::string>{"true"} : item.inputs);
    opt->run_callback();
  }
}

void add_config_option(CLI::App* app, std::string& path) {
  app->add_option("--config", path, "key = value file supplying any option; flags take precedence");
}

void add_fit_options(CLI::App* app, FitFlags& f, bool with_smile) {
  app->add_option("--preset", f.preset, "normal | lognormal | multimodal | arbitrage | spx | kinked");
  app->add_option("--input", f.input, "quote CSV (kind,strike,price|implied_vol[,family][,weight])");
  app->add_option("--out", f.out, "output directory")->capture_default_str();
  app->add_option("--x-min", f.x_min, "grid lower bound (original units)");
  app->add_option("--x-max", f.x_max, "grid upper bound (original units)");
  app->add_option("--n-points", f.n_points, "grid points N");
  app->add_option("--rank", f.rank, "retained singular values Q");
  app->add_option("--lambda", f.lambdas, "explicit lambda values")->delimiter(',');
  app->add_option("--lambda-min", f.lambda_min, "log-spaced scan lower end");
  app->add_option("--lambda-max", f.lambda_max, "log-spaced scan upper end");
  app->add_option("--lambda-count", f.lambda_count, "log-spaced scan size")->capture_default_str();
  app->add_option("--method", f.method, "active-set | admm");
  app->add_option("--rho", f.rho, "ADMM penalty")->capture_default_str();
  app->add_flag("--fixed-rho", f.fixed_rho, "disable ADMM penalty rebalancing");
  app->add_option("--tol-primal", f.tol_primal)->capture_default_str();
  app->add_option("--tol-dual", f.tol_dual)->capture_default_str();
  app->add_option("--max-iter", f.max_iter)->capture_default_str();
  app->add_flag("--no-warm-start", f.no_warm_start, "solve each lambda from scratch");
  app->add_option("--threads", f.threads, "concurrent solves when warm start is off")->capture_default_str();
  app->add_option("--elbow-epsilon", f.elbow_epsilon, "relative chi2 slack for lambda selection")
      ->capture_default_str();
  app->add_option("--chi2-budget", f.chi2_budget, "select the largest lambda with chi2 below this value");
  app->add_option("--spot", f.spot);
  app->add_option("--forward", f.forward);
  app->add_option("--rate", f.rate);
  app->add_option("--tau", f.tau);
  app->add_option("--rescale", f.rescale, "strike rescale factor (power of 10); automatic when omitted");
  app->add_option("--quote-family", f.quote_family, "family for vol-quoted rows without one");
  if (with_smile) {
    app->add_option("--smile-family", f.smile_family, "bachelier | blackscholes | black");
    app->add_option("--smile-points", f.smile_points)->capture_default_str();
    app->add_option("--smile-min", f.smile_min);
    app->add_option("--smile-max", f.smile_max);
  }
}

RunConfig to_config(const FitFlags& f, RunMode mode) {
  RunConfig cfg;
  cfg.mode = mode;
  cfg.preset = f.preset;
  cfg.input_path = f.input;
  cfg.output_dir = f.out;
  cfg.x_min = f.x_min;
  cfg.x_max = f.x_max;
  cfg.n_points = f.n_points;
  cfg.rank = f.rank;
  cfg.lambdas = f.lambdas;
  if (cfg.lambdas.empty() && (f.lambda_min || f.lambda_max)) {
    cfg.lambdas = log_spaced(f.lambda_min.value_or(1e-12), f.lambda_max.value_or(1e-4), f.lambda_count);
  }
  if (f.method) cfg.solver.method = parse_solver_method(*f.method);
  cfg.solver.rho = f.rho;
  cfg.solver.adaptive_rho = !f.fixed_rho;
  cfg.solver.tol_primal = f.tol_primal;
  cfg.solver.tol_dual = f.tol_dual;
  cfg.solver.max_iter = f.max_iter;
  cfg.warm_start = !f.no_warm_start;
  cfg.threads = f.threads;
  cfg.elbow_epsilon = f.elbow_epsilon;
  cfg.chi2_budget = f.chi2_budget;
  cfg.spot = f.spot;
  cfg.forward = f.forward;
  cfg.rate = f.rate;
  cfg.tau = f.tau;
  cfg.rescale_factor = f.rescale;
  if (f.quote_family) cfg.quote_family = parse_family(*f.quote_family);
  if (f.smile_family) cfg.smile_family = parse_family(*f.smile_family);
  cfg.smile_points = f.smile_points;
  cfg.smile_min = f.smile_min;
  cfg.smile_max = f.smile_max;
  return cfg;
}

int report(const PipelineOutcome& out) {
  for (const auto& a : out.artifacts) std::cout << "wrote " << a << '\n';
  if (out.smile) {
    std::cout << "density forward " << out.smile->density_ctx.forward << '\n';
  }
  if (out.scan.selected_lambda) std::cout << "selected lambda " << *out.scan.selected_lambda << '\n';
  return out.exit_code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Implied terminal densities from option quotes"};
  app.require_subcommand(1);

  std::string fit_config, scan_config, smile_config, diagnose_config;
  FitFlags fit_flags;
  auto* fit = app.add_subcommand("fit", "lambda scan, selection, density and smile");
  add_config_option(fit, fit_config);
  add_fit_options(fit, fit_flags, true);

  FitFlags scan_flags;
  auto* scan = app.add_subcommand("scan", "lambda scan only");
  add_config_option(scan, scan_config);
  add_fit_options(scan, scan_flags, false);

  SmileRequest smile_req;
  std::string smile_family = "bachelier";
  double rate = 0.0, tau = 1.0;
  std::optional<double> k_min, k_max, q_min, q_max;
  int k_points = 101;
  auto* smile = app.add_subcommand("smile", "re-price a saved density on a strike set");
  add_config_option(smile, smile_config);
  smile->add_option("--density", smile_req.density_path, "density CSV (x,phi); required");
  smile->add_option("--out", smile_req.output_path, "smile CSV path; required");
  smile->add_option("--family", smile_family)->capture_default_str();
  smile->add_option("--rate", rate)->capture_default_str();
  smile->add_option("--tau", tau)->capture_default_str();
  smile->add_option("--strike", smile_req.strikes, "explicit strikes")->delimiter(',');
  smile->add_option("--strike-min", k_min);
  smile->add_option("--strike-max", k_max);
  smile->add_option("--points", k_points)->capture_default_str();
  smile->add_option("--quoted-min", q_min, "lower end of the quoted strike range");
  smile->add_option("--quoted-max", q_max, "upper end of the quoted strike range");

  DiagnoseRequest diag;
  auto* diagnose = app.add_subcommand("diagnose", "condition-number and singular-value series");
  add_config_option(diagnose, diagnose_config);
  diagnose->add_option("--out", diag.output_dir)->capture_default_str();
  diagnose->add_option("--x-min", diag.x_min)->capture_default_str();
  diagnose->add_option("--x-max", diag.x_max)->capture_default_str();
  diagnose->add_option("--n-condition", diag.n_condition, "grid size for the condition series")
      ->capture_default_str();
  diagnose->add_option("--strikes", diag.strike_counts, "strike counts M")->delimiter(',');
  diagnose->add_option("--n-spectrum", diag.n_spectrum)->capture_default_str();
  diagnose->add_option("--spectrum-strikes", diag.spectrum_strikes)->capture_default_str();
  diagnose->add_option("--fit-count", diag.fit_count)->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : exit_code::kValidation;
  }

  try {
    const std::pair<CLI::App*, const std::string*> configs[] = {
        {fit, &fit_config}, {scan, &scan_config}, {smile, &smile_config}, {diagnose, &diagnose_config}};
    try {
      for (const auto& [sub, path] : configs) {
        if (*sub && !path->empty()) apply_config(sub, *path);
      }
    } catch (const CLI::Error& e) {
      throw Error(ErrorCode::InvalidArgument, e.what());
    }
    if (*fit) return report(run_pipeline(to_config(fit_flags, RunMode::Fit), &std::cerr));
    if (*scan) return report(run_pipeline(to_config(scan_flags, RunMode::Scan), &std::cerr));
    if (*smile) {
      if (smile_req.density_path.empty() || smile_req.output_path.empty()) {
        throw Error(ErrorCode::InvalidArgument, "smile needs --density and --out");
      }
      smile_req.family = parse_family(smile_family);
      smile_req.ctx = MarketContext::from_forward(0.0, rate, tau);
      if (smile_req.strikes.empty()) {
        if (!k_min || !k_max) throw Error(ErrorCode::InvalidArgument, "give --strike or --strike-min/--strike-max");
        smile_req.strikes = linspace(*k_min, *k_max, k_points);
      }
      if (q_min && q_max) smile_req.quoted_range = std::make_pair(*q_min, *q_max);
      return report(run_smile(smile_req, &std::cerr));
    }
    if (*diagnose) return report(run_diagnose(diag, &std::cout));
  } catch (const Error& e) {
    std::cerr << e.what() << '\n';
    return exit_code_for(e.code());
  }
  return exit_code::kValidation;
}
