#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <cstdint>
#include <iostream>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "bmckde/analysis.hpp"
#include "bmckde/calibration.hpp"
#include "bmckde/estimator.hpp"
#include "bmckde/io.hpp"
#include "bmckde/kernel.hpp"
#include "bmckde/models.hpp"
#include "bmckde/parallel.hpp"
#include "bmckde/quadrature.hpp"
#include "bmckde/svg.hpp"
#include "bmckde/tree.hpp"

namespace {

using namespace bmckde;
using nlohmann::ordered_json;

constexpr const char* kVersion = "0.1.0";

// Plot colors: estimates, reference curves, auxiliary series.
constexpr const char* kRed = "#d62728";
constexpr const char* kBlue = "#1f77b4";
constexpr const char* kGold = "#e6b800";
constexpr const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c",
                                    "#9467bd", "#ff7f0e", "#8c564b"};

// ---------------------------------------------------------------------------
// Option bundles shared across subcommands.  Config-file keys equal the long
// option names without the leading dashes; sections equal subcommand names.
// ---------------------------------------------------------------------------

struct CommonOpts {
  std::string outdir = "out";
  std::uint64_t seed = 42;
  int threads = 1;
  std::string kernel = "gaussian";
};

struct ModelOpts {
  std::string model = "beta-bar";
  double tau = 2.0;
  double s_max = 5.0;
  double root_low = 0.5;
  double root_high = 2.0;
};

struct GridOpts {
  double h_max = 0.5;
  double alpha = 2.5;
  std::vector<double> h_list;  // explicit bandwidths override the grid
};

struct EvalOpts {
  std::optional<double> x_min;
  std::optional<double> x_max;
  int x_count = 101;
};

struct CalibOpts {
  int m = 20;
  int zoom = 2;
  double b_over_a = 2.0;
  std::optional<double> kappa;  // fixed penalty: skip calibration
  bool reuse_kappa = false;     // calibrate once at the domain midpoint
};

void add_common(CLI::App* cmd, CommonOpts& o) {
  cmd->add_option("--outdir", o.outdir, "Output directory")
      ->envname("BMCKDE_OUTDIR")
      ->capture_default_str();
  cmd->add_option("--seed", o.seed, "Base random seed")->capture_default_str();
  cmd->add_option("--threads", o.threads, "Worker threads")
      ->check(CLI::Range(1, 256))
      ->capture_default_str();
  cmd->add_option("--kernel", o.kernel,
                  "Kernel: 'gaussian' or path to a profile table CSV (t,k)")
      ->capture_default_str();
}

void add_model(CLI::App* cmd, ModelOpts& o) {
  cmd->add_option("--model", o.model, "Data model")
      ->check(CLI::IsMember({"beta-bar", "growth-frag"}))
      ->capture_default_str();
  cmd->add_option("--tau", o.tau, "Growth rate (growth-frag)")
      ->capture_default_str();
  cmd->add_option("--s-max", o.s_max, "Size-space upper bound (growth-frag)")
      ->capture_default_str();
  cmd->add_option("--root-low", o.root_low,
                  "Lower end of the uniform root law (growth-frag)")
      ->capture_default_str();
  cmd->add_option("--root-high", o.root_high,
                  "Upper end of the uniform root law (growth-frag)")
      ->capture_default_str();
}

void add_grid(CLI::App* cmd, GridOpts& o) {
  cmd->add_option("--h-max", o.h_max, "Largest bandwidth of the built grid")
      ->capture_default_str();
  cmd->add_option("--alpha", o.alpha, "Grid decay exponent (> 1)")
      ->capture_default_str();
  cmd->add_option("--bandwidth", o.h_list,
                  "Explicit bandwidth list (overrides --h-max/--alpha; a "
                  "single value gives a fixed-bandwidth run)")
      ->delimiter(',');
}

void add_eval(CLI::App* cmd, EvalOpts& o, const char* what) {
  cmd->add_option("--x-min", o.x_min,
                  std::string("Left end of the ") + what + " grid")
      ->capture_default_str();
  cmd->add_option("--x-max", o.x_max,
                  std::string("Right end of the ") + what + " grid")
      ->capture_default_str();
  cmd->add_option("--x-count", o.x_count,
                  std::string("Number of ") + what + " grid points")
      ->check(CLI::Range(1, 100000))
      ->capture_default_str();
}

void add_calib(CLI::App* cmd, CalibOpts& o, bool with_reuse = true) {
  cmd->add_option("--calib-m", o.m, "Penalty grid size per calibration sweep")
      ->check(CLI::Range(2, 10000))
      ->capture_default_str();
  cmd->add_option("--calib-zoom", o.zoom, "Calibration zoom iterations")
      ->check(CLI::Range(1, 100))
      ->capture_default_str();
  cmd->add_option("--b-over-a", o.b_over_a, "Selection-criterion ratio b/a")
      ->check(CLI::Range(1.0, 1e6))
      ->capture_default_str();
  cmd->add_option("--kappa", o.kappa,
                  "Fixed penalty constant (skips calibration)");
  if (with_reuse) {
    cmd->add_flag("--reuse-kappa", o.reuse_kappa,
                  "Calibrate once at the domain midpoint and reuse that "
                  "penalty at every evaluation point");
  }
}

// ---------------------------------------------------------------------------
// Model plumbing.
// ---------------------------------------------------------------------------

using AnyModel = std::variant<BetaBarModel, GrowthFragModel>;

AnyModel make_model(const ModelOpts& o) {
  if (o.model == "beta-bar") return BetaBarModel{};
  if (!(o.tau > 0.0)) throw std::invalid_argument("tau must be positive");
  if (o.s_max != 5.0) {
    throw std::invalid_argument(
        "the tent splitting rate is defined on (0, 5); s-max must be 5");
  }
  GrowthFragModel model = GrowthFragModel::tent();
  model.tau = o.tau;
  model.root_low = o.root_low;
  model.root_high = o.root_high;
  return model;
}

TreeSample simulate_tree_of(const BetaBarModel& m, int depth,
                            std::uint64_t seed, int threads) {
  return simulate_bar(m, depth, seed, threads);
}
TreeSample simulate_tree_of(const GrowthFragModel& m, int depth,
                            std::uint64_t seed, int threads) {
  return simulate_growth_frag(m, depth, seed, threads);
}

TreeSample simulate_any(const AnyModel& model, int depth, std::uint64_t seed,
                        int threads) {
  return std::visit(
      [&](const auto& m) { return simulate_tree_of(m, depth, seed, threads); },
      model);
}

std::pair<double, double> state_domain(const AnyModel& model) {
  if (std::holds_alternative<BetaBarModel>(model)) return {0.0, 1.0};
  const auto& gf = std::get<GrowthFragModel>(model);
  return {0.0, 0.5 * gf.s_max};  // newborn sizes
}

Kernel make_kernel(const std::string& spec) {
  if (spec == "gaussian") return Kernel::gaussian();
  return Kernel::tabulated_from_csv(spec);
}

std::vector<double> linspace(double lo, double hi, int count) {
  if (count < 1) throw std::invalid_argument("grid needs >= 1 point");
  if (hi < lo) throw std::invalid_argument("grid bounds reversed");
  if (count == 1) return {0.5 * (lo + hi)};
  std::vector<double> xs(count);
  for (int i = 0; i < count; ++i) {
    xs[i] = lo + (hi - lo) * i / (count - 1);
  }
  return xs;
}

std::vector<double> resolve_eval_grid(const EvalOpts& eval,
                                      std::pair<double, double> domain) {
  const double lo = eval.x_min.value_or(domain.first);
  const double hi = eval.x_max.value_or(domain.second);
  return linspace(lo, hi, eval.x_count);
}

BandwidthGrid make_grid(const GridOpts& o, int depth) {
  if (!o.h_list.empty()) {
    std::vector<Bandwidth> entries;
    entries.reserve(o.h_list.size());
    for (double h : o.h_list) entries.emplace_back(h, 1);
    return make_bandwidth_grid(std::move(entries), depth);
  }
  return build_bandwidth_grid(o.h_max, o.alpha, depth, 1);
}

//! GL selection at every point of xs under the configured penalty policy:
//! fixed --kappa, midpoint-calibrated --reuse-kappa, or (default) a full
//! calibration at each point.
std::vector<GlState> run_selection(const TreeSample& tree, const Kernel& kernel,
                                   const BandwidthGrid& grid,
                                   const std::vector<double>& xs,
                                   const CalibOpts& calib,
                                   std::pair<double, double> domain,
                                   int threads) {
  std::vector<Eigen::VectorXd> points(xs.size(), Eigen::VectorXd(1));
  for (std::size_t i = 0; i < xs.size(); ++i) points[i][0] = xs[i];

  if (calib.kappa) {
    return adaptive_estimate(tree, kernel, grid, points, *calib.kappa,
                             calib.b_over_a, threads);
  }
  CalibrationConfig config{calib.m, calib.zoom, calib.b_over_a};
  if (calib.reuse_kappa) {
    Eigen::VectorXd mid(1);
    mid[0] = 0.5 * (domain.first + domain.second);
    const double kappa =
        calibrate_and_select(tree, kernel, grid, mid, config).kappa;
    return adaptive_estimate(tree, kernel, grid, points, kappa,
                             calib.b_over_a, threads);
  }
  std::vector<GlState> states(xs.size());
  parallel_for(static_cast<std::int64_t>(xs.size()), threads,
               [&](std::int64_t i) {
                 states[i] = calibrate_and_select(tree, kernel, grid,
                                                  points[i], config)
                                 .selection;
               });
  return states;
}

//! Pointwise estimator for the risk harnesses: fixed bandwidth when a
//! single --h is given, otherwise GL selection with a fixed or per-point
//! calibrated penalty.  (--reuse-kappa is not meaningful per replication
//! and is rejected by the callers that use this.)
PointEstimator1d make_point_estimator(const Kernel& kernel,
                                      const GridOpts& grid_opts,
                                      const CalibOpts& calib) {
  if (grid_opts.h_list.size() == 1) {
    const Bandwidth h(grid_opts.h_list.front(), 1);
    return [kernel, h](const TreeSample& tree, double x) {
      Eigen::VectorXd point(1);
      point[0] = x;
      return kde_eval(tree, kernel, h, point);
    };
  }
  const CalibrationConfig config{calib.m, calib.zoom, calib.b_over_a};
  const std::optional<double> kappa = calib.kappa;
  return [kernel, grid_opts, config, kappa](const TreeSample& tree, double x) {
    const BandwidthGrid grid = make_grid(grid_opts, tree.depth);
    Eigen::VectorXd point(1);
    point[0] = x;
    if (kappa) {
      return select_bandwidth_gl(tree, kernel, grid, point, *kappa,
                                 config.b_over_a)
          .estimate();
    }
    return calibrate_and_select(tree, kernel, grid, point, config)
        .selection.estimate();
  };
}

// ---------------------------------------------------------------------------
// Artifact helpers.
// ---------------------------------------------------------------------------

ordered_json common_json(const CommonOpts& o) {
  return {{"outdir", o.outdir},
          {"seed", o.seed},
          {"threads", o.threads},
          {"kernel", o.kernel}};
}

ordered_json model_json(const ModelOpts& o) {
  ordered_json j{{"model", o.model}};
  if (o.model == "growth-frag") {
    j["tau"] = o.tau;
    j["s_max"] = o.s_max;
    j["root_low"] = o.root_low;
    j["root_high"] = o.root_high;
  }
  return j;
}

ordered_json grid_json(const GridOpts& o) {
  if (!o.h_list.empty()) return {{"bandwidth", o.h_list}};
  return {{"h_max", o.h_max}, {"alpha", o.alpha}};
}

ordered_json calib_json(const CalibOpts& o) {
  ordered_json j{{"calib_m", o.m},
                 {"calib_zoom", o.zoom},
                 {"b_over_a", o.b_over_a}};
  if (o.kappa) j["kappa"] = *o.kappa;
  if (o.reuse_kappa) j["reuse_kappa"] = true;
  return j;
}

void write_manifest(const CommonOpts& common, const std::string& command,
                    ordered_json config,
                    const std::vector<std::string>& outputs) {
  ordered_json manifest;
  manifest["tool"] = "bmckde";
  manifest["version"] = kVersion;
  manifest["command"] = command;
  config.update(common_json(common));
  manifest["config"] = std::move(config);
  manifest["outputs"] = outputs;
  write_text_atomic(common.outdir + "/manifest.json", manifest.dump(2) + "\n");
}

void report(const CommonOpts& common, const std::string& command,
            const std::vector<std::string>& outputs) {
  std::cout << command << ": wrote";
  for (const auto& f : outputs) std::cout << " " << f;
  std::cout << " manifest.json in " << common.outdir << "\n";
}

// ---------------------------------------------------------------------------
// Subcommands.
// ---------------------------------------------------------------------------

void run_simulate(const CommonOpts& common, const ModelOpts& model_opts,
                  int depth) {
  const AnyModel model = make_model(model_opts);
  const TreeSample tree =
      simulate_any(model, depth, common.seed, common.threads);
  save_tree_csv(tree, common.outdir + "/tree.csv");

  ordered_json config = model_json(model_opts);
  config["depth"] = depth;
  write_manifest(common, "simulate", std::move(config), {"tree.csv"});
  report(common, "simulate", {"tree.csv"});
}

void run_estimate(const CommonOpts& common, const ModelOpts& model_opts,
                  const GridOpts& grid_opts, const EvalOpts& eval,
                  const CalibOpts& calib, int depth,
                  const std::string& tree_path, bool diagnostics) {
  const Kernel kernel = make_kernel(common.kernel);
  const AnyModel model = make_model(model_opts);
  const TreeSample tree =
      tree_path.empty()
          ? simulate_any(model, depth, common.seed, common.threads)
          : load_tree_csv(tree_path);
  if (tree.dim() != 1) {
    throw std::invalid_argument("the estimate pipeline is 1-d");
  }
  const BandwidthGrid grid = make_grid(grid_opts, tree.depth);
  const auto domain = state_domain(model);
  const std::vector<double> xs = resolve_eval_grid(eval, domain);
  const std::vector<GlState> states =
      run_selection(tree, kernel, grid, xs, calib, domain, common.threads);

  CsvWriter est({"x", "h_selected_prod", "nu_hat"});
  std::vector<double> nu(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) {
    nu[i] = states[i].estimate();
    est.add_row({format_double(xs[i]),
                 format_double(states[i].selected_bandwidth().prod()),
                 format_double(nu[i])});
  }
  est.write(common.outdir + "/estimate.csv");
  std::vector<std::string> outputs{"estimate.csv"};

  if (diagnostics) {
    CsvWriter diag({"x", "h_prod", "A", "V", "criterion"});
    for (std::size_t i = 0; i < xs.size(); ++i) {
      for (const GlRecord& rec : states[i].records) {
        diag.add_row({format_double(xs[i]), format_double(rec.h.prod()),
                      format_double(rec.bias_proxy),
                      format_double(rec.variance),
                      format_double(rec.criterion)});
      }
    }
    diag.write(common.outdir + "/diagnostics.csv");
    outputs.push_back("diagnostics.csv");
  }

  SvgPlot plot(720, 480, "invariant density estimate");
  plot.add_curve(xs, nu, kRed, 1.8);
  if (std::holds_alternative<BetaBarModel>(model)) {
    std::vector<double> truth(xs.size());
    for (std::size_t i = 0; i < xs.size(); ++i) truth[i] = beta22_pdf(xs[i]);
    plot.add_curve(xs, truth, kBlue, 1.8, "6,4");
  }
  plot.write(common.outdir + "/estimate.svg");
  outputs.push_back("estimate.svg");

  ordered_json config = model_json(model_opts);
  config["depth"] = tree.depth;
  if (!tree_path.empty()) config["tree"] = tree_path;
  config.update(grid_json(grid_opts));
  config.update(calib_json(calib));
  config["x_count"] = eval.x_count;
  config["x_min"] = xs.front();
  config["x_max"] = xs.back();
  if (diagnostics) config["diagnostics"] = true;
  write_manifest(common, "estimate", std::move(config), outputs);
  report(common, "estimate", outputs);
}

void run_calibrate(const CommonOpts& common, const ModelOpts& model_opts,
                   const GridOpts& grid_opts, const CalibOpts& calib,
                   int depth, const std::string& tree_path,
                   std::optional<double> x_opt) {
  const Kernel kernel = make_kernel(common.kernel);
  const AnyModel model = make_model(model_opts);
  const TreeSample tree =
      tree_path.empty()
          ? simulate_any(model, depth, common.seed, common.threads)
          : load_tree_csv(tree_path);
  if (tree.dim() != 1) {
    throw std::invalid_argument("the calibrate pipeline is 1-d");
  }
  const BandwidthGrid grid = make_grid(grid_opts, tree.depth);
  const auto domain = state_domain(model);
  Eigen::VectorXd point(1);
  point[0] = x_opt.value_or(0.5 * (domain.first + domain.second));

  const CalibrationConfig config{calib.m, calib.zoom, calib.b_over_a};
  const CalibrationResult result =
      calibrate_and_select(tree, kernel, grid, point, config);

  CsvWriter trace({"iteration", "j", "kappa", "h_prod", "inv_h_prod",
                   "is_jump"});
  for (const CalibrationStep& step : result.trace.steps) {
    trace.add_row({std::to_string(step.iteration), std::to_string(step.j),
                   format_double(step.kappa), format_double(step.h_prod),
                   format_double(step.inv_h_prod), step.is_jump ? "1" : "0"});
  }
  trace.write(common.outdir + "/trace.csv");

  SvgPlot plot(720, 480, "penalty calibration: 1/|h(kappa)|");
  for (int s = 1; s <= calib.zoom; ++s) {
    std::vector<double> ks, inv;
    for (const CalibrationStep& step : result.trace.steps) {
      if (step.iteration == s) {
        ks.push_back(step.kappa);
        inv.push_back(step.inv_h_prod);
      }
    }
    plot.add_curve(ks, inv, kPalette[(s - 1) % 6], 1.5);
  }
  plot.write(common.outdir + "/calibrate.svg");

  ordered_json cfg = model_json(model_opts);
  cfg["depth"] = tree.depth;
  if (!tree_path.empty()) cfg["tree"] = tree_path;
  cfg.update(grid_json(grid_opts));
  cfg.update(calib_json(calib));
  cfg["x"] = point[0];
  write_manifest(common, "calibrate", std::move(cfg),
                 {"trace.csv", "calibrate.svg"});
  std::cout << "calibrate: kappa=" << format_double(result.kappa)
            << " h_prod="
            << format_double(result.selection.selected_bandwidth().prod())
            << " at x=" << format_double(point[0]) << "\n";
  report(common, "calibrate", {"trace.csv", "calibrate.svg"});
}

void run_risk(const CommonOpts& common, const ModelOpts& model_opts,
              const GridOpts& grid_opts, const EvalOpts& eval,
              const CalibOpts& calib, int depth, int replications) {
  if (model_opts.model != "beta-bar") {
    throw std::invalid_argument(
        "risk needs a model with known invariant density (beta-bar)");
  }
  if (calib.reuse_kappa) {
    throw std::invalid_argument("risk does not support --reuse-kappa");
  }
  if (grid_opts.h_list.size() > 1) {
    throw std::invalid_argument(
        "risk takes one fixed --bandwidth or a built grid, not a list");
  }
  const Kernel kernel = make_kernel(common.kernel);
  const AnyModel model = make_model(model_opts);
  const std::vector<double> xs = resolve_eval_grid(eval, state_domain(model));

  const Simulator simulate = [&](std::uint64_t seed) {
    return simulate_any(model, depth, seed, 1);
  };
  const PointEstimator1d estimator =
      make_point_estimator(kernel, grid_opts, calib);
  const RiskReport rep = pointwise_risk(simulate, estimator, beta22_pdf, xs,
                                        depth, replications, common.seed,
                                        common.threads);

  CsvWriter csv({"x", "bias_sq", "variance", "mse", "R", "n"});
  std::vector<double> mse(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const RiskRow& row = rep.rows[i];
    mse[i] = row.mse;
    csv.add_row({format_double(row.x), format_double(row.bias_sq),
                 format_double(row.variance), format_double(row.mse),
                 std::to_string(replications), std::to_string(depth)});
  }
  csv.write(common.outdir + "/risk.csv");

  SvgPlot plot(720, 480, "pointwise risk");
  std::vector<double> bias(xs.size()), var(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) {
    bias[i] = rep.rows[i].bias_sq;
    var[i] = rep.rows[i].variance;
  }
  plot.add_curve(xs, mse, kRed, 1.8);
  plot.add_curve(xs, bias, kBlue, 1.2, "6,4");
  plot.add_curve(xs, var, "#2ca02c", 1.2, "2,3");
  plot.write(common.outdir + "/risk.svg");

  ordered_json cfg = model_json(model_opts);
  cfg["depth"] = depth;
  cfg["replications"] = replications;
  cfg.update(grid_json(grid_opts));
  cfg.update(calib_json(calib));
  cfg["x_count"] = eval.x_count;
  write_manifest(common, "risk", std::move(cfg), {"risk.csv", "risk.svg"});
  report(common, "risk", {"risk.csv", "risk.svg"});
}

void run_rates(const CommonOpts& common, const ModelOpts& model_opts,
               const GridOpts& grid_opts, const CalibOpts& calib,
               const std::vector<int>& depths, int replications, double x) {
  if (model_opts.model != "beta-bar") {
    throw std::invalid_argument(
        "rates needs a model with known invariant density (beta-bar)");
  }
  if (calib.reuse_kappa) {
    throw std::invalid_argument("rates does not support --reuse-kappa");
  }
  const Kernel kernel = make_kernel(common.kernel);
  const AnyModel model = make_model(model_opts);
  const PointEstimator1d estimator =
      make_point_estimator(kernel, grid_opts, calib);

  std::vector<std::pair<int, double>> depth_mse;
  for (int depth : depths) {
    const Simulator simulate = [&, depth](std::uint64_t seed) {
      return simulate_any(model, depth, seed, 1);
    };
    const RiskReport rep =
        pointwise_risk(simulate, estimator, beta22_pdf, {x}, depth,
                       replications, common.seed, common.threads);
    depth_mse.emplace_back(depth, rep.rows[0].mse);
  }
  const double slope = rate_regression(depth_mse);

  CsvWriter csv({"n", "tree_size", "mse", "log_t", "log_mse"});
  std::vector<double> log_t(depths.size()), log_mse(depths.size());
  for (std::size_t i = 0; i < depth_mse.size(); ++i) {
    const auto& [n, mse] = depth_mse[i];
    const double t = static_cast<double>(tree_size(n));
    log_t[i] = std::log(t / std::log(t));
    log_mse[i] = std::log(mse);
    csv.add_row({std::to_string(n), std::to_string(tree_size(n)),
                 format_double(mse), format_double(log_t[i]),
                 format_double(log_mse[i])});
  }
  csv.append_line("slope=" + format_double(slope));
  csv.write(common.outdir + "/rate.csv");

  const LinearFit fit = least_squares_fit(log_t, log_mse);
  SvgPlot plot(720, 480, "mse decay (log-log)");
  plot.add_curve(log_t, log_mse, kRed, 1.8);
  std::vector<double> fit_y(log_t.size());
  for (std::size_t i = 0; i < log_t.size(); ++i) {
    fit_y[i] = fit.intercept + fit.slope * log_t[i];
  }
  plot.add_curve(log_t, fit_y, kBlue, 1.2, "6,4");
  plot.write(common.outdir + "/rates.svg");

  ordered_json cfg = model_json(model_opts);
  cfg["depths"] = depths;
  cfg["replications"] = replications;
  cfg["x"] = x;
  cfg.update(grid_json(grid_opts));
  cfg.update(calib_json(calib));
  write_manifest(common, "rates", std::move(cfg), {"rate.csv", "rates.svg"});
  std::cout << "rates: slope=" << format_double(slope) << "\n";
  report(common, "rates", {"rate.csv", "rates.svg"});
}

void run_splitting(const CommonOpts& common, const ModelOpts& model_opts,
                   const GridOpts& grid_opts, const EvalOpts& eval,
                   const CalibOpts& calib, int depth,
                   std::optional<double> threshold_opt) {
  if (model_opts.model != "growth-frag") {
    throw std::invalid_argument("splitting-rate needs the growth-frag model");
  }
  if (grid_opts.h_list.size() > 1) {
    throw std::invalid_argument(
        "splitting-rate takes one fixed --bandwidth or a built grid");
  }
  const Kernel kernel = make_kernel(common.kernel);
  const AnyModel model = make_model(model_opts);
  const auto& gf = std::get<GrowthFragModel>(model);
  const TreeSample tree =
      simulate_any(model, depth, common.seed, common.threads);
  const double threshold = threshold_opt.value_or(
      1.0 / std::log(static_cast<double>(tree_size(depth))));
  const std::vector<double> xs =
      resolve_eval_grid(eval, {2.0, 4.0});  // default display window

  SplitBandwidthMode mode{FixedBandwidth{Bandwidth(1.0, 1)}};
  if (grid_opts.h_list.size() == 1) {
    mode = FixedBandwidth{Bandwidth(grid_opts.h_list.front(), 1)};
  } else {
    AdaptiveBandwidth adaptive{make_grid(grid_opts, depth), calib.kappa,
                               calib.b_over_a};
    if (!calib.kappa && calib.reuse_kappa) {
      // Calibrate at the midpoint of the density-evaluation range, i.e.
      // at half the midpoint of the rate-evaluation window.
      Eigen::VectorXd mid(1);
      mid[0] = 0.25 * (xs.front() + xs.back());
      const CalibrationConfig config{calib.m, calib.zoom, calib.b_over_a};
      adaptive.kappa =
          calibrate_and_select(tree, kernel, adaptive.grid, mid, config).kappa;
    }
    mode = std::move(adaptive);
  }

  std::vector<double> b_hat(xs.size()), b_true(xs.size());
  parallel_for(static_cast<std::int64_t>(xs.size()), common.threads,
               [&](std::int64_t i) {
                 b_hat[i] = estimate_splitting_rate(tree, kernel, mode, xs[i],
                                                    gf.tau, threshold);
                 b_true[i] = gf.splitting_rate(xs[i]);
               });

  CsvWriter csv({"x", "B_hat", "B_true"});
  for (std::size_t i = 0; i < xs.size(); ++i) {
    csv.add_row({format_double(xs[i]), format_double(b_hat[i]),
                 format_double(b_true[i])});
  }
  csv.write(common.outdir + "/splitting.csv");

  SvgPlot plot(720, 480, "splitting rate estimate");
  plot.add_curve(xs, b_hat, kRed, 1.8);
  plot.add_curve(xs, b_true, kGold, 1.8);
  plot.write(common.outdir + "/splitting.svg");

  ordered_json cfg = model_json(model_opts);
  cfg["depth"] = depth;
  cfg["threshold"] = threshold;
  cfg.update(grid_json(grid_opts));
  cfg.update(calib_json(calib));
  cfg["x_min"] = xs.front();
  cfg["x_max"] = xs.back();
  cfg["x_count"] = eval.x_count;
  write_manifest(common, "splitting-rate", std::move(cfg),
                 {"splitting.csv", "splitting.svg"});
  report(common, "splitting-rate", {"splitting.csv", "splitting.svg"});
}

void run_bernstein(const CommonOpts& common, const ModelOpts& model_opts,
                   double h, double x, std::vector<double> deltas, int depth,
                   int replications, double big_m, double rho) {
  if (model_opts.model != "beta-bar") {
    throw std::invalid_argument(
        "bernstein-check needs a model with known invariant density "
        "(beta-bar)");
  }
  const Kernel kernel = make_kernel(common.kernel);
  std::sort(deltas.begin(), deltas.end());
  const Bandwidth bandwidth(h, 1);
  const ErgodicityParams params = beta_bar_ergodicity_params(big_m, rho);
  const BernsteinConstants constants = bernstein_constants(kernel, 1, params);

  const std::vector<double> empirical = empirical_deviation_probabilities(
      BetaBarModel{}, kernel, bandwidth, x, deltas, depth, replications,
      common.seed, common.threads);

  CsvWriter csv({"delta", "empirical", "bound_raw", "bound"});
  std::vector<double> bounds(deltas.size());
  for (std::size_t i = 0; i < deltas.size(); ++i) {
    const double raw = bernstein_bound(deltas[i], depth, bandwidth, kernel,
                                       constants, false);
    bounds[i] = std::min(1.0, raw);
    csv.add_row({format_double(deltas[i]), format_double(empirical[i]),
                 format_double(raw), format_double(bounds[i])});
  }
  csv.write(common.outdir + "/bernstein.csv");

  SvgPlot plot(720, 480, "deviation probability vs bound");
  plot.add_curve(deltas, empirical, kRed, 1.8);
  plot.add_curve(deltas, bounds, kBlue, 1.8, "6,4");
  plot.write(common.outdir + "/bernstein.svg");

  ordered_json cfg = model_json(model_opts);
  cfg["depth"] = depth;
  cfg["replications"] = replications;
  cfg["bandwidth"] = h;
  cfg["x"] = x;
  cfg["deltas"] = deltas;
  cfg["M"] = big_m;
  cfg["rho"] = rho;
  write_manifest(common, "bernstein-check", std::move(cfg),
                 {"bernstein.csv", "bernstein.svg"});
  report(common, "bernstein-check", {"bernstein.csv", "bernstein.svg"});
}

void run_reproduce(const CommonOpts& common, const std::string& figure) {
  const Kernel kernel = Kernel::gaussian();
  if (figure == "fig1") {
    constexpr int kRuns = 10, kDepth = 10;
    const BandwidthGrid grid = build_bandwidth_grid(0.5, 2.5, kDepth, 1);
    const std::vector<double> xs = linspace(0.0, 1.0, 101);
    const CalibrationConfig config;

    Eigen::MatrixXd estimates(xs.size(), kRuns);
    for (int run = 0; run < kRuns; ++run) {
      const TreeSample tree =
          simulate_bar(BetaBarModel{}, kDepth,
                       derive_seed(common.seed, static_cast<std::uint64_t>(run)),
                       common.threads);
      parallel_for(static_cast<std::int64_t>(xs.size()), common.threads,
                   [&](std::int64_t i) {
                     Eigen::VectorXd point(1);
                     point[0] = xs[i];
                     estimates(i, run) = calibrate_and_select(
                                             tree, kernel, grid, point, config)
                                             .selection.estimate();
                   });
    }

    std::vector<std::string> header{"x", "nu_true"};
    for (int run = 1; run <= kRuns; ++run) {
      header.push_back("est_" + std::to_string(run));
    }
    CsvWriter csv(header);
    std::vector<std::string> row(header.size());
    for (std::size_t i = 0; i < xs.size(); ++i) {
      row[0] = format_double(xs[i]);
      row[1] = format_double(beta22_pdf(xs[i]));
      for (int run = 0; run < kRuns; ++run) {
        row[2 + run] = format_double(estimates(i, run));
      }
      csv.add_row(row);
    }
    csv.write(common.outdir + "/fig1.csv");

    SvgPlot plot(720, 480, "10 adaptive estimates vs invariant density");
    for (int run = 0; run < kRuns; ++run) {
      std::vector<double> ys(xs.size());
      for (std::size_t i = 0; i < xs.size(); ++i) ys[i] = estimates(i, run);
      plot.add_curve(xs, ys, kRed, 1.2);
    }
    std::vector<double> truth(xs.size());
    for (std::size_t i = 0; i < xs.size(); ++i) truth[i] = beta22_pdf(xs[i]);
    plot.add_curve(xs, truth, kBlue, 2.0);
    plot.write(common.outdir + "/fig1.svg");

    write_manifest(common, "reproduce",
                   {{"figure", "fig1"},
                    {"depth", kDepth},
                    {"runs", kRuns},
                    {"h_max", 0.5},
                    {"alpha", 2.5}},
                   {"fig1.csv", "fig1.svg"});
    report(common, "reproduce fig1", {"fig1.csv", "fig1.svg"});
    return;
  }

  // fig2: one growth-fragmentation run, splitting-rate estimate vs truth.
  constexpr int kDepth = 15;
  const GrowthFragModel model = GrowthFragModel::tent();
  const TreeSample tree =
      simulate_growth_frag(model, kDepth, common.seed, common.threads);
  const BandwidthGrid grid = build_bandwidth_grid(0.5, 2.5, kDepth, 1);
  const double threshold =
      1.0 / std::log(static_cast<double>(tree_size(kDepth)));
  const std::vector<double> xs = linspace(2.0, 4.0, 101);
  const SplitBandwidthMode mode{
      AdaptiveBandwidth{grid, std::nullopt, 2.0}};

  std::vector<double> b_hat(xs.size()), b_true(xs.size());
  parallel_for(static_cast<std::int64_t>(xs.size()), common.threads,
               [&](std::int64_t i) {
                 b_hat[i] = estimate_splitting_rate(tree, kernel, mode, xs[i],
                                                    model.tau, threshold);
                 b_true[i] = splitting_rate_tent(xs[i]);
               });

  CsvWriter csv({"x", "B_hat", "B_true"});
  for (std::size_t i = 0; i < xs.size(); ++i) {
    csv.add_row({format_double(xs[i]), format_double(b_hat[i]),
                 format_double(b_true[i])});
  }
  csv.write(common.outdir + "/fig2.csv");

  SvgPlot plot(720, 480, "splitting rate estimate vs truth");
  plot.add_curve(xs, b_hat, kRed, 1.8);
  plot.add_curve(xs, b_true, kGold, 1.8);
  plot.write(common.outdir + "/fig2.svg");

  write_manifest(common, "reproduce",
                 {{"figure", "fig2"},
                  {"depth", kDepth},
                  {"h_max", 0.5},
                  {"alpha", 2.5},
                  {"threshold", threshold}},
                 {"fig2.csv", "fig2.svg"});
  report(common, "reproduce fig2", {"fig2.csv", "fig2.svg"});
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "Kernel estimation of the invariant density of binary-tree-indexed "
      "Markov samples, with local bandwidth selection and penalty "
      "calibration"};
  app.require_subcommand(1);
  app.allow_config_extras(CLI::config_extras_mode::error);
  app.set_config("--config", "",
                 "INI-style config file; sections name subcommands, keys "
                 "equal long option names");
  app.set_version_flag("--version", std::string("bmckde ") + kVersion);

  // simulate ----------------------------------------------------------------
  CommonOpts sim_common;
  ModelOpts sim_model;
  int sim_depth = 10;
  auto* sim = app.add_subcommand("simulate", "Sample a tree and write CSV");
  sim->fallthrough(true);
  add_common(sim, sim_common);
  add_model(sim, sim_model);
  sim->add_option("--depth", sim_depth, "Tree depth n")
      ->check(CLI::Range(0, 40))
      ->capture_default_str();
  sim->callback([&] { run_simulate(sim_common, sim_model, sim_depth); });

  // estimate ----------------------------------------------------------------
  CommonOpts est_common;
  ModelOpts est_model;
  GridOpts est_grid;
  EvalOpts est_eval;
  CalibOpts est_calib;
  int est_depth = 10;
  std::string est_tree;
  bool est_diag = false;
  auto* est = app.add_subcommand(
      "estimate", "Adaptive invariant-density estimate on an x grid");
  est->fallthrough(true);
  add_common(est, est_common);
  add_model(est, est_model);
  add_grid(est, est_grid);
  add_eval(est, est_eval, "evaluation");
  add_calib(est, est_calib);
  est->add_option("--depth", est_depth, "Tree depth n (when simulating)")
      ->check(CLI::Range(0, 40))
      ->capture_default_str();
  est->add_option("--tree", est_tree,
                  "Read the tree from this CSV instead of simulating");
  est->add_flag("--diagnostics", est_diag,
                "Also write per-bandwidth criterion diagnostics");
  est->callback([&] {
    run_estimate(est_common, est_model, est_grid, est_eval, est_calib,
                 est_depth, est_tree, est_diag);
  });

  // calibrate ---------------------------------------------------------------
  CommonOpts cal_common;
  ModelOpts cal_model;
  GridOpts cal_grid;
  CalibOpts cal_calib;
  int cal_depth = 10;
  std::string cal_tree;
  std::optional<double> cal_x;
  auto* cal = app.add_subcommand(
      "calibrate", "Penalty calibration trace at one evaluation point");
  cal->fallthrough(true);
  add_common(cal, cal_common);
  add_model(cal, cal_model);
  add_grid(cal, cal_grid);
  add_calib(cal, cal_calib, /*with_reuse=*/false);
  cal->add_option("--depth", cal_depth, "Tree depth n (when simulating)")
      ->check(CLI::Range(0, 40))
      ->capture_default_str();
  cal->add_option("--tree", cal_tree,
                  "Read the tree from this CSV instead of simulating");
  cal->add_option("--x", cal_x, "Evaluation point (default: domain midpoint)");
  cal->callback([&] {
    run_calibrate(cal_common, cal_model, cal_grid, cal_calib, cal_depth,
                  cal_tree, cal_x);
  });

  // risk --------------------------------------------------------------------
  CommonOpts risk_common;
  ModelOpts risk_model;
  GridOpts risk_grid;
  EvalOpts risk_eval;
  CalibOpts risk_calib;
  int risk_depth = 10;
  int risk_reps = 100;
  risk_eval.x_count = 21;
  auto* risk = app.add_subcommand(
      "risk", "Monte-Carlo bias/variance/mse of the estimator");
  risk->fallthrough(true);
  add_common(risk, risk_common);
  add_model(risk, risk_model);
  add_grid(risk, risk_grid);
  add_eval(risk, risk_eval, "evaluation");
  add_calib(risk, risk_calib);
  risk->add_option("--depth", risk_depth, "Tree depth n")
      ->check(CLI::Range(1, 40))
      ->capture_default_str();
  risk->add_option("--replications", risk_reps, "Monte-Carlo replications")
      ->check(CLI::Range(1, 1000000))
      ->capture_default_str();
  risk->callback([&] {
    run_risk(risk_common, risk_model, risk_grid, risk_eval, risk_calib,
             risk_depth, risk_reps);
  });

  // rates -------------------------------------------------------------------
  CommonOpts rate_common;
  ModelOpts rate_model;
  GridOpts rate_grid;
  CalibOpts rate_calib;
  std::vector<int> rate_depths{8, 9, 10, 11, 12, 13};
  int rate_reps = 30;
  double rate_x = 0.5;
  auto* rates = app.add_subcommand(
      "rates", "MSE decay across depths with log-log slope");
  rates->fallthrough(true);
  add_common(rates, rate_common);
  add_model(rates, rate_model);
  add_grid(rates, rate_grid);
  add_calib(rates, rate_calib);
  rates->add_option("--depths", rate_depths, "Tree depths to sweep")
      ->delimiter(',')
      ->capture_default_str();
  rates->add_option("--replications", rate_reps, "Replications per depth")
      ->check(CLI::Range(1, 1000000))
      ->capture_default_str();
  rates->add_option("--x", rate_x, "Evaluation point")->capture_default_str();
  rates->callback([&] {
    run_rates(rate_common, rate_model, rate_grid, rate_calib, rate_depths,
              rate_reps, rate_x);
  });

  // splitting-rate ----------------------------------------------------------
  CommonOpts split_common;
  ModelOpts split_model;
  GridOpts split_grid;
  EvalOpts split_eval;
  CalibOpts split_calib;
  int split_depth = 15;
  std::optional<double> split_threshold;
  split_model.model = "growth-frag";
  split_eval.x_count = 21;
  auto* split = app.add_subcommand(
      "splitting-rate", "Growth-fragmentation splitting-rate estimate");
  split->fallthrough(true);
  add_common(split, split_common);
  add_model(split, split_model);
  add_grid(split, split_grid);
  add_eval(split, split_eval, "rate-evaluation");
  add_calib(split, split_calib);
  split->add_option("--depth", split_depth, "Tree depth n")
      ->check(CLI::Range(1, 40))
      ->capture_default_str();
  split->add_option("--threshold", split_threshold,
                    "Denominator floor (default 1/log|T_n|)");
  split->callback([&] {
    run_splitting(split_common, split_model, split_grid, split_eval,
                  split_calib, split_depth, split_threshold);
  });

  // bernstein-check ---------------------------------------------------------
  CommonOpts bern_common;
  ModelOpts bern_model;
  double bern_h = 0.1;
  double bern_x = 0.5;
  std::vector<double> bern_deltas{0.05, 0.075, 0.1, 0.125, 0.15, 0.2};
  int bern_depth = 10;
  int bern_reps = 2000;
  double bern_M = 2.0;
  double bern_rho = 0.4;
  auto* bern = app.add_subcommand(
      "bernstein-check",
      "Empirical deviation probabilities vs the theoretical bound");
  bern->fallthrough(true);
  add_common(bern, bern_common);
  add_model(bern, bern_model);
  bern->add_option("--bandwidth", bern_h, "Bandwidth")->capture_default_str();
  bern->add_option("--x", bern_x, "Evaluation point")->capture_default_str();
  bern->add_option("--deltas", bern_deltas, "Deviation levels")
      ->delimiter(',')
      ->capture_default_str();
  bern->add_option("--depth", bern_depth, "Tree depth n")
      ->check(CLI::Range(1, 40))
      ->capture_default_str();
  bern->add_option("--replications", bern_reps, "Monte-Carlo replications")
      ->check(CLI::Range(100, 1000000))
      ->capture_default_str();
  bern->add_option("--M", bern_M, "Ergodicity prefactor M")
      ->capture_default_str();
  bern->add_option("--rho", bern_rho, "Ergodicity contraction rate rho")
      ->check(CLI::Range(1e-9, 0.499999))
      ->capture_default_str();
  bern->callback([&] {
    run_bernstein(bern_common, bern_model, bern_h, bern_x, bern_deltas,
                  bern_depth, bern_reps, bern_M, bern_rho);
  });

  // reproduce ---------------------------------------------------------------
  CommonOpts rep_common;
  std::string rep_figure;
  auto* rep = app.add_subcommand(
      "reproduce", "Re-create a reference figure (fig1 or fig2)");
  rep->fallthrough(true);
  add_common(rep, rep_common);
  rep->add_option("figure", rep_figure, "Which figure: fig1 or fig2")
      ->required()
      ->check(CLI::IsMember({"fig1", "fig2"}));
  rep->callback([&] { run_reproduce(rep_common, rep_figure); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const QuadratureError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
