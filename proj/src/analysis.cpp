#include "bmckde/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>

#include "bmckde/parallel.hpp"
#include "bmckde/quadrature.hpp"
#include "bmckde/rng.hpp"

namespace bmckde {

void validate(const ErgodicityParams& params) {
  if (!(params.M > 0.0)) throw std::invalid_argument("M must be positive");
  if (!(params.rho > 0.0 && params.rho < 0.5)) {
    throw std::invalid_argument("rho must lie in (0, 1/2)");
  }
  const double sups[] = {params.sup_Q, params.sup_nu, params.sup_P,
                         params.sup_P0, params.sup_P1};
  for (double s : sups) {
    if (!(s >= 0.0)) throw std::invalid_argument("sup-norms must be >= 0");
  }
}

ErgodicityParams beta_bar_ergodicity_params(double M, double rho) {
  // The transition density is affine in the parent state x, so every
  // x-supremum is attained at x = 0 or x = 1; the y-suprema are taken on a
  // dense grid.
  constexpr int kSteps = 10000;  // grid step 1e-4
  double sup_q = 0.0, sup_nu = 0.0;
  for (int i = 0; i <= kSteps; ++i) {
    const double y = static_cast<double>(i) / kSteps;
    sup_q = std::max(sup_q, beta_mixture_density(0.0, y));
    sup_q = std::max(sup_q, beta_mixture_density(1.0, y));
    sup_nu = std::max(sup_nu, beta22_pdf(y));
  }
  ErgodicityParams params;
  params.M = M;
  params.rho = rho;
  params.sup_Q = sup_q;
  params.sup_nu = sup_nu;
  // Children are conditionally i.i.d., so the two-child density factorizes
  // and its sup over x is attained where the per-child sup is.
  params.sup_P = sup_q * sup_q;
  params.sup_P0 = sup_q;
  params.sup_P1 = sup_q;
  validate(params);
  return params;
}

double variance_constant(const Kernel& kernel, int dim,
                         const ErgodicityParams& params) {
  validate(params);
  const double l2sq = kernel_norms(kernel, dim).l2sq;
  const double c_p = 2.0 * l2sq * (params.sup_Q + params.sup_nu) +
                     params.sup_P +
                     params.sup_nu * (l2sq + params.sup_P0 + params.sup_P1);
  const double rho2 = params.rho * params.rho;
  const double c_i =
      (1.0 + 1.0 / (1.0 - 2.0 * rho2)) *
          (params.sup_Q + params.sup_nu) * (params.sup_Q + params.sup_nu) +
      params.M * params.M + c_p;
  const double denom = (std::sqrt(2.0) - 1.0) * (std::sqrt(2.0) - 1.0);
  return c_i / denom;
}

BernsteinConstants bernstein_constants(const Kernel& kernel, int dim,
                                       const ErgodicityParams& params) {
  validate(params);
  const KernelNorms norms = kernel_norms(kernel, dim);
  const double qn = params.sup_Q + params.sup_nu;
  BernsteinConstants c;
  c.c_rho_M = params.M * (1.0 + params.rho) / (1.0 - 2.0 * params.rho);
  c.c_prime_rho = 3.0 + 2.0 / (1.0 - 2.0 * params.rho);
  const double cross = std::max(qn, params.M * norms.l1 * norms.sup);
  c.c_conv = 8.0 * std::max(2.0 * norms.l1 * norms.l1 * norms.l2sq * qn,
                            cross * cross);
  c.c_plain = 8.0 * std::max({params.M * norms.sup, qn * norms.l1,
                              qn * norms.l2sq});
  return c;
}

double bernstein_bound(double delta, int n, const Bandwidth& h,
                       const Kernel& kernel,
                       const BernsteinConstants& constants, bool convolved,
                       const std::optional<Bandwidth>& hp) {
  if (!(delta > 0.0)) throw std::invalid_argument("delta must be positive");
  if (convolved && !hp) {
    throw std::invalid_argument("convolved bound needs the second bandwidth");
  }
  const KernelNorms norms = kernel_norms(kernel, h.dim());
  const double c = convolved ? constants.c_conv : constants.c_plain;
  const double kernel_factor =
      convolved ? norms.l1 * norms.sup : norms.sup;
  const double scale = convolved ? hp->prod() : h.prod();
  const double t = static_cast<double>(tree_size(n));

  const double linear = 4.0 * constants.c_rho_M * kernel_factor * delta / 3.0;
  const double cc = c * constants.c_prime_rho;
  const double lead = std::exp(delta * cc / (linear + cc));
  const double tail =
      std::exp(-delta * delta * t * scale / (2.0 * (cc + linear)));
  return 2.0 * lead * tail;
}

double expected_smoothed_density(const Kernel& kernel, const Bandwidth& h,
                                 double x, const Density1d& density,
                                 double lo, double hi, double abs_tol) {
  if (h.dim() != 1) {
    throw std::invalid_argument("expected_smoothed_density is 1-d");
  }
  Eigen::VectorXd diff(1);
  return integrate(
      [&](double y) {
        diff[0] = x - y;
        return scaled_kernel_eval(kernel, h, diff) * density(y);
      },
      lo, hi, abs_tol);
}

std::vector<double> empirical_deviation_probabilities(
    const BetaBarModel& model, const Kernel& kernel, const Bandwidth& h,
    double x, const std::vector<double>& deltas, int n, int replications,
    std::uint64_t seed, int threads) {
  if (replications < 100) {
    throw std::invalid_argument("deviation estimate needs >= 100 replications");
  }
  if (h.dim() != 1) {
    throw std::invalid_argument("deviation check is 1-d");
  }
  const double center =
      expected_smoothed_density(kernel, h, x, beta22_pdf, 0.0, 1.0);
  Eigen::VectorXd point(1);
  point[0] = x;

  std::vector<double> deviations(replications);
  parallel_for(replications, threads, [&](std::int64_t r) {
    const TreeSample tree =
        simulate_bar(model, n, derive_seed(seed, static_cast<std::uint64_t>(r)));
    deviations[r] = std::abs(kde_eval(tree, kernel, h, point) - center);
  });

  std::vector<double> out(deltas.size());
  for (std::size_t i = 0; i < deltas.size(); ++i) {
    std::int64_t count = 0;
    for (double dev : deviations) {
      if (dev > deltas[i]) ++count;
    }
    out[i] = static_cast<double>(count) / replications;
  }
  return out;
}

double empirical_deviation_probability(const BetaBarModel& model,
                                       const Kernel& kernel,
                                       const Bandwidth& h, double x,
                                       double delta, int n, int replications,
                                       std::uint64_t seed, int threads) {
  return empirical_deviation_probabilities(model, kernel, h, x, {delta}, n,
                                           replications, seed, threads)[0];
}

RiskReport pointwise_risk(const Simulator& simulate,
                          const PointEstimator1d& estimate,
                          const Density1d& truth,
                          const std::vector<double>& x_grid, int depth,
                          int replications, std::uint64_t seed, int threads) {
  if (replications < 1) {
    throw std::invalid_argument("risk needs >= 1 replication");
  }
  if (x_grid.empty()) throw std::invalid_argument("empty evaluation grid");

  const std::size_t nx = x_grid.size();
  Eigen::MatrixXd estimates(replications, nx);
  parallel_for(replications, threads, [&](std::int64_t r) {
    const TreeSample tree =
        simulate(derive_seed(seed, static_cast<std::uint64_t>(r)));
    for (std::size_t i = 0; i < nx; ++i) {
      estimates(r, static_cast<Eigen::Index>(i)) = estimate(tree, x_grid[i]);
    }
  });

  RiskReport report;
  report.depth = depth;
  report.replications = replications;
  report.rows.resize(nx);
  for (std::size_t i = 0; i < nx; ++i) {
    const auto col = estimates.col(static_cast<Eigen::Index>(i));
    const double mean = col.mean();
    const double bias = mean - truth(x_grid[i]);
    const double variance = (col.array() - mean).square().mean();
    RiskRow& row = report.rows[i];
    row.x = x_grid[i];
    row.bias_sq = bias * bias;
    row.variance = variance;
    row.mse = row.bias_sq + row.variance;
  }
  return report;
}

LinearFit least_squares_fit(const std::vector<double>& x,
                            const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) {
    throw std::invalid_argument("fit needs >= 2 matching points");
  }
  const double n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (!(sxx > 0.0)) {
    throw std::invalid_argument("fit design is degenerate (constant x)");
  }
  LinearFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  fit.r2 = syy > 0.0 ? (sxy * sxy) / (sxx * syy) : 1.0;
  return fit;
}

double rate_regression(const std::vector<std::pair<int, double>>& depth_mse) {
  if (depth_mse.size() < 3) {
    throw std::invalid_argument("rate regression needs >= 3 depths");
  }
  std::set<int> depths;
  std::vector<double> xs, ys;
  for (const auto& [n, mse] : depth_mse) {
    if (!depths.insert(n).second) {
      throw std::invalid_argument("rate regression depths must be distinct");
    }
    if (!(mse > 0.0)) {
      throw std::invalid_argument("rate regression needs positive mse");
    }
    const double t = static_cast<double>(tree_size(n));
    xs.push_back(std::log(t / std::log(t)));
    ys.push_back(std::log(mse));
  }
  return least_squares_fit(xs, ys).slope;
}

double empirical_interval_fraction(const TreeSample& sample, double lo,
                                   double hi) {
  if (!(hi >= lo)) throw std::invalid_argument("interval bounds reversed");
  const auto col = sample.values.col(0);
  std::int64_t count = 0;
  for (Eigen::Index u = 0; u < col.size(); ++u) {
    if (col[u] >= lo && col[u] < hi) ++count;
  }
  return static_cast<double>(count) / static_cast<double>(sample.size());
}

double splitting_rate_plugin(double tau, double x, double nu_half,
                             double mass, double threshold) {
  if (!(tau > 0.0)) throw std::invalid_argument("tau must be positive");
  if (!(threshold > 0.0)) {
    throw std::invalid_argument("threshold must be positive");
  }
  return 0.5 * tau * x * nu_half / std::max(mass, threshold);
}

double estimate_splitting_rate(const TreeSample& sample, const Kernel& kernel,
                               const SplitBandwidthMode& mode, double x,
                               double tau, double threshold) {
  Eigen::VectorXd half(1);
  half[0] = 0.5 * x;
  double nu_half = 0.0;
  if (const auto* fixed = std::get_if<FixedBandwidth>(&mode)) {
    nu_half = kde_eval(sample, kernel, fixed->h, half);
  } else {
    const auto& adaptive = std::get<AdaptiveBandwidth>(mode);
    if (adaptive.kappa) {
      nu_half = select_bandwidth_gl(sample, kernel, adaptive.grid, half,
                                    *adaptive.kappa, adaptive.b_over_a)
                    .estimate();
    } else {
      CalibrationConfig config;
      config.b_over_a = adaptive.b_over_a;
      nu_half = calibrate_and_select(sample, kernel, adaptive.grid, half,
                                     config)
                    .selection.estimate();
    }
  }
  const double mass = empirical_interval_fraction(sample, 0.5 * x, x);
  return splitting_rate_plugin(tau, x, nu_half, mass, threshold);
}

}  // namespace bmckde
