#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <optional>
#include <variant>
#include <vector>

#include "bmckde/calibration.hpp"
#include "bmckde/estimator.hpp"
#include "bmckde/kernel.hpp"
#include "bmckde/models.hpp"

namespace bmckde {

//! Uniform-geometric-ergodicity constants (M, rho) together with the
//! sup-norms of the transition and invariant densities.  M and rho are not
//! identifiable from data; they are configuration inputs used only in
//! theoretical bounds, never inside the estimator.
struct ErgodicityParams {
  double M = 1.0;       // ergodicity prefactor, > 0
  double rho = 0.25;    // contraction rate, in (0, 1/2)
  double sup_Q = 0.0;   // sup of the lineage transition density
  double sup_nu = 0.0;  // sup of the invariant density
  double sup_P = 0.0;   // sup of the two-child transition density
  double sup_P0 = 0.0;  // sup of the first-child marginal transition
  double sup_P1 = 0.0;  // sup of the second-child marginal transition
};

//! Throws unless M > 0, 0 < rho < 1/2 and all sup-norms are >= 0.
void validate(const ErgodicityParams& params);

//! Ergodicity bundle for the Beta autoregressive model: the closed-form
//! sup-norms are evaluated by dense grid maximization (step 1e-4), while
//! (M, rho) remain caller-supplied guesses.
ErgodicityParams beta_bar_ergodicity_params(double M = 2.0, double rho = 0.4);

//! The variance constant C(P,nu) of the kernel-estimator concentration
//! bound: with C_P = 2‖K‖₂²(sup_Q + sup_nu) + sup_P + sup_nu(‖K‖₂² +
//! sup_P0 + sup_P1) and C_I = (1 + 1/(1-2rho²))(sup_Q + sup_nu)² + M² +
//! C_P, returns C_I/(√2-1)².
double variance_constant(const Kernel& kernel, int dim,
                         const ErgodicityParams& params);

//! Constants of the Bernstein-type deviation inequalities.
struct BernsteinConstants {
  double c_rho_M = 0.0;      // M(1+rho)/(1-2rho)
  double c_prime_rho = 0.0;  // 3 + 2/(1-2rho)
  double c_conv = 0.0;   // 8·max{2‖K‖₁²‖K‖₂²(Q+nu), max{Q+nu, M‖K‖₁‖K‖∞}²}
  double c_plain = 0.0;  // 8·max{M‖K‖∞, (Q+nu)‖K‖₁, (Q+nu)‖K‖₂²}
};

BernsteinConstants bernstein_constants(const Kernel& kernel, int dim,
                                       const ErgodicityParams& params);

//! Right-hand side of the deviation inequality for the kernel average
//! (convolved = false, scale |h|, kernel factor ‖K‖_∞) or the
//! kernel-convolution average (convolved = true, scale |hp|, kernel factor
//! ‖K‖₁‖K‖_∞):
//!   2·exp(δ·c·c'ρ/(4c_{ρ,M}·L·δ/3 + c·c'ρ))
//!    ·exp(-δ²·T·|h|/(2(c·c'ρ + 4c_{ρ,M}·L·δ/3))).
//! The value can exceed 1 for small δ; callers clamp for display.
double bernstein_bound(double delta, int n, const Bandwidth& h,
                       const Kernel& kernel,
                       const BernsteinConstants& constants, bool convolved,
                       const std::optional<Bandwidth>& hp = std::nullopt);

//! Scalar density used as ground truth or reference.
using Density1d = std::function<double(double)>;

//! Smoothed density (K_h ∗ density)(x) by adaptive quadrature over the
//! density's support [lo, hi]; the exact expectation of the kernel density
//! estimate under stationarity.
double expected_smoothed_density(const Kernel& kernel, const Bandwidth& h,
                                 double x, const Density1d& density,
                                 double lo, double hi, double abs_tol = 1e-8);

//! Monte-Carlo estimate of P(|ν̂_h(x) - (K_h ∗ ν)(x)| > δ) for each δ in
//! `deltas`, over `replications` independent trees of depth n (replication
//! r uses seed derive_seed(seed, r)).  The centering uses the known
//! invariant density Beta(2,2).  Requires replications >= 100.
std::vector<double> empirical_deviation_probabilities(
    const BetaBarModel& model, const Kernel& kernel, const Bandwidth& h,
    double x, const std::vector<double>& deltas, int n, int replications,
    std::uint64_t seed, int threads = 1);

//! Single-δ convenience wrapper.
double empirical_deviation_probability(const BetaBarModel& model,
                                       const Kernel& kernel,
                                       const Bandwidth& h, double x,
                                       double delta, int n, int replications,
                                       std::uint64_t seed, int threads = 1);

//! One tree draw per replication seed.
using Simulator = std::function<TreeSample(std::uint64_t seed)>;
//! A pointwise density estimator applied to one simulated tree.
using PointEstimator1d = std::function<double(const TreeSample&, double x)>;

struct RiskRow {
  double x = 0.0;
  double bias_sq = 0.0;
  double variance = 0.0;
  double mse = 0.0;  // always bias_sq + variance of the same sample moments
};

struct RiskReport {
  std::vector<RiskRow> rows;
  int depth = 0;
  int replications = 0;
};

//! Monte-Carlo pointwise risk of an estimator against a reference density:
//! bias² and variance of estimate(tree_r, x) over replications r, with
//! mse = bias² + variance by construction.  Replications run in parallel
//! and are reduced in replication order, so the report is deterministic.
RiskReport pointwise_risk(const Simulator& simulate,
                          const PointEstimator1d& estimate,
                          const Density1d& truth,
                          const std::vector<double>& x_grid, int depth,
                          int replications, std::uint64_t seed,
                          int threads = 1);

//! Ordinary least squares y = intercept + slope·x with coefficient of
//! determination r2.
struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
};

LinearFit least_squares_fit(const std::vector<double>& x,
                            const std::vector<double>& y);

//! Convergence-rate regression: least-squares slope of log(mse) against
//! log(T/log T) with T = tree_size(n), over >= 3 distinct depths with
//! positive mse.
double rate_regression(const std::vector<std::pair<int, double>>& depth_mse);

//! Fraction of tree values in [lo, hi) (first coordinate).
double empirical_interval_fraction(const TreeSample& sample, double lo,
                                   double hi);

//! The splitting-rate plug-in formula (tau·x/2)·nu_half/max(mass,
//! threshold), where nu_half estimates the invariant density at x/2 and
//! mass the invariant probability of [x/2, x).
double splitting_rate_plugin(double tau, double x, double nu_half,
                             double mass, double threshold);

//! Bandwidth policy for the density factor of the splitting-rate
//! estimator: a fixed bandwidth, or selection over a grid with either a
//! fixed penalty or per-point calibration (kappa empty).
struct FixedBandwidth {
  Bandwidth h;
};
struct AdaptiveBandwidth {
  BandwidthGrid grid;
  std::optional<double> kappa;
  double b_over_a = 2.0;
};
using SplitBandwidthMode = std::variant<FixedBandwidth, AdaptiveBandwidth>;

//! Splitting-rate estimate at newborn-size x from an observed tree:
//! (tau·x/2)·ν̂(x/2) / max(fraction of sample in [x/2, x), threshold).
double estimate_splitting_rate(const TreeSample& sample, const Kernel& kernel,
                               const SplitBandwidthMode& mode, double x,
                               double tau, double threshold);

}  // namespace bmckde
