#pragma once

#include <Eigen/Dense>
#include <vector>

#include "bmckde/kernel.hpp"
#include "bmckde/tree.hpp"

namespace bmckde {

//! A finite bandwidth collection, sorted by decreasing product |h|, with
//! every entry obeying the selection theory's lower bound
//! |h| ≥ log(T)/T where T = tree_size(depth).
struct BandwidthGrid {
  std::vector<Bandwidth> entries;
  int depth = 0;       // depth n the grid was built for
  double h_max = 0.0;  // 0 for explicit grids
  double alpha = 0.0;  // 0 for explicit grids

  int size() const { return static_cast<int>(entries.size()); }
  const Bandwidth& operator[](int i) const { return entries[i]; }
};

//! Geometric grid {h_max·k^(-alpha), k = 1..k_max}^d with
//! k_max = ⌊(T·h_max/log T)^(1/alpha)⌋, filtered to the |h| lower bound.
//! Requires depth >= 1 (the bound degenerates at depth 0) and a nonempty
//! result.
BandwidthGrid build_bandwidth_grid(double h_max, double alpha, int depth,
                                   int dim);

//! Wrap an explicit bandwidth list: validates the |h| lower bound, drops
//! exact duplicates, sorts by decreasing |h|.
BandwidthGrid make_bandwidth_grid(std::vector<Bandwidth> entries, int depth);

//! Kernel density estimate (1/T)·Σ_u K_h(x - X_u) over all tree nodes.
double kde_eval(const TreeSample& sample, const Kernel& kernel,
                const Bandwidth& h, const Eigen::VectorXd& x);

//! Smoothed estimate (K_h ∗ ν̂_hp)(x) = (1/T)·Σ_u (K_h ∗ K_hp)(x - X_u).
double smoothed_kde_eval(const TreeSample& sample, const Kernel& kernel,
                         const Bandwidth& h, const Bandwidth& hp,
                         const Eigen::VectorXd& x);

//! Penalty term V(x,h) = kappa·log(T)/(T·|h|); kappa absorbs the unknown
//! variance constant.
double variance_term(double kappa, int depth, const Bandwidth& h);
double variance_term(double kappa, int depth, double h_prod);

//! All pairwise quantities the selection rule needs at one point x:
//! nu[i] = ν̂_{h_i}(x) and smoothed(i,j) = (K_{h_i} ∗ ν̂_{h_j})(x)
//! (symmetric in (i,j)).  Computing them once makes repeated selection at
//! the same point — e.g. across penalty values during calibration — cheap.
struct GlCache {
  Eigen::VectorXd nu;
  Eigen::MatrixXd smoothed;
};

GlCache compute_gl_cache(const TreeSample& sample, const Kernel& kernel,
                         const BandwidthGrid& grid, const Eigen::VectorXd& x);

//! Bias proxy Â(x,h_i) = max_j ((ν̂_{h_j}(x) - K_{h_i}∗ν̂_{h_j}(x))² -
//! V_kappa(h_j))_+ for every grid entry i.
Eigen::VectorXd bias_proxy_a(const GlCache& cache, const BandwidthGrid& grid,
                             double kappa);
Eigen::VectorXd bias_proxy_a(const TreeSample& sample, const Kernel& kernel,
                             const BandwidthGrid& grid,
                             const Eigen::VectorXd& x, double kappa);

//! Per-bandwidth record of the selection criterion at one point.
struct GlRecord {
  Bandwidth h;
  double nu_hat;      // ν̂_h(x)
  double variance;    // V(x,h) with the given kappa
  double bias_proxy;  // Â(x,h)
  double criterion;   // Â(x,h) + b_over_a·V(x,h)
};

//! Outcome of the pairwise-comparison ("grid-local") selection rule at one
//! point: minimize Â(x,h) + (b/a)·V(x,h) over the grid, ties broken toward
//! larger |h|.
struct GlState {
  Eigen::VectorXd x;
  double kappa = 0.0;
  double b_over_a = 2.0;
  std::vector<GlRecord> records;  // grid order (decreasing |h|)
  int selected = 0;               // index into records

  const GlRecord& selected_record() const { return records[selected]; }
  const Bandwidth& selected_bandwidth() const { return records[selected].h; }
  double estimate() const { return records[selected].nu_hat; }
};

GlState select_bandwidth_gl(const GlCache& cache, const BandwidthGrid& grid,
                            const Eigen::VectorXd& x, double kappa,
                            double b_over_a = 2.0);
GlState select_bandwidth_gl(const TreeSample& sample, const Kernel& kernel,
                            const BandwidthGrid& grid,
                            const Eigen::VectorXd& x, double kappa,
                            double b_over_a = 2.0);

//! Run the selection rule independently at each evaluation point (the
//! bandwidth is local: it may differ across points).  Points are processed
//! in parallel; results are deterministic and in x_grid order.
std::vector<GlState> adaptive_estimate(const TreeSample& sample,
                                       const Kernel& kernel,
                                       const BandwidthGrid& grid,
                                       const std::vector<Eigen::VectorXd>& x_grid,
                                       double kappa, double b_over_a = 2.0,
                                       int threads = 1);

}  // namespace bmckde
