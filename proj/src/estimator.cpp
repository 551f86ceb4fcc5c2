#include "bmckde/estimator.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "bmckde/parallel.hpp"

namespace bmckde {

namespace {

//! Order bandwidths by decreasing product, then lexicographically by
//! components for a deterministic order among equal products.
bool grid_order(const Bandwidth& a, const Bandwidth& b) {
  if (a.prod() != b.prod()) return a.prod() > b.prod();
  for (int j = 0; j < a.dim(); ++j) {
    if (a[j] != b[j]) return a[j] > b[j];
  }
  return false;
}

bool same_bandwidth(const Bandwidth& a, const Bandwidth& b) {
  return a.h() == b.h();
}

BandwidthGrid finalize_grid(std::vector<Bandwidth> entries, int depth) {
  const double t = static_cast<double>(tree_size(depth));
  const double lower = std::log(t) / t;
  for (const Bandwidth& h : entries) {
    if (h.prod() < lower) {
      throw std::invalid_argument(
          "bandwidth product below the selection lower bound log(T)/T");
    }
  }
  std::sort(entries.begin(), entries.end(), grid_order);
  entries.erase(std::unique(entries.begin(), entries.end(), same_bandwidth),
                entries.end());
  if (entries.empty()) throw std::invalid_argument("empty bandwidth grid");
  BandwidthGrid grid;
  grid.entries = std::move(entries);
  grid.depth = depth;
  return grid;
}

}  // namespace

BandwidthGrid build_bandwidth_grid(double h_max, double alpha, int depth,
                                   int dim) {
  if (!(h_max > 0.0)) throw std::invalid_argument("h_max must be positive");
  if (!(alpha > 1.0)) throw std::invalid_argument("alpha must exceed 1");
  if (dim < 1) throw std::invalid_argument("dimension must be >= 1");
  if (depth < 1) {
    throw std::invalid_argument(
        "bandwidth grid needs depth >= 1 (log|T_n| vanishes at depth 0)");
  }
  const double t = static_cast<double>(tree_size(depth));
  const double log_t = std::log(t);
  const int k_max = static_cast<int>(
      std::floor(std::pow(t * h_max / log_t, 1.0 / alpha)));
  if (k_max < 1) {
    throw std::invalid_argument("empty bandwidth grid: h_max too small");
  }
  std::vector<double> axis(k_max);
  for (int k = 1; k <= k_max; ++k) {
    axis[k - 1] = h_max * std::pow(static_cast<double>(k), -alpha);
  }

  // d-fold product of the per-axis values, filtered to the |h| lower bound.
  const double lower = log_t / t;
  std::vector<Bandwidth> entries;
  Eigen::VectorXd h(dim);
  std::vector<int> idx(dim, 0);
  for (;;) {
    for (int j = 0; j < dim; ++j) h[j] = axis[idx[j]];
    if (h.prod() >= lower) entries.emplace_back(h);
    int j = dim - 1;
    while (j >= 0 && ++idx[j] == k_max) idx[j--] = 0;
    if (j < 0) break;
  }
  if (entries.empty()) {
    throw std::invalid_argument("empty bandwidth grid: h_max too small");
  }
  BandwidthGrid grid = finalize_grid(std::move(entries), depth);
  grid.h_max = h_max;
  grid.alpha = alpha;
  return grid;
}

BandwidthGrid make_bandwidth_grid(std::vector<Bandwidth> entries, int depth) {
  if (entries.empty()) throw std::invalid_argument("empty bandwidth grid");
  const int dim = entries.front().dim();
  for (const Bandwidth& h : entries) {
    if (h.dim() != dim) {
      throw std::invalid_argument("bandwidth grid entries have mixed dims");
    }
  }
  return finalize_grid(std::move(entries), depth);
}

double kde_eval(const TreeSample& sample, const Kernel& kernel,
                const Bandwidth& h, const Eigen::VectorXd& x) {
  return scaled_kernel_mean(kernel, h, x, sample.values);
}

double smoothed_kde_eval(const TreeSample& sample, const Kernel& kernel,
                         const Bandwidth& h, const Bandwidth& hp,
                         const Eigen::VectorXd& x) {
  return convolved_kernel_mean(kernel, h, hp, x, sample.values);
}

double variance_term(double kappa, int depth, double h_prod) {
  if (kappa < 0.0) throw std::invalid_argument("kappa must be >= 0");
  const double t = static_cast<double>(tree_size(depth));
  return kappa * std::log(t) / (t * h_prod);
}

double variance_term(double kappa, int depth, const Bandwidth& h) {
  return variance_term(kappa, depth, h.prod());
}

GlCache compute_gl_cache(const TreeSample& sample, const Kernel& kernel,
                         const BandwidthGrid& grid, const Eigen::VectorXd& x) {
  const int m = grid.size();
  GlCache cache;
  cache.nu.resize(m);
  cache.smoothed.resize(m, m);
  for (int i = 0; i < m; ++i) {
    cache.nu[i] = kde_eval(sample, kernel, grid[i], x);
    for (int j = i; j < m; ++j) {
      const double v = smoothed_kde_eval(sample, kernel, grid[i], grid[j], x);
      cache.smoothed(i, j) = v;
      cache.smoothed(j, i) = v;
    }
  }
  return cache;
}

Eigen::VectorXd bias_proxy_a(const GlCache& cache, const BandwidthGrid& grid,
                             double kappa) {
  const int m = grid.size();
  Eigen::VectorXd a(m);
  for (int i = 0; i < m; ++i) {
    double best = 0.0;
    for (int j = 0; j < m; ++j) {
      const double diff = cache.nu[j] - cache.smoothed(i, j);
      const double term =
          diff * diff - variance_term(kappa, grid.depth, grid[j]);
      if (term > best) best = term;
    }
    a[i] = best;
  }
  return a;
}

Eigen::VectorXd bias_proxy_a(const TreeSample& sample, const Kernel& kernel,
                             const BandwidthGrid& grid,
                             const Eigen::VectorXd& x, double kappa) {
  return bias_proxy_a(compute_gl_cache(sample, kernel, grid, x), grid, kappa);
}

GlState select_bandwidth_gl(const GlCache& cache, const BandwidthGrid& grid,
                            const Eigen::VectorXd& x, double kappa,
                            double b_over_a) {
  if (b_over_a < 1.0) throw std::invalid_argument("b_over_a must be >= 1");
  const int m = grid.size();
  const Eigen::VectorXd a = bias_proxy_a(cache, grid, kappa);
  GlState state;
  state.x = x;
  state.kappa = kappa;
  state.b_over_a = b_over_a;
  state.records.reserve(m);
  for (int i = 0; i < m; ++i) {
    GlRecord rec{grid[i], cache.nu[i],
                 variance_term(kappa, grid.depth, grid[i]), a[i], 0.0};
    rec.criterion = rec.bias_proxy + b_over_a * rec.variance;
    state.records.push_back(std::move(rec));
  }
  // Grid order is decreasing |h|; the strict comparison keeps the earliest
  // (largest-|h|) minimizer on ties.
  state.selected = 0;
  for (int i = 1; i < m; ++i) {
    if (state.records[i].criterion < state.records[state.selected].criterion) {
      state.selected = i;
    }
  }
  return state;
}

GlState select_bandwidth_gl(const TreeSample& sample, const Kernel& kernel,
                            const BandwidthGrid& grid,
                            const Eigen::VectorXd& x, double kappa,
                            double b_over_a) {
  return select_bandwidth_gl(compute_gl_cache(sample, kernel, grid, x), grid,
                             x, kappa, b_over_a);
}

std::vector<GlState> adaptive_estimate(const TreeSample& sample,
                                       const Kernel& kernel,
                                       const BandwidthGrid& grid,
                                       const std::vector<Eigen::VectorXd>& x_grid,
                                       double kappa, double b_over_a,
                                       int threads) {
  std::vector<GlState> out(x_grid.size());
  parallel_for(static_cast<std::int64_t>(x_grid.size()), threads,
               [&](std::int64_t i) {
                 const GlCache cache =
                     compute_gl_cache(sample, kernel, grid, x_grid[i]);
                 out[i] = select_bandwidth_gl(cache, grid, x_grid[i], kappa,
                                              b_over_a);
               });
  return out;
}

}  // namespace bmckde
