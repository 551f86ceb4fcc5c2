#include "bmckde/calibration.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace bmckde {

double kappa_max(const GlCache& cache, const BandwidthGrid& grid) {
  const int m = grid.size();
  double best = 0.0;
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < m; ++j) {
      const double diff = cache.nu[j] - cache.smoothed(i, j);
      const double term = grid[j].prod() * diff * diff;
      if (term > best) best = term;
    }
  }
  const double t = static_cast<double>(tree_size(grid.depth));
  const double raw = best * t / std::log(t);
  // A few ulps of headroom keep κ_max·log(T)/(T|h'|) ≥ diff² true in
  // floating point for every pair, so the bias proxy clamps to exactly 0.
  return raw * (1.0 + 8.0 * std::numeric_limits<double>::epsilon());
}

double kappa_max(const TreeSample& sample, const Kernel& kernel,
                 const BandwidthGrid& grid, const Eigen::VectorXd& x) {
  return kappa_max(compute_gl_cache(sample, kernel, grid, x), grid);
}

CalibrationResult calibrate_and_select(const GlCache& cache,
                                       const BandwidthGrid& grid,
                                       const Eigen::VectorXd& x,
                                       const CalibrationConfig& config) {
  if (config.m < 2) throw std::invalid_argument("calibration m must be >= 2");
  if (config.s_max < 1) {
    throw std::invalid_argument("calibration s_max must be >= 1");
  }

  CalibrationResult result;
  double kappa_lo = 0.0;
  double kappa_hi = kappa_max(cache, grid);

  for (int s = 1; s <= config.s_max; ++s) {
    std::vector<double> kappas(config.m);
    std::vector<GlState> states(config.m);
    for (int j = 0; j < config.m; ++j) {
      kappas[j] =
          kappa_lo + (kappa_hi - kappa_lo) * j / (config.m - 1);
      states[j] =
          select_bandwidth_gl(cache, grid, x, kappas[j], config.b_over_a);
    }

    // Sharpest jump of 1/|ĥ(κ)| between consecutive penalties; ties go to
    // the smallest j.
    int jump = 0;
    double jump_size = -1.0;
    for (int j = 0; j + 1 < config.m; ++j) {
      const double gap =
          std::abs(1.0 / states[j].selected_bandwidth().prod() -
                   1.0 / states[j + 1].selected_bandwidth().prod());
      if (gap > jump_size) {
        jump_size = gap;
        jump = j;
      }
    }

    for (int j = 0; j < config.m; ++j) {
      const double prod = states[j].selected_bandwidth().prod();
      result.trace.steps.push_back(
          {s, j + 1, kappas[j], prod, 1.0 / prod, j == jump});
    }
    result.trace.jump_index.push_back(jump + 1);

    kappa_lo = kappas[jump];
    kappa_hi = kappas[jump + 1];
    result.kappa = kappas[jump + 1];
    result.selection = std::move(states[jump + 1]);
  }
  result.trace.final_kappa = result.kappa;
  return result;
}

CalibrationResult calibrate_and_select(const TreeSample& sample,
                                       const Kernel& kernel,
                                       const BandwidthGrid& grid,
                                       const Eigen::VectorXd& x,
                                       const CalibrationConfig& config) {
  return calibrate_and_select(compute_gl_cache(sample, kernel, grid, x), grid,
                              x, config);
}

}  // namespace bmckde
