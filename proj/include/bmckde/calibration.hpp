#pragma once

#include <Eigen/Dense>
#include <vector>

#include "bmckde/estimator.hpp"

namespace bmckde {

//! Computes the smallest penalty that kills every pairwise comparison:
//! κ_max = (T/log T)·max over grid pairs (h, h') of
//! |h'|·(ν̂_{h'}(x) - K_h∗ν̂_{h'}(x))².  The result is nudged up by a few
//! ulps so that bias_proxy_a(·, κ_max) is exactly zero despite rounding.
double kappa_max(const GlCache& cache, const BandwidthGrid& grid);
double kappa_max(const TreeSample& sample, const Kernel& kernel,
                 const BandwidthGrid& grid, const Eigen::VectorXd& x);

//! Knobs of the penalty-calibration sweep.
struct CalibrationConfig {
  int m = 20;             // penalty grid size per iteration
  int s_max = 2;          // zoom iterations
  double b_over_a = 2.0;  // criterion ratio b/a
};

//! One evaluated penalty value: iteration and j are 1-based; is_jump marks
//! the left endpoint of the interval with the largest |1/|ĥ|| increment.
struct CalibrationStep {
  int iteration;
  int j;
  double kappa;
  double h_prod;      // |ĥ(κ)|
  double inv_h_prod;  // 1/|ĥ(κ)|
  bool is_jump;
};

struct CalibrationTrace {
  std::vector<CalibrationStep> steps;
  std::vector<int> jump_index;  // j_jump per iteration (1-based)
  double final_kappa = 0.0;
};

struct CalibrationResult {
  CalibrationTrace trace;
  double kappa = 0.0;  // calibrated penalty: κ_{j_jump+1} of the last zoom
  GlState selection;   // selection-rule state at the calibrated penalty
};

//! Penalty calibration by dimension jump: sweep m equispaced penalties over
//! [κ₁, κ_m] (initially [0, κ_max]), locate the sharpest jump of 1/|ĥ(κ)|,
//! zoom into that interval, and after s_max iterations return the selection
//! at the penalty just right of the jump.  Ties in the jump location go to
//! the smallest j.
CalibrationResult calibrate_and_select(const GlCache& cache,
                                       const BandwidthGrid& grid,
                                       const Eigen::VectorXd& x,
                                       const CalibrationConfig& config = {});
CalibrationResult calibrate_and_select(const TreeSample& sample,
                                       const Kernel& kernel,
                                       const BandwidthGrid& grid,
                                       const Eigen::VectorXd& x,
                                       const CalibrationConfig& config = {});

}  // namespace bmckde
