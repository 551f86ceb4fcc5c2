#pragma once

#include <Eigen/Dense>
#include <string>

namespace bmckde {

//! One-dimensional norms of a kernel profile, raised to the d-th power for
//! d-dimensional product kernels by kernel_norms().
struct KernelNorms {
  double l1 = 0.0;    // ‖K‖₁
  double l2sq = 0.0;  // ‖K‖₂²
  double sup = 0.0;   // ‖K‖_∞
};

//! A product kernel on ℝ^d built from a single symmetric 1-d profile.
//! The Gaussian profile is first-class (closed-form norms and closed-form
//! kernel-kernel convolution); any other symmetric profile can be supplied
//! as a table over t ≥ 0, linearly interpolated and zero outside its range.
class Kernel {
 public:
  //! Standard Gaussian profile exp(-t²/2)/√(2π); order 2.
  static Kernel gaussian();

  //! Symmetric profile from samples (abscissae[i], values[i]) with
  //! abscissae ascending from 0; K(t) = K(-t) by reflection, zero beyond
  //! the last abscissa.  The interpolant must integrate to 1 (tol 1e-6).
  static Kernel tabulated(Eigen::VectorXd abscissae, Eigen::VectorXd values,
                          int order = 2);

  //! Load a tabulated profile from a CSV file with header `t,k`.
  static Kernel tabulated_from_csv(const std::string& path, int order = 2);

  bool is_gaussian() const { return gaussian_; }
  int order() const { return order_; }

  //! Profile value K(t).
  double profile(double t) const;

  //! Smallest r with K(t) = 0 for |t| > r; infinity for the Gaussian.
  double support_radius() const { return radius_; }

  //! 1-d norms of the profile (closed form for Gaussian, quadrature else).
  double l1() const { return norms_.l1; }
  double l2sq() const { return norms_.l2sq; }
  double sup() const { return norms_.sup; }

  //! Convolution of two scaled 1-d profiles, (K_a ∗ K_b)(t) with
  //! K_a(t) = K(t/a)/a.  Exact for the Gaussian; adaptive quadrature
  //! (abs tol 1e-8) otherwise.
  double convolved_profile(double a, double b, double t) const;

 private:
  Kernel() = default;

  bool gaussian_ = true;
  int order_ = 2;
  double radius_ = 0.0;
  KernelNorms norms_;
  Eigen::VectorXd abscissae_;  // tabulated profile, t >= 0 ascending
  Eigen::VectorXd values_;
};

//! A d-vector of strictly positive bandwidths with its cached product
//! |h| = h₁⋯h_d.
class Bandwidth {
 public:
  explicit Bandwidth(Eigen::VectorXd h);
  //! Convenience constructor for the isotropic case h = (value, …, value).
  Bandwidth(double value, int dim);

  const Eigen::VectorXd& h() const { return h_; }
  double prod() const { return prod_; }
  int dim() const { return static_cast<int>(h_.size()); }
  double operator[](int j) const { return h_[j]; }

 private:
  Eigen::VectorXd h_;
  double prod_;
};

//! Norms of the d-dimensional product kernel: each 1-d norm to the d-th
//! power.
KernelNorms kernel_norms(const Kernel& kernel, int dim);

//! K_h(x) = K(x₁/h₁, …, x_d/h_d)/|h|.
double scaled_kernel_eval(const Kernel& kernel, const Bandwidth& h,
                          const Eigen::VectorXd& x);

//! (K_h ∗ K_hp)(x), a product over axes of 1-d scaled-profile convolutions.
double convolved_kernel_eval(const Kernel& kernel, const Bandwidth& h,
                             const Bandwidth& hp, const Eigen::VectorXd& x);

//! Mean of K_h(x - X_u) over the rows X_u of `points` — the kernel density
//! estimate at x.  Vectorized for the Gaussian.
double scaled_kernel_mean(const Kernel& kernel, const Bandwidth& h,
                          const Eigen::VectorXd& x,
                          const Eigen::MatrixXd& points);

//! Mean of (K_h ∗ K_hp)(x - X_u) over the rows of `points` — the smoothed
//! density estimate K_h ∗ ν̂_hp at x.
double convolved_kernel_mean(const Kernel& kernel, const Bandwidth& h,
                             const Bandwidth& hp, const Eigen::VectorXd& x,
                             const Eigen::MatrixXd& points);

}  // namespace bmckde
