#pragma once

#include <cmath>
#include <stdexcept>
#include <utility>
#include <vector>

namespace bmckde {

struct QuadratureError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

namespace detail {

// Gauss-Kronrod 7-15 abscissae and weights on [-1, 1].
inline constexpr double kKronrodNodes[8] = {
    0.991455371120813, 0.949107912342759, 0.864864423359769,
    0.741531185599394, 0.586087235467691, 0.405845151377397,
    0.207784955007898, 0.000000000000000};
inline constexpr double kKronrodWeights[8] = {
    0.022935322010529, 0.063092092629979, 0.104790010322250,
    0.140653259715525, 0.169004726639267, 0.190350578064785,
    0.204432940075298, 0.209482141084728};
inline constexpr double kGaussWeights[4] = {
    0.129484966168870, 0.279705391489277, 0.381830050505119,
    0.417959183673469};

template <typename F>
std::pair<double, double> kronrod_panel(F&& f, double a, double b) {
  const double center = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  const double fc = f(center);
  double kronrod = kKronrodWeights[7] * fc;
  double gauss = kGaussWeights[3] * fc;
  for (int i = 0; i < 7; ++i) {
    const double dx = half * kKronrodNodes[i];
    const double fsum = f(center - dx) + f(center + dx);
    kronrod += kKronrodWeights[i] * fsum;
    if (i % 2 == 1) {
      gauss += kGaussWeights[i / 2] * fsum;
    }
  }
  kronrod *= half;
  gauss *= half;
  return {kronrod, std::abs(kronrod - gauss)};
}

}  // namespace detail

//! Adaptive quadrature of f over [a, b] to absolute tolerance `abs_tol`.
//! Bisects panels whose Gauss-Kronrod error estimate exceeds their share of
//! the tolerance; throws QuadratureError when the panel budget is exhausted.
template <typename F>
double integrate(F&& f, double a, double b, double abs_tol = 1e-10,
                 int max_panels = 100000) {
  if (!(abs_tol > 0)) {
    throw std::invalid_argument("abs_tol must be positive");
  }
  if (a == b) return 0.0;
  double sign = 1.0;
  if (a > b) {
    std::swap(a, b);
    sign = -1.0;
  }

  struct Segment {
    double a, b, tol;
  };
  std::vector<Segment> stack{{a, b, abs_tol}};
  double total = 0.0;
  int panels = 0;
  while (!stack.empty()) {
    const Segment seg = stack.back();
    stack.pop_back();
    if (++panels > max_panels) {
      throw QuadratureError("quadrature did not converge (panel budget)");
    }
    auto [value, err] = detail::kronrod_panel(f, seg.a, seg.b);
    const double mid = 0.5 * (seg.a + seg.b);
    if (err <= seg.tol || mid <= seg.a || mid >= seg.b) {
      total += value;
      continue;
    }
    stack.push_back({seg.a, mid, 0.5 * seg.tol});
    stack.push_back({mid, seg.b, 0.5 * seg.tol});
  }
  return sign * total;
}

}  // namespace bmckde
