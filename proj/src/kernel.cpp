#include "bmckde/kernel.hpp"

#include <charconv>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include "bmckde/io.hpp"
#include "bmckde/quadrature.hpp"

namespace bmckde {

namespace {

constexpr double kInvSqrt2Pi = 0.3989422804014327;  // 1/√(2π)

double gaussian_profile(double t) {
  return kInvSqrt2Pi * std::exp(-0.5 * t * t);
}

}  // namespace

Kernel Kernel::gaussian() {
  Kernel k;
  k.gaussian_ = true;
  k.order_ = 2;
  k.radius_ = std::numeric_limits<double>::infinity();
  k.norms_.l1 = 1.0;
  k.norms_.l2sq = 0.5 / std::sqrt(M_PI);  // 1/(2√π)
  k.norms_.sup = kInvSqrt2Pi;
  return k;
}

Kernel Kernel::tabulated(Eigen::VectorXd abscissae, Eigen::VectorXd values,
                         int order) {
  if (abscissae.size() != values.size() || abscissae.size() < 2) {
    throw std::invalid_argument("kernel table needs >= 2 matching samples");
  }
  if (abscissae[0] != 0.0) {
    throw std::invalid_argument("kernel table must start at t = 0");
  }
  for (Eigen::Index i = 1; i < abscissae.size(); ++i) {
    if (!(abscissae[i] > abscissae[i - 1])) {
      throw std::invalid_argument("kernel table abscissae must be ascending");
    }
  }
  Kernel k;
  k.gaussian_ = false;
  k.order_ = order;
  k.radius_ = abscissae[abscissae.size() - 1];
  k.abscissae_ = std::move(abscissae);
  k.values_ = std::move(values);

  const double r = k.radius_;
  const double mass = integrate([&](double t) { return k.profile(t); }, -r, r,
                                1e-10);
  if (std::abs(mass - 1.0) > 1e-6) {
    throw std::invalid_argument("kernel profile must integrate to 1, got " +
                                format_double(mass));
  }
  k.norms_.l1 = integrate([&](double t) { return std::abs(k.profile(t)); },
                          -r, r, 1e-10);
  k.norms_.l2sq = integrate(
      [&](double t) {
        const double v = k.profile(t);
        return v * v;
      },
      -r, r, 1e-10);
  k.norms_.sup = k.values_.cwiseAbs().maxCoeff();
  return k;
}

Kernel Kernel::tabulated_from_csv(const std::string& path, int order) {
  const std::string text = read_text(path);
  std::vector<std::string> lines = split(text, '\n');
  while (!lines.empty() && lines.back().empty()) lines.pop_back();
  if (lines.size() < 3 || lines[0] != "t,k") {
    throw std::runtime_error("kernel table csv: expected header t,k and >= 2 rows");
  }
  const Eigen::Index n = static_cast<Eigen::Index>(lines.size()) - 1;
  Eigen::VectorXd t(n), v(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const std::vector<std::string> cells = split(lines[1 + i], ',');
    if (cells.size() != 2) {
      throw std::runtime_error("kernel table csv: bad row '" + lines[1 + i] +
                               "'");
    }
    for (int c = 0; c < 2; ++c) {
      double value = 0.0;
      const char* first = cells[c].data();
      const char* last = first + cells[c].size();
      auto [ptr, ec] = std::from_chars(first, last, value);
      if (ec != std::errc{} || ptr != last) {
        throw std::runtime_error("kernel table csv: bad number '" + cells[c] +
                                 "'");
      }
      (c == 0 ? t : v)[i] = value;
    }
  }
  return tabulated(std::move(t), std::move(v), order);
}

double Kernel::profile(double t) const {
  if (gaussian_) return gaussian_profile(t);
  const double a = std::abs(t);
  if (a > radius_) return 0.0;
  // Binary search for the segment containing a, then interpolate linearly.
  Eigen::Index lo = 0, hi = abscissae_.size() - 1;
  while (hi - lo > 1) {
    const Eigen::Index mid = (lo + hi) / 2;
    if (abscissae_[mid] <= a) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  const double t0 = abscissae_[lo], t1 = abscissae_[hi];
  const double w = (a - t0) / (t1 - t0);
  return (1.0 - w) * values_[lo] + w * values_[hi];
}

double Kernel::convolved_profile(double a, double b, double t) const {
  if (gaussian_) {
    // N(0, a²) ∗ N(0, b²) = N(0, a² + b²).
    const double s = std::sqrt(a * a + b * b);
    return gaussian_profile(t / s) / s;
  }
  // (K_a ∗ K_b)(t) = ∫ K(w) K((t - b·w)/a) dw / a over the support of K.
  return integrate(
             [&](double w) { return profile(w) * profile((t - b * w) / a); },
             -radius_, radius_, 1e-8) /
         a;
}

Bandwidth::Bandwidth(Eigen::VectorXd h) : h_(std::move(h)) {
  if (h_.size() == 0) throw std::invalid_argument("bandwidth must be nonempty");
  if (!(h_.minCoeff() > 0.0)) {
    throw std::invalid_argument("bandwidth components must be positive");
  }
  prod_ = h_.prod();
}

Bandwidth::Bandwidth(double value, int dim)
    : Bandwidth(Eigen::VectorXd::Constant(dim, value)) {}

KernelNorms kernel_norms(const Kernel& kernel, int dim) {
  if (dim < 1) throw std::invalid_argument("dimension must be >= 1");
  KernelNorms n;
  n.l1 = std::pow(kernel.l1(), dim);
  n.l2sq = std::pow(kernel.l2sq(), dim);
  n.sup = std::pow(kernel.sup(), dim);
  return n;
}

double scaled_kernel_eval(const Kernel& kernel, const Bandwidth& h,
                          const Eigen::VectorXd& x) {
  if (x.size() != h.dim()) {
    throw std::invalid_argument("point and bandwidth dimensions differ");
  }
  double value = 1.0;
  for (int j = 0; j < h.dim(); ++j) {
    value *= kernel.profile(x[j] / h[j]);
  }
  return value / h.prod();
}

double convolved_kernel_eval(const Kernel& kernel, const Bandwidth& h,
                             const Bandwidth& hp, const Eigen::VectorXd& x) {
  if (x.size() != h.dim() || h.dim() != hp.dim()) {
    throw std::invalid_argument("point and bandwidth dimensions differ");
  }
  double value = 1.0;
  for (int j = 0; j < h.dim(); ++j) {
    value *= kernel.convolved_profile(h[j], hp[j], x[j]);
  }
  return value;
}

double scaled_kernel_mean(const Kernel& kernel, const Bandwidth& h,
                          const Eigen::VectorXd& x,
                          const Eigen::MatrixXd& points) {
  if (x.size() != h.dim() || points.cols() != h.dim()) {
    throw std::invalid_argument("point and bandwidth dimensions differ");
  }
  const Eigen::Index n = points.rows();
  if (n == 0) throw std::invalid_argument("empty sample");
  if (kernel.is_gaussian()) {
    Eigen::ArrayXd q = Eigen::ArrayXd::Zero(n);
    for (int j = 0; j < h.dim(); ++j) {
      q += ((points.col(j).array() - x[j]) / h[j]).square();
    }
    const double scale =
        std::pow(kInvSqrt2Pi, h.dim()) / (h.prod() * static_cast<double>(n));
    return scale * (-0.5 * q).exp().sum();
  }
  double sum = 0.0;
  for (Eigen::Index u = 0; u < n; ++u) {
    double term = 1.0;
    for (int j = 0; j < h.dim(); ++j) {
      term *= kernel.profile((x[j] - points(u, j)) / h[j]);
    }
    sum += term;
  }
  return sum / (h.prod() * static_cast<double>(n));
}

double convolved_kernel_mean(const Kernel& kernel, const Bandwidth& h,
                             const Bandwidth& hp, const Eigen::VectorXd& x,
                             const Eigen::MatrixXd& points) {
  if (x.size() != h.dim() || h.dim() != hp.dim() || points.cols() != h.dim()) {
    throw std::invalid_argument("point and bandwidth dimensions differ");
  }
  const Eigen::Index n = points.rows();
  if (n == 0) throw std::invalid_argument("empty sample");
  if (kernel.is_gaussian()) {
    // The convolved Gaussian is a Gaussian product kernel with per-axis
    // widths √(h_j² + hp_j²); reuse the vectorized path.
    Eigen::VectorXd widths(h.dim());
    for (int j = 0; j < h.dim(); ++j) {
      widths[j] = std::sqrt(h[j] * h[j] + hp[j] * hp[j]);
    }
    return scaled_kernel_mean(kernel, Bandwidth(std::move(widths)), x, points);
  }
  double sum = 0.0;
  for (Eigen::Index u = 0; u < n; ++u) {
    double term = 1.0;
    for (int j = 0; j < h.dim(); ++j) {
      term *= kernel.convolved_profile(h[j], hp[j], x[j] - points(u, j));
    }
    sum += term;
  }
  return sum / static_cast<double>(n);
}

}  // namespace bmckde
