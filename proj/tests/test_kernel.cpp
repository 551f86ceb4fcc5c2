#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <filesystem>
#include <stdexcept>

#include "bmckde/io.hpp"
#include "bmckde/kernel.hpp"
#include "bmckde/quadrature.hpp"
#include "bmckde/rng.hpp"

using namespace bmckde;

namespace {
const double kInvSqrt2Pi = 0.3989422804014327;

Eigen::VectorXd vec1(double x) {
  Eigen::VectorXd v(1);
  v[0] = x;
  return v;
}

Kernel uniform_kernel() {
  Eigen::VectorXd t(2), k(2);
  t << 0.0, 0.5;
  k << 1.0, 1.0;
  return Kernel::tabulated(t, k);
}
}  // namespace

TEST_CASE("gaussian profile and norms are closed form") {
  const Kernel g = Kernel::gaussian();
  CHECK(g.is_gaussian());
  CHECK(g.order() == 2);
  CHECK(g.profile(0.0) == doctest::Approx(kInvSqrt2Pi).epsilon(1e-15));
  CHECK(g.profile(1.0) ==
        doctest::Approx(kInvSqrt2Pi * std::exp(-0.5)).epsilon(1e-15));
  CHECK(g.l1() == 1.0);
  CHECK(g.l2sq() ==
        doctest::Approx(0.5 / std::sqrt(std::acos(-1.0))).epsilon(1e-15));
  CHECK(g.sup() == doctest::Approx(kInvSqrt2Pi).epsilon(1e-15));
  CHECK(std::isinf(g.support_radius()));
}

TEST_CASE("product-kernel norms are d-th powers") {
  const Kernel g = Kernel::gaussian();
  const KernelNorms n2 = kernel_norms(g, 2);
  CHECK(n2.l1 == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(n2.l2sq == doctest::Approx(g.l2sq() * g.l2sq()).epsilon(1e-15));
  // sup of the 2-d product Gaussian: 1/(2*pi).
  CHECK(n2.sup ==
        doctest::Approx(1.0 / (2.0 * std::acos(-1.0))).epsilon(1e-12));
}

TEST_CASE("scaled kernel evaluation rescalings") {
  const Kernel g = Kernel::gaussian();
  CHECK(scaled_kernel_eval(g, Bandwidth(1.0, 1), vec1(0.0)) ==
        doctest::Approx(0.3989422804014327).epsilon(1e-15));
  CHECK(scaled_kernel_eval(g, Bandwidth(2.0, 1), vec1(0.0)) ==
        doctest::Approx(0.19947114020071635).epsilon(1e-15));
  Eigen::VectorXd zero2 = Eigen::VectorXd::Zero(2);
  CHECK(scaled_kernel_eval(g, Bandwidth(1.0, 2), zero2) ==
        doctest::Approx(0.15915494309189535).epsilon(1e-12));
}

TEST_CASE("tabulated uniform profile has unit norms") {
  const Kernel u = uniform_kernel();
  CHECK_FALSE(u.is_gaussian());
  CHECK(u.l1() == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(u.l2sq() == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(u.sup() == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(u.support_radius() == 0.5);
  CHECK(u.profile(0.25) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(u.profile(-0.25) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(u.profile(0.75) == 0.0);
}

TEST_CASE("tabulated profiles must integrate to one") {
  Eigen::VectorXd t(2), k(2);
  t << 0.0, 1.0;
  k << 1.0, 1.0;  // integrates to 2
  CHECK_THROWS_AS((void)Kernel::tabulated(t, k), std::invalid_argument);
}

TEST_CASE("tabulated profile loads from CSV") {
  const std::string path = "uniform_profile.csv";
  write_text_atomic(path, "t,k\n0,1\n0.5,1\n");
  const Kernel u = Kernel::tabulated_from_csv(path);
  CHECK(u.profile(0.3) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(u.support_radius() == 0.5);
  std::filesystem::remove(path);
}

TEST_CASE("gaussian convolution matches quadrature") {
  const Kernel g = Kernel::gaussian();
  CounterRng rng(2024u, 0u);
  for (int trial = 0; trial < 20; ++trial) {
    const double a = rng.uniform(0.05, 1.0);
    const double b = rng.uniform(0.05, 1.0);
    const double t = rng.uniform(-2.0, 2.0);
    const double closed = g.convolved_profile(a, b, t);
    const double numeric = integrate(
        [&](double w) {
          return scaled_kernel_eval(g, Bandwidth(a, 1), vec1(t - w)) *
                 scaled_kernel_eval(g, Bandwidth(b, 1), vec1(w));
        },
        t - 8.0 * (a + b), t + 8.0 * (a + b), 1e-10);
    CHECK(std::abs(closed - numeric) < 1e-8);
  }
}

TEST_CASE("uniform-kernel self-convolution is the triangle") {
  const Kernel u = uniform_kernel();
  // Unit-scaled uniform on [-1/2, 1/2]: self-convolution is the unit
  // triangle 1 - |t| on [-1, 1].
  CHECK(u.convolved_profile(1.0, 1.0, 0.0) == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(u.convolved_profile(1.0, 1.0, 0.5) == doctest::Approx(0.5).epsilon(1e-6));
  CHECK(u.convolved_profile(1.0, 1.0, 0.9) == doctest::Approx(0.1).epsilon(1e-5));
  CHECK(u.convolved_profile(1.0, 1.0, 1.5) == doctest::Approx(0.0).epsilon(1e-9));
}

TEST_CASE("convolution is symmetric in the two scales") {
  const Kernel g = Kernel::gaussian();
  CHECK(g.convolved_profile(0.2, 0.7, 0.31) ==
        doctest::Approx(g.convolved_profile(0.7, 0.2, 0.31)).epsilon(1e-13));
  const Kernel u = uniform_kernel();
  CHECK(u.convolved_profile(0.2, 0.7, 0.31) ==
        doctest::Approx(u.convolved_profile(0.7, 0.2, 0.31)).epsilon(1e-6));
}

TEST_CASE("convolution obeys Young's supremum bound") {
  // sup(K_a * K_b) <= min(sup(K_a)*L1(K_b), sup(K_b)*L1(K_a)).
  const Kernel g = Kernel::gaussian();
  const double a = 0.3, b = 0.8;
  const double bound =
      std::min(g.sup() / a * g.l1(), g.sup() / b * g.l1());
  for (double t : {0.0, 0.1, 0.5, 1.0}) {
    CHECK(g.convolved_profile(a, b, t) <= bound + 1e-12);
  }
}

TEST_CASE("convolved kernel integrates to one") {
  const Kernel g = Kernel::gaussian();
  const double total = integrate(
      [&](double t) { return g.convolved_profile(0.25, 0.4, t); }, -8.0, 8.0,
      1e-10);
  CHECK(total == doctest::Approx(1.0).epsilon(1e-8));
}

TEST_CASE("kernel means average over sample rows") {
  const Kernel g = Kernel::gaussian();
  Eigen::MatrixXd pts(3, 1);
  pts << 0.0, 0.0, 0.0;
  // All points at x: mean of K_h(0) = K(0)/h.
  CHECK(scaled_kernel_mean(g, Bandwidth(1.0, 1), vec1(0.0), pts) ==
        doctest::Approx(kInvSqrt2Pi).epsilon(1e-14));
  CHECK(scaled_kernel_mean(g, Bandwidth(0.5, 1), vec1(0.0), pts) ==
        doctest::Approx(2.0 * kInvSqrt2Pi).epsilon(1e-14));
  // Generic path (tabulated) agrees with a manual average.
  const Kernel u = uniform_kernel();
  Eigen::MatrixXd pts2(2, 1);
  pts2 << 0.1, 0.6;
  const double by_hand =
      0.5 * (scaled_kernel_eval(u, Bandwidth(0.5, 1), vec1(0.4 - 0.1)) +
             scaled_kernel_eval(u, Bandwidth(0.5, 1), vec1(0.4 - 0.6)));
  CHECK(scaled_kernel_mean(u, Bandwidth(0.5, 1), vec1(0.4), pts2) ==
        doctest::Approx(by_hand).epsilon(1e-14));
}

TEST_CASE("gaussian convolved mean equals widened plain mean") {
  const Kernel g = Kernel::gaussian();
  CounterRng rng(5u, 0u);
  Eigen::MatrixXd pts(50, 1);
  for (int i = 0; i < 50; ++i) pts(i, 0) = rng.uniform01();
  const Bandwidth h(0.2, 1), hp(0.3, 1);
  const Bandwidth widened(std::sqrt(0.2 * 0.2 + 0.3 * 0.3), 1);
  CHECK(convolved_kernel_mean(g, h, hp, vec1(0.5), pts) ==
        doctest::Approx(scaled_kernel_mean(g, widened, vec1(0.5), pts))
            .epsilon(1e-13));
}

TEST_CASE("bandwidths must be strictly positive") {
  CHECK_THROWS_AS((void)Bandwidth(0.0, 1), std::invalid_argument);
  CHECK_THROWS_AS((void)Bandwidth(-0.1, 2), std::invalid_argument);
  Eigen::VectorXd empty(0);
  CHECK_THROWS_AS((void)Bandwidth(empty), std::invalid_argument);
}

TEST_CASE("bandwidth product is cached correctly") {
  Eigen::VectorXd h(3);
  h << 0.5, 0.2, 2.0;
  const Bandwidth b(h);
  CHECK(b.prod() == doctest::Approx(0.2).epsilon(1e-15));
  CHECK(b.dim() == 3);
  CHECK(b[1] == 0.2);
}
