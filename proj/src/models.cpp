#include "bmckde/models.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "bmckde/parallel.hpp"
#include "bmckde/quadrature.hpp"

namespace bmckde {

namespace {

constexpr double kHazardTol = 1e-10;  // abs tol of hazard quadrature

double tent(double w) {
  if (w >= -1.0 && w < 0.0) return 1.0 + w;
  if (w >= 0.0 && w <= 1.0) return 1.0 - w;
  return 0.0;
}

//! Shared skeleton for the two tree samplers: node u always draws from the
//! counter stream (seed, u), so the values are independent of both the
//! traversal order and the thread count.
TreeSample simulate_tree(
    int n, std::uint64_t seed, int threads,
    const std::function<double(CounterRng&)>& draw_root,
    const std::function<double(double, CounterRng&)>& draw_child) {
  TreeSample tree;
  tree.depth = n;
  tree.values.resize(tree_size(n), 1);
  {
    CounterRng rng(seed, 0);
    tree.values(0, 0) = draw_root(rng);
  }
  for (int g = 1; g <= n; ++g) {
    const std::int64_t begin = generation_begin(g);
    parallel_for(generation_size(g), threads, [&](std::int64_t i) {
      const std::int64_t u = begin + i;
      CounterRng rng(seed, static_cast<std::uint64_t>(u));
      tree.values(u, 0) = draw_child(tree.values(parent_of(u), 0), rng);
    });
  }
  return tree;
}

//! Lineage skeleton: step k draws from stream (seed, 2^62 + k), disjoint
//! from the node streams used by the tree samplers.
template <typename RootFn, typename StepFn>
TaggedBranchPath simulate_branch(int m, std::uint64_t seed, RootFn draw_root,
                                 StepFn draw_step) {
  if (m < 0) throw std::invalid_argument("steps must be >= 0");
  constexpr std::uint64_t kBranchBase = std::uint64_t{1} << 62;
  TaggedBranchPath path;
  path.values.resize(m + 1);
  {
    CounterRng rng(seed, kBranchBase);
    path.values[0] = draw_root(rng);
  }
  for (int k = 1; k <= m; ++k) {
    CounterRng rng(seed, kBranchBase + static_cast<std::uint64_t>(k));
    path.values[k] = draw_step(path.values[k - 1], rng);
  }
  return path;
}

}  // namespace

double beta22_pdf(double x) {
  if (x < 0.0 || x > 1.0) return 0.0;
  return 6.0 * x * (1.0 - x);
}

double beta22_cdf(double x) {
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  return x * x * (3.0 - 2.0 * x);
}

double beta_mixture_density(double x, double y) {
  if (!(x >= 0.0 && x <= 1.0) || !(y >= 0.0 && y <= 1.0)) {
    throw std::invalid_argument("beta transition states must lie in [0, 1]");
  }
  const double b23 = 12.0 * y * (1.0 - y) * (1.0 - y);
  const double b32 = 12.0 * y * y * (1.0 - y);
  return (1.0 - x) * b23 + x * b32;
}

double sample_beta_transition(double x, CounterRng& rng) {
  if (!(x >= 0.0 && x <= 1.0)) {
    throw std::invalid_argument("beta transition states must lie in [0, 1]");
  }
  const double u = rng.uniform01();
  return u < 1.0 - x ? rng.beta_int(2, 3) : rng.beta_int(3, 2);
}

TreeSample simulate_bar(const BetaBarModel&, int n, std::uint64_t seed,
                        int threads) {
  return simulate_tree(
      n, seed, threads, [](CounterRng& rng) { return rng.beta_int(2, 2); },
      [](double parent, CounterRng& rng) {
        return sample_beta_transition(parent, rng);
      });
}

GrowthFragModel GrowthFragModel::tent() {
  GrowthFragModel model;
  model.tau = 2.0;
  model.s_max = 5.0;
  model.splitting_rate = splitting_rate_tent;
  return model;
}

GrowthFragModel GrowthFragModel::constant_rate(double rate) {
  if (!(rate > 0.0)) throw std::invalid_argument("rate must be positive");
  GrowthFragModel model;
  model.tau = 2.0;
  model.s_max = std::numeric_limits<double>::infinity();
  model.splitting_rate = [rate](double) { return rate; };
  return model;
}

double splitting_rate_tent(double x) {
  if (!(x > 0.0 && x < 5.0)) {
    throw std::invalid_argument("size must lie in (0, 5)");
  }
  return x / (5.0 - x) + 3.0 * tent(2.0 * (x - 3.5));
}

namespace {

//! Hazard rate of the newborn-size transition in the size variable:
//! a newborn at size z splits at rate B(2z)/(tau·z) per unit of size.
std::function<double(double)> hazard_rate(const GrowthFragModel& model) {
  return [&model](double z) {
    return model.splitting_rate(2.0 * z) / (model.tau * z);
  };
}

}  // namespace

double gf_transition_density(const GrowthFragModel& model, double x,
                             double y) {
  if (!model.splitting_rate) {
    throw std::invalid_argument("model has no splitting rate");
  }
  if (!(x > 0.0 && x < model.s_max)) {
    throw std::invalid_argument("parent size outside the state space");
  }
  if (!(y > 0.0 && y < 0.5 * model.s_max)) {
    throw std::invalid_argument("newborn size outside (0, s_max/2)");
  }
  if (y < 0.5 * x) return 0.0;
  const auto rate = hazard_rate(model);
  const double cumulative = integrate(rate, 0.5 * x, y, kHazardTol);
  return rate(y) * std::exp(-cumulative);
}

double sample_gf_transition(const GrowthFragModel& model, double x,
                            CounterRng& rng) {
  if (!model.splitting_rate) {
    throw std::invalid_argument("model has no splitting rate");
  }
  if (!(x > 0.0 && x < model.s_max)) {
    throw std::invalid_argument("parent size outside the state space");
  }
  const double target = rng.exponential();
  const auto rate = hazard_rate(model);

  // Bracket: advance hi toward the newborn-size boundary s_max/2 (halving
  // the remaining gap, or doubling when the space is unbounded) until the
  // cumulative hazard passes the exponential draw.
  const bool bounded = std::isfinite(model.s_max);
  const double boundary = 0.5 * model.s_max;
  double lo = 0.5 * x, hazard_lo = 0.0;
  double hi = lo, hazard_hi = 0.0;
  while (hazard_hi < target) {
    lo = hi;
    hazard_lo = hazard_hi;
    const double next = bounded ? 0.5 * (hi + boundary) : 2.0 * hi;
    if (!(next > hi) || !std::isfinite(next)) {
      throw std::runtime_error(
          "splitting-time root not bracketed: the hazard does not reach the "
          "exponential draw (splitting rate must diverge at s_max)");
    }
    hazard_hi += integrate(rate, hi, next, kHazardTol);
    hi = next;
  }

  // Bisect H(y) = target on [lo, hi]; hazard_lo tracks H(lo) so each probe
  // only integrates the sub-interval [lo, mid].
  while (hi - lo > 1e-13 * std::max(1.0, hi)) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    const double hazard_mid = hazard_lo + integrate(rate, lo, mid, kHazardTol);
    if (hazard_mid < target) {
      lo = mid;
      hazard_lo = hazard_mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

TreeSample simulate_growth_frag(const GrowthFragModel& model, int n,
                                std::uint64_t seed, int threads) {
  if (!(model.root_low > 0.0 && model.root_high > model.root_low &&
        model.root_high <= 0.5 * model.s_max)) {
    throw std::invalid_argument("root law interval must lie in (0, s_max/2)");
  }
  return simulate_tree(
      n, seed, threads,
      [&](CounterRng& rng) {
        return rng.uniform(model.root_low, model.root_high);
      },
      [&](double parent, CounterRng& rng) {
        return sample_gf_transition(model, parent, rng);
      });
}

TaggedBranchPath simulate_tagged_branch(const BetaBarModel&, int m,
                                        std::uint64_t seed) {
  return simulate_branch(
      m, seed, [](CounterRng& rng) { return rng.beta_int(2, 2); },
      [](double prev, CounterRng& rng) {
        return sample_beta_transition(prev, rng);
      });
}

TaggedBranchPath simulate_tagged_branch(const GrowthFragModel& model, int m,
                                        std::uint64_t seed) {
  return simulate_branch(
      m, seed,
      [&](CounterRng& rng) {
        return rng.uniform(model.root_low, model.root_high);
      },
      [&](double prev, CounterRng& rng) {
        return sample_gf_transition(model, prev, rng);
      });
}

}  // namespace bmckde
