#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>

#include "bmckde/rng.hpp"
#include "bmckde/tree.hpp"

namespace bmckde {

//! Autoregressive model on [0,1]: the invariant law is Beta(2,2) and,
//! conditionally on the parent value x, each child is drawn from the
//! mixture (1-x)·Beta(2,3) + x·Beta(3,2), independently of its sibling.
struct BetaBarModel {};

//! Invariant density 6x(1-x) of the Beta autoregressive model (zero
//! outside [0,1]).
double beta22_pdf(double x);

//! Invariant CDF 3x² - 2x³, clamped to [0,1].
double beta22_cdf(double x);

//! Transition density y ↦ (1-x)·12y(1-y)² + x·12y²(1-y) on [0,1].
double beta_mixture_density(double x, double y);

//! One child draw from the Beta autoregressive transition at parent x.
double sample_beta_transition(double x, CounterRng& rng);

//! Sample a full tree of depth n: root ~ Beta(2,2), children conditionally
//! independent given the parent.  Node u draws from the counter stream
//! (seed, u), so the result is identical for any `threads`.
TreeSample simulate_bar(const BetaBarModel& model, int n, std::uint64_t seed,
                        int threads = 1);

//! Size-structured growth-fragmentation model: a cell of size x grows
//! exponentially at rate tau, splits at size-dependent rate
//! splitting_rate(size) into two halves, and sizes live in S = (0, s_max).
//! Newborn (observed) sizes live in (0, s_max/2).
struct GrowthFragModel {
  double tau = 2.0;
  double s_max = 5.0;
  std::function<double(double)> splitting_rate;
  double root_low = 0.5;   // root size ~ uniform(root_low, root_high)
  double root_high = 2.0;

  //! The reference model: tau = 2, S = (0,5), tent-shaped rate
  //! splitting_rate_tent.
  static GrowthFragModel tent();

  //! Constant splitting rate on an unbounded size space (s_max = ∞);
  //! the transition then has the closed form used as a test oracle.
  static GrowthFragModel constant_rate(double rate);
};

//! The tent-shaped splitting rate x/(5-x) + 3·T(2(x-7/2)) on (0,5), where
//! T(w) = (1+w) on [-1,0), (1-w) on [0,1], zero elsewhere.  Diverges at
//! x = 5, which confines newborn sizes to (0, 5/2).
double splitting_rate_tent(double x);

//! Transition density of the newborn-size chain:
//! y ↦ (B(2y)/(tau·y))·exp(-∫_{x/2}^{y} B(2z)/(tau·z) dz) for y ≥ x/2,
//! zero below x/2.  The hazard integral uses adaptive quadrature.
double gf_transition_density(const GrowthFragModel& model, double x, double y);

//! One newborn size drawn at parent size x by exact cumulative-hazard
//! inversion: E ~ Exp(1), then solve H(y) = E by bracketing and bisection.
//! Throws when the hazard cannot reach E (rate not divergent at s_max).
double sample_gf_transition(const GrowthFragModel& model, double x,
                            CounterRng& rng);

//! Sample a full tree of depth n: root ~ uniform(root_low, root_high),
//! children conditionally independent given the parent; node u draws from
//! stream (seed, u), so output does not depend on `threads`.
TreeSample simulate_growth_frag(const GrowthFragModel& model, int n,
                                std::uint64_t seed, int threads = 1);

//! States (Y_0, ..., Y_m) of a single lineage.
struct TaggedBranchPath {
  Eigen::VectorXd values;
};

//! Lineage chain of the Beta autoregressive model: Y_0 ~ Beta(2,2) and one
//! transition draw per step (children are i.i.d. given the parent, so the
//! lineage transition is the marginal transition).
TaggedBranchPath simulate_tagged_branch(const BetaBarModel& model, int m,
                                        std::uint64_t seed);

//! Lineage chain of the growth-fragmentation model (same convention).
TaggedBranchPath simulate_tagged_branch(const GrowthFragModel& model, int m,
                                        std::uint64_t seed);

}  // namespace bmckde
