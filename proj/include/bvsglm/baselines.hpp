#pragma once

#include <Eigen/Dense>
#include <vector>

#include "bvsglm/hellinger.hpp"
#include "bvsglm/posterior.hpp"

namespace bvsglm {

/// Indicator-design dataset: each row has a single 1 at a uniformly chosen
/// coordinate; responses are standard normal, independent of x.
Dataset simulate_counterexample(int n, int K, Rng& rng);

/// Exact per-coordinate full-model posterior under the i.i.d. N(0,1) slab:
/// beta_j ~ N(s_j/(1+m_j), 1/(1+m_j)) with m_j observations summing to s_j.
struct CoordinatePosterior {
  Eigen::VectorXd mean;
  Eigen::VectorXd variance;
};
CoordinatePosterior full_model_posterior(const Dataset& data);

struct ChebyshevResult {
  double empirical_tail;  // fraction of posterior draws with d >= sqrt(eta)
  double bound;           // 1 - 1/(eta^2 n)
  bool pass;
  bool vacuous;  // eta^2 n <= 1: bound has no content, auto-pass
  double eta;
};

/// The no-selection lower-bound check: K = 2n indicator design, exact
/// posterior sampling, closed-form d^2 = (2/K) sum (1 - e^{-beta_j^2/8}).
ChebyshevResult chebyshev_check(int n, long posterior_draws, Rng& rng);

/// Exact full-model (no selection) posterior draws for a normal-linear
/// dataset with slab N(0, slab_scale I).  Guard: K <= 5000.
std::vector<Eigen::VectorXd> full_model_normal_baseline(const Dataset& data, double slab_scale,
                                                        Rng& rng, int draws);

/// Closed-form indicator-design squared distance for a full coefficient
/// vector against the zero truth (normal, phi = 1).
double indicator_design_sq_distance(const Eigen::VectorXd& beta);

}  // namespace bvsglm
