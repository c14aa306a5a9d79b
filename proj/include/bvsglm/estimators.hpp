#pragma once

#include <Eigen/Dense>
#include <vector>

#include "bvsglm/hellinger.hpp"
#include "bvsglm/posterior.hpp"

namespace bvsglm {

enum class SelectionKind { All, BestM, InclusionThreshold };

struct SelectionRule {
  SelectionKind kind = SelectionKind::All;
  int m = 1;         // BestM
  double t = 0.05;   // InclusionThreshold, in (0,1)

  static SelectionRule all() { return {SelectionKind::All, 1, 0.05}; }
  static SelectionRule best_m(int m) { return {SelectionKind::BestM, m, 0.05}; }
  static SelectionRule inclusion_threshold(double t) {
    return {SelectionKind::InclusionThreshold, 1, t};
  }
};

/// Selected posterior estimate p_hat_A: an equally-weighted mixture over the
/// retained chain draws.
struct MixtureDensity {
  std::vector<PosteriorDraw> components;
  Eigen::VectorXd weights;      // sums to 1
  double selection_prob = 1.0;  // retained fraction of the chain
};

MixtureDensity select(const Chain& chain, const SelectionRule& rule, int K);

/// Mixture mean at x: sum_k w_k psi(x_{gamma_k}' beta_k).
double mean_estimate(const MixtureDensity& mix, const GlmFamily& fam, const Eigen::VectorXd& x);

/// I[mean > 0.5]; binary families only, 0.5 maps to 0.
int classify(const MixtureDensity& mix, const GlmFamily& fam, const Eigen::VectorXd& x);

/// d(p_hat_A, p*)^2 with the mixture handled per-x (closed form for binary,
/// quadrature/series otherwise), averaged over the x sample.
HellingerEstimate mixture_hellinger(const MixtureDensity& mix, const GlmFamily& fam,
                                    const TrueModel& truth, const XSample& xs);

struct ConvexityBound {
  double lhs;  // d(p_hat_A, p*)^2
  double rhs;  // eps^2 + 2 tail(eps)/selection_prob
  double lhs_se;
  bool pass;
};
ConvexityBound convexity_bound_check(const MixtureDensity& mix, const GlmFamily& fam,
                                     const TrueModel& truth,
                                     const std::vector<double>& retained_distances, double eps,
                                     const XSample& xs);

struct RegressionClassificationReport {
  double weighted_l2;     // E_x (mu_hat - mu*)^2 / (nu_hat + nu*)
  double weighted_l2_se;
  double d2_mix;          // d(p_hat_A, p*)^2
  double d2_se;
  double excess_risk;     // E P*(C_hat != y) - L*
  double excess_se;
  double bayes_error;
  bool l2_pass;     // weighted_l2 <= 2 d2 + 3 se
  bool class_pass;  // excess <= 4 d + 3 se
};
RegressionClassificationReport regression_classification_checks(const MixtureDensity& mix,
                                                                const GlmFamily& fam,
                                                                const TrueModel& truth,
                                                                const XSample& xs);

}  // namespace bvsglm
