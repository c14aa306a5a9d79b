#pragma once

#include <Eigen/Dense>
#include <optional>
#include <vector>

#include "bvsglm/posterior.hpp"

namespace bvsglm {

enum class XLawKind { IndicatorDesign, UniformCube, GaussianGraph };

struct XLaw {
  XLawKind kind = XLawKind::UniformCube;
  int K = 0;
  Eigen::MatrixXd precision;  // GaussianGraph only (K x K, SPD)

  static XLaw indicator_design(int K) { return {XLawKind::IndicatorDesign, K, {}}; }
  static XLaw uniform_cube(int K) { return {XLawKind::UniformCube, K, {}}; }
  static XLaw gaussian_graph(Eigen::MatrixXd prec);
};

/// Data-generating truth: family, beta*, x-law, and the true dispersion when
/// the family leaves it free.
struct TrueModel {
  GlmFamily family;
  Eigen::VectorXd beta_star;
  XLaw x_law;
  std::optional<double> dispersion_star;

  int K() const { return static_cast<int>(beta_star.size()); }
  double sum_abs_beta() const { return beta_star.cwiseAbs().sum(); }
  double phi_star() const;
};

/// Frozen x-sample: exact support points with weights, or MC draws.
struct XSample {
  Eigen::MatrixXd points;   // m x K
  Eigen::VectorXd weights;  // sums to 1
  bool exact = false;

  int size() const { return static_cast<int>(points.rows()); }
};

XSample exact_support(const TrueModel& truth);  // IndicatorDesign only
XSample draw_x_sample(const TrueModel& truth, int n_draws, Rng& rng);
/// Exact support when available, otherwise n_draws MC points.
XSample make_x_sample(const TrueModel& truth, int n_draws, Rng& rng);

struct HellingerEstimate {
  double value = 0.0;  // d(p, p*) in [0, sqrt(2)]
  double se = 0.0;     // MC standard error on d (0 for exact-discrete)
  int n_x = 0;
  bool exact = false;
};

/// Per-x Hellinger affinity between the true density at h_star and a fitted
/// density at h_cand (possibly from a different link / dispersion).
double per_x_affinity(const TrueModel& truth, double h_star, const GlmFamily& cand_family,
                      double h_cand, std::optional<double> cand_phi);

HellingerEstimate hellinger_distance(const TrueModel& truth, const GlmFamily& cand_family,
                                     const ModelIndicator& gamma, const Eigen::VectorXd& beta,
                                     std::optional<double> cand_phi, const XSample& xs);

/// Full-coefficient-vector candidate (no selection).
HellingerEstimate hellinger_distance_full(const TrueModel& truth, const GlmFamily& cand_family,
                                          const Eigen::VectorXd& beta_full,
                                          std::optional<double> cand_phi, const XSample& xs);

/// Per-draw distances over a chain, common x points across draws.
std::vector<HellingerEstimate> posterior_hellinger(const Chain& chain, const TrueModel& truth,
                                                   const GlmFamily& cand_family, const XSample& xs);

/// Fraction of the sequence strictly exceeding eps.
double tail_probability(const std::vector<double>& distances, double eps);

double median(std::vector<double> v);
double quantile(std::vector<double> v, double q);

}  // namespace bvsglm
