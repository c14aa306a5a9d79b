#pragma once

#include <Eigen/Dense>
#include <optional>
#include <vector>

#include "bvsglm/rng.hpp"

namespace bvsglm {

/// Subset of included covariate indices (0-based, sorted, distinct).
struct ModelIndicator {
  std::vector<int> included;
  int K = 0;

  ModelIndicator() = default;
  ModelIndicator(std::vector<int> idx, int total);

  int size() const { return static_cast<int>(included.size()); }
  bool contains(int j) const;
  bool operator==(const ModelIndicator& o) const { return K == o.K && included == o.included; }
  bool operator<(const ModelIndicator& o) const { return included < o.included; }
};

struct VPolicyIdentity {
  double c = 1.0;
};
struct VPolicyAr1 {
  double c = 1.0;
  double rho = 0.0;  // in (-1,1)
};

enum class VPolicyKind { IdentityScale, Ar1 };

struct VPolicy {
  VPolicyKind kind = VPolicyKind::IdentityScale;
  double c = 1.0;
  double rho = 0.0;

  static VPolicy identity_scale(double c) { return {VPolicyKind::IdentityScale, c, 0.0}; }
  static VPolicy ar1(double c, double rho) { return {VPolicyKind::Ar1, c, rho}; }
};

struct DispersionPrior {
  double kappa;  // gamma shape
  double rate;   // gamma rate
};

/// Truncated-Bernoulli model prior plus Gaussian slab N(0, V_gamma).
struct PriorSpec {
  int r_exp = 1;  // prior expected size before truncation
  int r_max = 1;  // size cap
  VPolicy v_policy;
  std::optional<DispersionPrior> dispersion;
  // Declared eigenvalue-growth bound H(size) <= eig_B * size^eig_v (policy metadata).
  double eig_B = 1.0;
  double eig_v = 1.0;

  void validate(int K) const;
  double lambda(int K) const { return static_cast<double>(r_exp) / K; }
};

/// Slab covariance for a model of the given size.
Eigen::MatrixXd slab_covariance(const VPolicy& policy, int size);

struct VPolicyBounds {
  double ch1_V;     // largest eigenvalue of V
  double ch1_Vinv;  // largest eigenvalue of V^{-1}
  double H;         // max of the two
};
VPolicyBounds v_policy_bounds(const PriorSpec& spec, int size);

/// ln pi(gamma), normalized over the truncated support.  nullopt when
/// |gamma| > r_max (out of support, distinct from underflow).
std::optional<double> log_prior_model(const PriorSpec& spec, const ModelIndicator& gamma);

/// Truncated model prior in log space for (possibly huge) real-valued K.
/// size/r_exp/r_max as reals; loop over the binomial tail is exact.
double log_truncated_model_prior(double K, double r_exp, double r_max, double size);

/// ln N(beta; 0, [phi^{-1}]V_gamma)  (+ gamma log density of phi when the
/// dispersion prior is modeled).
double log_prior_coeffs(const PriorSpec& spec, const ModelIndicator& gamma,
                        const Eigen::VectorXd& beta, std::optional<double> phi = std::nullopt);

/// Conditional slab law of one coordinate given the others under N(0, V).
struct ConditionalSlab {
  double mean;
  double var;
};
ConditionalSlab conditional_slab(const VPolicy& policy, int size, int coord,
                                 const Eigen::VectorXd& others, double phi = 1.0);

struct PriorDraw {
  ModelIndicator gamma;
  Eigen::VectorXd beta;
  std::optional<double> phi;
};
PriorDraw sample_prior(const PriorSpec& spec, int K, Rng& rng);

double log_gamma_density(double x, double shape, double rate);

}  // namespace bvsglm
