#pragma once

#include <Eigen/Dense>
#include <vector>

#include "bvsglm/estimators.hpp"
#include "bvsglm/hellinger.hpp"
#include "bvsglm/posterior.hpp"

namespace bvsglm {

/// Gaussian graphical truth: a precision matrix with unit implied variances.
/// Node j regressed on the rest has coefficients -Theta_jk/Theta_jj and
/// residual variance 1/Theta_jj.
struct GraphTruth {
  Eigen::MatrixXd precision;  // J x J, SPD

  int J() const { return static_cast<int>(precision.rows()); }
  Eigen::MatrixXd covariance() const;
  Eigen::VectorXd regression_coeffs(int j) const;  // length J-1, other nodes in index order
  double residual_variance(int j) const;
  void validate() const;  // SPD, symmetric, implied diagonal of covariance = 1 within 1e-8

  /// AR(1)-correlation truth: covariance rho^|i-j|, a sparse chain precision.
  static GraphTruth chain(int J, double rho);
  static GraphTruth from_precision(Eigen::MatrixXd prec);
};

Eigen::MatrixXd sample_graph_data(const GraphTruth& truth, int n, Rng& rng);

/// Per-column affine transform recorded by standardization.
struct ColumnTransform {
  Eigen::VectorXd center;
  Eigen::VectorXd scale;
  double clip_rate = 0.0;  // fraction of entries clipped to [-1,1] after scaling
};

/// Center/scale all columns to mean 0 variance 1, then clip to [-1,1].
ColumnTransform standardize_columns(Eigen::MatrixXd& data);

struct NeighborhoodFit {
  Chain chain;
  ColumnTransform transform;
  std::vector<int> covariate_nodes;  // covariate column -> original node index
};

/// Regress node j on the remaining columns with the unknown-dispersion
/// normal prior; conjugate marginalized sampler.
NeighborhoodFit neighborhood_select(const Eigen::MatrixXd& data, int j, const PriorSpec& spec,
                                    const McmcConfig& config);

/// MC average over x_{-j} of the squared Hellinger between the true
/// conditional normal and the fitted mixture of normals, mapped back through
/// the standardization transform; per-x value by Gauss-Hermite quadrature.
HellingerEstimate conditional_hellinger(const GraphTruth& truth, int j, const NeighborhoodFit& fit,
                                        const MixtureDensity& mix, int n_mc, Rng& rng);

enum class EdgeRule { And, Or };

struct GraphEstimate {
  Eigen::MatrixXd inclusion;  // J x J, diagonal 0; row j = inclusion probs from node j's chain
  Eigen::MatrixXi adjacency_and;
  Eigen::MatrixXi adjacency_or;
  Eigen::VectorXd h_hat;
  double threshold = 0.5;
};

GraphEstimate build_graph(const std::vector<NeighborhoodFit>& fits, double threshold);

}  // namespace bvsglm
