#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <vector>

namespace bvsglm {

struct QuadRule {
  Eigen::VectorXd nodes;
  Eigen::VectorXd weights;
};

/// Gauss rules via Golub-Welsch on the Jacobi matrix.
inline QuadRule golub_welsch(const Eigen::VectorXd& diag, const Eigen::VectorXd& offdiag,
                             double mu0) {
  int n = static_cast<int>(diag.size());
  Eigen::MatrixXd J = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    J(i, i) = diag(i);
    if (i + 1 < n) J(i, i + 1) = J(i + 1, i) = offdiag(i);
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(J);
  QuadRule r;
  r.nodes = es.eigenvalues();
  r.weights.resize(n);
  for (int i = 0; i < n; ++i) {
    double v = es.eigenvectors()(0, i);
    r.weights(i) = mu0 * v * v;
  }
  return r;
}

/// Gauss-Hermite, weight e^{-t^2} on (-inf, inf).
inline QuadRule gauss_hermite(int n) {
  Eigen::VectorXd d = Eigen::VectorXd::Zero(n), o(n - 1);
  for (int i = 1; i < n; ++i) o(i - 1) = std::sqrt(i / 2.0);
  return golub_welsch(d, o, std::sqrt(M_PI));
}

/// Gauss-Laguerre, weight e^{-t} on (0, inf).
inline QuadRule gauss_laguerre(int n) {
  Eigen::VectorXd d(n), o(n - 1);
  for (int i = 0; i < n; ++i) d(i) = 2.0 * i + 1.0;
  for (int i = 1; i < n; ++i) o(i - 1) = double(i);
  return golub_welsch(d, o, 1.0);
}

}  // namespace bvsglm
