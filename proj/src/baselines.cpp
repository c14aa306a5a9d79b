#include "bvsglm/baselines.hpp"

#include <cmath>
#include <stdexcept>

namespace bvsglm {

Dataset simulate_counterexample(int n, int K, Rng& rng) {
  if (K < 1 || n < 1) throw std::invalid_argument("n and K must be positive");
  Dataset d{Eigen::MatrixXd::Zero(n, K), Eigen::VectorXd(n), GlmFamily::normal_known_var(1.0)};
  std::uniform_int_distribution<int> pick(0, K - 1);
  std::normal_distribution<double> z(0.0, 1.0);
  for (int i = 0; i < n; ++i) {
    d.X(i, pick(rng)) = 1.0;
    d.y(i) = z(rng);
  }
  return d;
}

CoordinatePosterior full_model_posterior(const Dataset& data) {
  int n = data.n(), K = data.K();
  CoordinatePosterior post{Eigen::VectorXd::Zero(K), Eigen::VectorXd::Ones(K)};
  for (int j = 0; j < K; ++j) {
    double m = 0.0, s = 0.0;
    for (int i = 0; i < n; ++i) {
      m += data.X(i, j);
      s += data.y(i) * data.X(i, j);
    }
    post.mean(j) = s / (1.0 + m);
    post.variance(j) = 1.0 / (1.0 + m);
  }
  return post;
}

double indicator_design_sq_distance(const Eigen::VectorXd& beta) {
  double s = 0.0;
  for (int j = 0; j < beta.size(); ++j) s += 1.0 - std::exp(-beta(j) * beta(j) / 8.0);
  return 2.0 * s / beta.size();
}

ChebyshevResult chebyshev_check(int n, long posterior_draws, Rng& rng) {
  if (posterior_draws < 10000) throw std::invalid_argument("need at least 10^4 posterior draws");
  const int K = 2 * n;
  const double eta = 0.5 - 1.0 / std::sqrt(5.0);
  ChebyshevResult res;
  res.eta = eta;
  res.bound = 1.0 - 1.0 / (eta * eta * n);
  res.vacuous = eta * eta * n <= 1.0;

  Dataset data = simulate_counterexample(n, K, rng);
  CoordinatePosterior post = full_model_posterior(data);
  Eigen::VectorXd sd = post.variance.cwiseSqrt();

  std::normal_distribution<double> z(0.0, 1.0);
  const double thr = eta;  // compare d^2 >= eta, i.e. d >= sqrt(eta)
  long hits = 0;
  for (long t = 0; t < posterior_draws; ++t) {
    double s = 0.0;
    for (int j = 0; j < K; ++j) {
      double b = post.mean(j) + sd(j) * z(rng);
      s += 1.0 - std::exp(-b * b / 8.0);
    }
    if (2.0 * s / K >= thr) ++hits;
  }
  res.empirical_tail = double(hits) / double(posterior_draws);
  double se = std::sqrt(std::max(res.empirical_tail * (1.0 - res.empirical_tail), 1e-12) /
                        double(posterior_draws));
  res.pass = res.vacuous || res.empirical_tail >= res.bound - 3.0 * se;
  return res;
}

std::vector<Eigen::VectorXd> full_model_normal_baseline(const Dataset& data, double slab_scale,
                                                        Rng& rng, int draws) {
  if (data.family.kind != FamilyKind::NormalKnownVar)
    throw std::invalid_argument("baseline requires the known-variance normal family");
  int n = data.n(), K = data.K();
  if (K > 5000) throw std::invalid_argument("full-model baseline guard: K > 5000");
  double phi = data.family.dispersion;
  Eigen::MatrixXd A = phi * (data.X.transpose() * data.X) +
                      (1.0 / slab_scale) * Eigen::MatrixXd::Identity(K, K);
  Eigen::LLT<Eigen::MatrixXd> llt(A);
  Eigen::VectorXd m = llt.solve(phi * data.X.transpose() * data.y);
  (void)n;
  std::normal_distribution<double> z(0.0, 1.0);
  std::vector<Eigen::VectorXd> out;
  out.reserve(draws);
  Eigen::VectorXd zz(K);
  for (int t = 0; t < draws; ++t) {
    for (int j = 0; j < K; ++j) zz(j) = z(rng);
    out.push_back(m + llt.matrixU().solve(zz));
  }
  return out;
}

}  // namespace bvsglm
