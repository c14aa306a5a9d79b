#include "bvsglm/prior.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace bvsglm {

namespace {

constexpr double kLog2Pi = 1.8378770664093453;

double log_choose(double n, double k) {
  return std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0);
}

double logsumexp_pair(double a, double b) {
  if (a < b) std::swap(a, b);
  return a + std::log1p(std::exp(b - a));
}

}  // namespace

ModelIndicator::ModelIndicator(std::vector<int> idx, int total) : included(std::move(idx)), K(total) {
  std::sort(included.begin(), included.end());
  for (std::size_t i = 0; i < included.size(); ++i) {
    if (included[i] < 0 || included[i] >= K) throw std::domain_error("model index out of range");
    if (i > 0 && included[i] == included[i - 1]) throw std::domain_error("duplicate model index");
  }
}

bool ModelIndicator::contains(int j) const {
  return std::binary_search(included.begin(), included.end(), j);
}

void PriorSpec::validate(int K) const {
  if (!(1 <= r_exp && r_exp <= r_max && r_max < K))
    throw std::invalid_argument("prior requires 1 <= r_exp <= r_max < K");
  if (!(v_policy.c > 0.0)) throw std::invalid_argument("slab scale c must be positive");
  if (v_policy.kind == VPolicyKind::Ar1 && !(std::abs(v_policy.rho) < 1.0))
    throw std::invalid_argument("AR1 rho must be in (-1,1)");
  if (dispersion && (!(dispersion->kappa > 0.0) || !(dispersion->rate > 0.0)))
    throw std::invalid_argument("dispersion prior parameters must be positive");
}

Eigen::MatrixXd slab_covariance(const VPolicy& policy, int size) {
  Eigen::MatrixXd V(size, size);
  if (policy.kind == VPolicyKind::IdentityScale) {
    V = policy.c * Eigen::MatrixXd::Identity(size, size);
  } else {
    for (int i = 0; i < size; ++i)
      for (int j = 0; j < size; ++j) V(i, j) = policy.c * std::pow(policy.rho, std::abs(i - j));
  }
  return V;
}

VPolicyBounds v_policy_bounds(const PriorSpec& spec, int size) {
  if (size < 1) throw std::invalid_argument("size must be >= 1");
  const VPolicy& p = spec.v_policy;
  if (p.kind == VPolicyKind::IdentityScale) {
    return {p.c, 1.0 / p.c, std::max(p.c, 1.0 / p.c)};
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(slab_covariance(p, size));
  double lo = es.eigenvalues().minCoeff();
  double hi = es.eigenvalues().maxCoeff();
  return {hi, 1.0 / lo, std::max(hi, 1.0 / lo)};
}

double log_truncated_model_prior(double K, double r_exp, double r_max, double size) {
  double lam = r_exp / K;
  double llam = std::log(lam), l1m = std::log1p(-lam);
  // Z = sum_{r<=r_max} C(K,r) lam^r (1-lam)^{K-r}, exact binomial tail
  double logZ = -std::numeric_limits<double>::infinity();
  for (double r = 0; r <= r_max; ++r) {
    double t = log_choose(K, r) + r * llam + (K - r) * l1m;
    logZ = logsumexp_pair(logZ, t);
  }
  return size * llam + (K - size) * l1m - logZ;
}

std::optional<double> log_prior_model(const PriorSpec& spec, const ModelIndicator& gamma) {
  spec.validate(gamma.K);
  if (gamma.size() > spec.r_max) return std::nullopt;
  return log_truncated_model_prior(gamma.K, spec.r_exp, spec.r_max, gamma.size());
}

double log_prior_coeffs(const PriorSpec& spec, const ModelIndicator& gamma,
                        const Eigen::VectorXd& beta, std::optional<double> phi) {
  if (beta.size() != gamma.size()) throw std::invalid_argument("beta/gamma dimension mismatch");
  if (static_cast<bool>(phi) != static_cast<bool>(spec.dispersion))
    throw std::invalid_argument("phi must be present iff the dispersion prior is modeled");
  double out = 0.0;
  double scale = 1.0;
  if (phi) {
    scale = 1.0 / *phi;  // V -> phi^{-1} V
    out += log_gamma_density(*phi, spec.dispersion->kappa, spec.dispersion->rate);
  }
  int p = gamma.size();
  if (p == 0) return out;
  Eigen::MatrixXd V = scale * slab_covariance(spec.v_policy, p);
  Eigen::LLT<Eigen::MatrixXd> llt(V);
  if (llt.info() != Eigen::Success) throw std::runtime_error("slab covariance not SPD");
  double logdet = 0.0;
  for (int i = 0; i < p; ++i) logdet += 2.0 * std::log(llt.matrixL()(i, i));
  Eigen::VectorXd w = llt.matrixL().solve(beta);
  out += -0.5 * p * kLog2Pi - 0.5 * logdet - 0.5 * w.squaredNorm();
  return out;
}

ConditionalSlab conditional_slab(const VPolicy& policy, int size, int coord,
                                 const Eigen::VectorXd& others, double phi) {
  if (others.size() != size - 1) throw std::invalid_argument("conditional_slab dimension mismatch");
  if (size == 1 || policy.kind == VPolicyKind::IdentityScale)
    return {0.0, policy.c / phi};
  Eigen::MatrixXd V = slab_covariance(policy, size);
  std::vector<int> rest;
  for (int i = 0; i < size; ++i)
    if (i != coord) rest.push_back(i);
  int m = size - 1;
  Eigen::MatrixXd Voo(m, m);
  Eigen::VectorXd vio(m);
  for (int i = 0; i < m; ++i) {
    vio(i) = V(coord, rest[i]);
    for (int j = 0; j < m; ++j) Voo(i, j) = V(rest[i], rest[j]);
  }
  Eigen::VectorXd w = Voo.llt().solve(vio);
  return {w.dot(others), (V(coord, coord) - w.dot(vio)) / phi};
}

PriorDraw sample_prior(const PriorSpec& spec, int K, Rng& rng) {
  spec.validate(K);
  double lam = spec.lambda(K);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<int> idx;
  for (;;) {
    idx.clear();
    for (int j = 0; j < K; ++j)
      if (u(rng) < lam) idx.push_back(j);
    if (static_cast<int>(idx.size()) <= spec.r_max) break;
  }
  PriorDraw draw;
  draw.gamma = ModelIndicator(idx, K);
  if (spec.dispersion) {
    std::gamma_distribution<double> g(spec.dispersion->kappa, 1.0 / spec.dispersion->rate);
    draw.phi = g(rng);
  }
  int p = draw.gamma.size();
  draw.beta = Eigen::VectorXd::Zero(p);
  if (p > 0) {
    double scale = draw.phi ? 1.0 / *draw.phi : 1.0;
    Eigen::MatrixXd V = scale * slab_covariance(spec.v_policy, p);
    Eigen::LLT<Eigen::MatrixXd> llt(V);
    std::normal_distribution<double> z(0.0, 1.0);
    Eigen::VectorXd zz(p);
    for (int i = 0; i < p; ++i) zz(i) = z(rng);
    draw.beta = llt.matrixL() * zz;
  }
  return draw;
}

double log_gamma_density(double x, double shape, double rate) {
  if (!(x > 0.0)) return -std::numeric_limits<double>::infinity();
  return shape * std::log(rate) + (shape - 1.0) * std::log(x) - rate * x - std::lgamma(shape);
}

}  // namespace bvsglm
