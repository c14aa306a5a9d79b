#include "bvsglm/hellinger.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace bvsglm {

XLaw XLaw::gaussian_graph(Eigen::MatrixXd prec) {
  if (prec.rows() != prec.cols()) throw std::invalid_argument("precision must be square");
  XLaw law;
  law.kind = XLawKind::GaussianGraph;
  law.K = static_cast<int>(prec.rows());
  law.precision = std::move(prec);
  return law;
}

double TrueModel::phi_star() const {
  if (family.kind == FamilyKind::NormalUnknownVar) {
    if (!dispersion_star) throw std::invalid_argument("truth requires dispersion_star");
    return *dispersion_star;
  }
  return family.dispersion;
}

XSample exact_support(const TrueModel& truth) {
  if (truth.x_law.kind != XLawKind::IndicatorDesign)
    throw std::invalid_argument("exact support only for the indicator design");
  int K = truth.K();
  XSample xs;
  xs.points = Eigen::MatrixXd::Identity(K, K);
  xs.weights = Eigen::VectorXd::Constant(K, 1.0 / K);
  xs.exact = true;
  return xs;
}

XSample draw_x_sample(const TrueModel& truth, int n_draws, Rng& rng) {
  int K = truth.K();
  XSample xs;
  xs.points.resize(n_draws, K);
  xs.weights = Eigen::VectorXd::Constant(n_draws, 1.0 / n_draws);
  xs.exact = false;
  switch (truth.x_law.kind) {
    case XLawKind::IndicatorDesign: {
      std::uniform_int_distribution<int> pick(0, K - 1);
      xs.points.setZero();
      for (int i = 0; i < n_draws; ++i) xs.points(i, pick(rng)) = 1.0;
      break;
    }
    case XLawKind::UniformCube: {
      std::uniform_real_distribution<double> u(-1.0, 1.0);
      for (int i = 0; i < n_draws; ++i)
        for (int j = 0; j < K; ++j) xs.points(i, j) = u(rng);
      break;
    }
    case XLawKind::GaussianGraph: {
      Eigen::LLT<Eigen::MatrixXd> llt(truth.x_law.precision);
      if (llt.info() != Eigen::Success) throw std::runtime_error("precision not SPD");
      std::normal_distribution<double> z(0.0, 1.0);
      Eigen::VectorXd zz(K);
      for (int i = 0; i < n_draws; ++i) {
        for (int j = 0; j < K; ++j) zz(j) = z(rng);
        // x = L^{-T} z has covariance precision^{-1}
        xs.points.row(i) = llt.matrixU().solve(zz).transpose();
      }
      break;
    }
  }
  return xs;
}

XSample make_x_sample(const TrueModel& truth, int n_draws, Rng& rng) {
  if (truth.x_law.kind == XLawKind::IndicatorDesign) return exact_support(truth);
  return draw_x_sample(truth, n_draws, rng);
}

double per_x_affinity(const TrueModel& truth, double h_star, const GlmFamily& cand_family,
                      double h_cand, std::optional<double> cand_phi) {
  const GlmFamily& tf = truth.family;
  if (tf.is_normal() && cand_family.is_normal()) {
    double phi_c = cand_phi ? *cand_phi : cand_family.dispersion;
    return hellinger_affinity_normal(h_star, truth.phi_star(), h_cand, phi_c);
  }
  if (tf.is_binary() && cand_family.is_binary()) {
    double m1 = mean(tf, h_star), m2 = mean(cand_family, h_cand);
    return std::sqrt(m1 * m2) + std::sqrt((1.0 - m1) * (1.0 - m2));
  }
  if (tf.kind != cand_family.kind)
    throw std::invalid_argument("family mismatch between truth and candidate");
  return hellinger_affinity(tf, h_star, h_cand);
}

namespace {

HellingerEstimate reduce_sq_distances(const Eigen::VectorXd& d2, const XSample& xs) {
  HellingerEstimate est;
  est.n_x = xs.size();
  est.exact = xs.exact;
  double m = d2.dot(xs.weights);
  m = std::clamp(m, 0.0, 2.0);  // float cancellation can push affinity past 1
  est.value = std::sqrt(m);
  if (!xs.exact) {
    double var = 0.0;
    for (int i = 0; i < d2.size(); ++i) {
      double r = d2(i) - m;
      var += xs.weights(i) * r * r;
    }
    double se_d2 = std::sqrt(var / d2.size());
    est.se = se_d2 / (2.0 * std::max(est.value, 1e-8));
  }
  return est;
}

}  // namespace

HellingerEstimate hellinger_distance(const TrueModel& truth, const GlmFamily& cand_family,
                                     const ModelIndicator& gamma, const Eigen::VectorXd& beta,
                                     std::optional<double> cand_phi, const XSample& xs) {
  if (gamma.K != truth.K()) throw std::invalid_argument("candidate dimension mismatch");
  Eigen::VectorXd h_star = xs.points * truth.beta_star;
  Eigen::VectorXd h_cand = Eigen::VectorXd::Zero(xs.size());
  for (int i = 0; i < gamma.size(); ++i) h_cand += beta(i) * xs.points.col(gamma.included[i]);
  Eigen::VectorXd d2(xs.size());
  for (int i = 0; i < xs.size(); ++i)
    d2(i) = 2.0 - 2.0 * per_x_affinity(truth, h_star(i), cand_family, h_cand(i), cand_phi);
  return reduce_sq_distances(d2, xs);
}

HellingerEstimate hellinger_distance_full(const TrueModel& truth, const GlmFamily& cand_family,
                                          const Eigen::VectorXd& beta_full,
                                          std::optional<double> cand_phi, const XSample& xs) {
  Eigen::VectorXd h_star = xs.points * truth.beta_star;
  Eigen::VectorXd h_cand = xs.points * beta_full;
  Eigen::VectorXd d2(xs.size());
  for (int i = 0; i < xs.size(); ++i)
    d2(i) = 2.0 - 2.0 * per_x_affinity(truth, h_star(i), cand_family, h_cand(i), cand_phi);
  return reduce_sq_distances(d2, xs);
}

std::vector<HellingerEstimate> posterior_hellinger(const Chain& chain, const TrueModel& truth,
                                                   const GlmFamily& cand_family, const XSample& xs) {
  if (chain.draws.empty()) throw std::invalid_argument("empty chain");
  std::vector<HellingerEstimate> out;
  out.reserve(chain.draws.size());
  Eigen::VectorXd h_star = xs.points * truth.beta_star;
  for (const auto& d : chain.draws) {
    Eigen::VectorXd h_cand = Eigen::VectorXd::Zero(xs.size());
    for (int i = 0; i < d.gamma.size(); ++i)
      h_cand += d.beta(i) * xs.points.col(d.gamma.included[i]);
    Eigen::VectorXd d2(xs.size());
    for (int i = 0; i < xs.size(); ++i)
      d2(i) = 2.0 - 2.0 * per_x_affinity(truth, h_star(i), cand_family, h_cand(i), d.phi);
    out.push_back(reduce_sq_distances(d2, xs));
  }
  return out;
}

double tail_probability(const std::vector<double>& distances, double eps) {
  if (distances.empty()) throw std::invalid_argument("empty distance sequence");
  if (eps < 0.0) throw std::invalid_argument("eps must be nonnegative");
  long c = std::count_if(distances.begin(), distances.end(), [&](double d) { return d > eps; });
  return double(c) / double(distances.size());
}

double median(std::vector<double> v) { return quantile(std::move(v), 0.5); }

double quantile(std::vector<double> v, double q) {
  if (v.empty()) throw std::invalid_argument("quantile of empty sequence");
  std::sort(v.begin(), v.end());
  double pos = q * (v.size() - 1);
  std::size_t lo = static_cast<std::size_t>(pos);
  std::size_t hi = std::min(lo + 1, v.size() - 1);
  double frac = pos - lo;
  return v[lo] * (1.0 - frac) + v[hi] * frac;
}

}  // namespace bvsglm
