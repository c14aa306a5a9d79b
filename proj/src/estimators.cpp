#include "bvsglm/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

#include "bvsglm/quadrature.hpp"

namespace bvsglm {

namespace {

constexpr double kLog2Pi = 1.8378770664093453;

double logsumexp(const std::vector<double>& v) {
  double m = -std::numeric_limits<double>::infinity();
  for (double x : v) m = std::max(m, x);
  if (!std::isfinite(m)) return m;
  double s = 0.0;
  for (double x : v) s += std::exp(x - m);
  return m + std::log(s);
}

// component linear parameters at every x point: H(i,k) = x_i' beta_k
Eigen::MatrixXd component_h(const MixtureDensity& mix, const XSample& xs) {
  Eigen::MatrixXd H(xs.size(), mix.components.size());
  for (std::size_t k = 0; k < mix.components.size(); ++k) {
    const auto& c = mix.components[k];
    Eigen::VectorXd h = Eigen::VectorXd::Zero(xs.size());
    for (int i = 0; i < c.gamma.size(); ++i) h += c.beta(i) * xs.points.col(c.gamma.included[i]);
    H.col(k) = h;
  }
  return H;
}

// integral of sqrt(p_hat p*) at one x
double mixture_affinity_at_x(const MixtureDensity& mix, const GlmFamily& fam,
                             const TrueModel& truth, double h_star,
                             const Eigen::RowVectorXd& h_comps) {
  const int m = static_cast<int>(mix.components.size());
  if (fam.is_binary() && truth.family.is_binary()) {
    double mu_hat = 0.0;
    for (int k = 0; k < m; ++k) mu_hat += mix.weights(k) * mean(fam, h_comps(k));
    double mu_star = mean(truth.family, h_star);
    return std::sqrt(mu_hat * mu_star) + std::sqrt((1.0 - mu_hat) * (1.0 - mu_star));
  }
  if (fam.is_normal() && truth.family.is_normal()) {
    static const QuadRule gh = gauss_hermite(64);
    double phi_star = truth.phi_star();
    double sd_star = 1.0 / std::sqrt(phi_star);
    double acc = 0.0;
    std::vector<double> lp(m);
    for (int q = 0; q < gh.nodes.size(); ++q) {
      double y = h_star + std::sqrt(2.0) * sd_star * gh.nodes(q);
      for (int k = 0; k < m; ++k) {
        double phi_k = mix.components[k].phi ? *mix.components[k].phi : fam.dispersion;
        double r = y - h_comps(k);
        lp[k] = std::log(mix.weights(k)) - 0.5 * phi_k * r * r + 0.5 * std::log(phi_k) -
                0.5 * kLog2Pi;
      }
      double log_phat = logsumexp(lp);
      double rs = y - h_star;
      double log_pstar = -0.5 * phi_star * rs * rs + 0.5 * std::log(phi_star) - 0.5 * kLog2Pi;
      acc += gh.weights(q) * std::exp(0.5 * (log_phat - log_pstar));
    }
    return acc / std::sqrt(M_PI);
  }
  if (fam.kind == FamilyKind::Poisson && truth.family.kind == FamilyKind::Poisson) {
    double mu_star = std::exp(h_star);
    double mu_max = mu_star;
    for (int k = 0; k < m; ++k) mu_max = std::max(mu_max, std::exp(h_comps(k)));
    long y_max = static_cast<long>(mu_max + 12.0 * std::sqrt(mu_max) + 25.0);
    double acc = 0.0;
    std::vector<double> lp(m);
    for (long y = 0; y <= y_max; ++y) {
      double lfact = std::lgamma(double(y) + 1.0);
      for (int k = 0; k < m; ++k)
        lp[k] = std::log(mix.weights(k)) + h_comps(k) * y - std::exp(h_comps(k)) - lfact;
      double log_phat = logsumexp(lp);
      double log_pstar = h_star * y - mu_star - lfact;
      acc += std::exp(0.5 * (log_phat + log_pstar));
    }
    return acc;
  }
  if (fam.kind == FamilyKind::ExponentialLogLink &&
      truth.family.kind == FamilyKind::ExponentialLogLink) {
    static const QuadRule gl = gauss_laguerre(64);
    double mu_star = std::exp(h_star);
    double acc = 0.0;
    std::vector<double> lp(m);
    for (int q = 0; q < gl.nodes.size(); ++q) {
      double y = mu_star * gl.nodes(q);
      for (int k = 0; k < m; ++k)
        lp[k] = std::log(mix.weights(k)) - std::exp(-h_comps(k)) * y - h_comps(k);
      double log_phat = logsumexp(lp);
      double log_pstar = -y / mu_star - h_star;
      acc += gl.weights(q) * std::exp(0.5 * (log_phat - log_pstar));
    }
    return acc;
  }
  throw std::invalid_argument("unsupported family pair for mixture Hellinger");
}

}  // namespace

MixtureDensity select(const Chain& chain, const SelectionRule& rule, int K) {
  if (chain.draws.empty()) throw std::invalid_argument("empty chain");
  std::vector<std::size_t> keep;
  switch (rule.kind) {
    case SelectionKind::All:
      for (std::size_t i = 0; i < chain.draws.size(); ++i) keep.push_back(i);
      break;
    case SelectionKind::BestM: {
      if (rule.m < 1) throw std::invalid_argument("BestM needs m >= 1");
      std::map<ModelIndicator, long> counts;
      for (const auto& d : chain.draws) ++counts[d.gamma];
      // most frequent first; ties by lexicographic gamma order
      std::vector<std::pair<ModelIndicator, long>> ranked(counts.begin(), counts.end());
      std::stable_sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second > b.second;
        return a.first < b.first;
      });
      std::size_t top = std::min<std::size_t>(rule.m, ranked.size());
      std::vector<ModelIndicator> best;
      for (std::size_t i = 0; i < top; ++i) best.push_back(ranked[i].first);
      for (std::size_t i = 0; i < chain.draws.size(); ++i)
        if (std::find(best.begin(), best.end(), chain.draws[i].gamma) != best.end())
          keep.push_back(i);
      break;
    }
    case SelectionKind::InclusionThreshold: {
      if (!(rule.t > 0.0 && rule.t < 1.0))
        throw std::invalid_argument("inclusion threshold must lie in (0,1)");
      Eigen::VectorXd incl = inclusion_probabilities(chain, K);
      for (std::size_t i = 0; i < chain.draws.size(); ++i) {
        for (int j : chain.draws[i].gamma.included)
          if (incl(j) > rule.t) {
            keep.push_back(i);
            break;
          }
      }
      if (keep.empty()) {
        double mx = incl.size() > 0 ? incl.maxCoeff() : 0.0;
        throw std::runtime_error("selection rule retains nothing; max inclusion probability is " +
                                 std::to_string(mx));
      }
      break;
    }
  }
  if (keep.empty()) throw std::runtime_error("selection rule retains nothing");
  MixtureDensity mix;
  mix.components.reserve(keep.size());
  for (std::size_t i : keep) mix.components.push_back(chain.draws[i]);
  mix.weights = Eigen::VectorXd::Constant(keep.size(), 1.0 / keep.size());
  mix.selection_prob = double(keep.size()) / double(chain.draws.size());
  return mix;
}

double mean_estimate(const MixtureDensity& mix, const GlmFamily& fam, const Eigen::VectorXd& x) {
  double out = 0.0;
  for (std::size_t k = 0; k < mix.components.size(); ++k) {
    const auto& c = mix.components[k];
    double h = 0.0;
    for (int i = 0; i < c.gamma.size(); ++i) h += c.beta(i) * x(c.gamma.included[i]);
    out += mix.weights(k) * mean(fam, h);
  }
  return out;
}

int classify(const MixtureDensity& mix, const GlmFamily& fam, const Eigen::VectorXd& x) {
  if (!fam.is_binary()) throw std::invalid_argument("classify requires a binary family");
  return mean_estimate(mix, fam, x) > 0.5 ? 1 : 0;
}

HellingerEstimate mixture_hellinger(const MixtureDensity& mix, const GlmFamily& fam,
                                    const TrueModel& truth, const XSample& xs) {
  Eigen::MatrixXd H = component_h(mix, xs);
  Eigen::VectorXd h_star = xs.points * truth.beta_star;
  Eigen::VectorXd d2(xs.size());
  for (int i = 0; i < xs.size(); ++i)
    d2(i) = 2.0 - 2.0 * mixture_affinity_at_x(mix, fam, truth, h_star(i), H.row(i));
  HellingerEstimate est;
  est.n_x = xs.size();
  est.exact = xs.exact;
  double m = std::clamp(d2.dot(xs.weights), 0.0, 2.0);
  est.value = std::sqrt(m);
  if (!xs.exact) {
    double var = 0.0;
    for (int i = 0; i < d2.size(); ++i) {
      double r = d2(i) - m;
      var += xs.weights(i) * r * r;
    }
    est.se = std::sqrt(var / xs.size());  // se on d^2 here
  }
  return est;
}

ConvexityBound convexity_bound_check(const MixtureDensity& mix, const GlmFamily& fam,
                                     const TrueModel& truth,
                                     const std::vector<double>& retained_distances, double eps,
                                     const XSample& xs) {
  if (retained_distances.size() != mix.components.size())
    throw std::invalid_argument("distances must align with retained draws");
  HellingerEstimate est = mixture_hellinger(mix, fam, truth, xs);
  ConvexityBound out;
  out.lhs = est.value * est.value;
  out.lhs_se = est.se;
  out.rhs = eps * eps + 2.0 * tail_probability(retained_distances, eps) / mix.selection_prob;
  out.pass = out.lhs <= out.rhs + 3.0 * out.lhs_se;
  return out;
}

RegressionClassificationReport regression_classification_checks(const MixtureDensity& mix,
                                                                const GlmFamily& fam,
                                                                const TrueModel& truth,
                                                                const XSample& xs) {
  if (!fam.is_binary() || !truth.family.is_binary())
    throw std::invalid_argument("classification checks require binary families");
  Eigen::MatrixXd H = component_h(mix, xs);
  Eigen::VectorXd h_star = xs.points * truth.beta_star;

  int m_x = xs.size();
  Eigen::VectorXd l2(m_x), excess(m_x), d2(m_x);
  double bayes = 0.0;
  for (int i = 0; i < m_x; ++i) {
    double mu_star = mean(truth.family, h_star(i));
    double mu_hat = 0.0;
    for (std::size_t k = 0; k < mix.components.size(); ++k)
      mu_hat += mix.weights(k) * mean(fam, H(i, k));
    double nu_star = mu_star, nu_hat = mu_hat;  // y^2 = y for binary
    double diff = mu_hat - mu_star;
    l2(i) = diff * diff / (nu_hat + nu_star);
    int c_hat = mu_hat > 0.5 ? 1 : 0;
    double risk = c_hat == 1 ? 1.0 - mu_star : mu_star;
    double lstar = std::min(mu_star, 1.0 - mu_star);
    excess(i) = risk - lstar;
    bayes += xs.weights(i) * lstar;
    d2(i) = 2.0 - 2.0 * mixture_affinity_at_x(mix, fam, truth, h_star(i), H.row(i));
  }
  auto mean_se = [&](const Eigen::VectorXd& v) {
    double m = v.dot(xs.weights);
    double var = 0.0;
    for (int i = 0; i < v.size(); ++i) {
      double r = v(i) - m;
      var += xs.weights(i) * r * r;
    }
    return std::pair<double, double>(m, xs.exact ? 0.0 : std::sqrt(var / v.size()));
  };
  RegressionClassificationReport rep;
  auto [l2m, l2se] = mean_se(l2);
  auto [exm, exse] = mean_se(excess);
  auto [d2m, d2se] = mean_se(d2);
  rep.weighted_l2 = l2m;
  rep.weighted_l2_se = l2se;
  rep.excess_risk = exm;
  rep.excess_se = exse;
  rep.d2_mix = std::clamp(d2m, 0.0, 2.0);
  rep.d2_se = d2se;
  rep.bayes_error = bayes;
  double comb_l2 = std::sqrt(l2se * l2se + 4.0 * d2se * d2se);
  rep.l2_pass = rep.weighted_l2 <= 2.0 * rep.d2_mix + 3.0 * comb_l2;
  double d_mix = std::sqrt(rep.d2_mix);
  double comb_cl = std::sqrt(exse * exse + 4.0 * d2se * d2se);
  rep.class_pass = rep.excess_risk <= 4.0 * d_mix + 3.0 * comb_cl;
  return rep;
}

}  // namespace bvsglm
