#include "bvsglm/graphical.hpp"

#include <cmath>
#include <stdexcept>

#include "bvsglm/quadrature.hpp"

namespace bvsglm {

Eigen::MatrixXd GraphTruth::covariance() const {
  Eigen::LLT<Eigen::MatrixXd> llt(precision);
  if (llt.info() != Eigen::Success) throw std::runtime_error("precision matrix not SPD");
  return llt.solve(Eigen::MatrixXd::Identity(J(), J()));
}

Eigen::VectorXd GraphTruth::regression_coeffs(int j) const {
  int n = J();
  if (j < 0 || j >= n) throw std::invalid_argument("node index out of range");
  Eigen::VectorXd out(n - 1);
  int t = 0;
  for (int k = 0; k < n; ++k)
    if (k != j) out(t++) = -precision(j, k) / precision(j, j);
  return out;
}

double GraphTruth::residual_variance(int j) const { return 1.0 / precision(j, j); }

void GraphTruth::validate() const {
  int n = J();
  if (n < 2) throw std::invalid_argument("graph needs at least two nodes");
  if (!precision.isApprox(precision.transpose(), 1e-10))
    throw std::invalid_argument("precision matrix must be symmetric");
  Eigen::MatrixXd cov = covariance();
  for (int i = 0; i < n; ++i)
    if (std::abs(cov(i, i) - 1.0) > 1e-8)
      throw std::invalid_argument("implied variance of node " + std::to_string(i) +
                                  " is not 1: " + std::to_string(cov(i, i)));
}

GraphTruth GraphTruth::chain(int J, double rho) {
  if (J < 2 || !(std::abs(rho) < 1.0)) throw std::invalid_argument("need J >= 2, |rho| < 1");
  // inverse of the AR(1) correlation matrix rho^|i-j| is tridiagonal
  Eigen::MatrixXd prec = Eigen::MatrixXd::Zero(J, J);
  double s = 1.0 / (1.0 - rho * rho);
  for (int i = 0; i < J; ++i) {
    prec(i, i) = (i == 0 || i == J - 1) ? s : s * (1.0 + rho * rho);
    if (i + 1 < J) prec(i, i + 1) = prec(i + 1, i) = -s * rho;
  }
  GraphTruth g{prec};
  g.validate();
  return g;
}

GraphTruth GraphTruth::from_precision(Eigen::MatrixXd prec) {
  GraphTruth g{std::move(prec)};
  g.validate();
  return g;
}

Eigen::MatrixXd sample_graph_data(const GraphTruth& truth, int n, Rng& rng) {
  if (n < 1) throw std::invalid_argument("n must be positive");
  int J = truth.J();
  Eigen::LLT<Eigen::MatrixXd> llt(truth.covariance());
  std::normal_distribution<double> z(0.0, 1.0);
  Eigen::MatrixXd out(n, J);
  Eigen::VectorXd zz(J);
  for (int i = 0; i < n; ++i) {
    for (int k = 0; k < J; ++k) zz(k) = z(rng);
    out.row(i) = (llt.matrixL() * zz).transpose();
  }
  return out;
}

ColumnTransform standardize_columns(Eigen::MatrixXd& data) {
  int n = static_cast<int>(data.rows()), J = static_cast<int>(data.cols());
  ColumnTransform t;
  t.center.resize(J);
  t.scale.resize(J);
  long clipped = 0;
  for (int j = 0; j < J; ++j) {
    double m = data.col(j).mean();
    double sd = std::sqrt((data.col(j).array() - m).square().mean());
    if (!(sd > 1e-12))
      throw std::invalid_argument("column " + std::to_string(j) + " is constant");
    t.center(j) = m;
    t.scale(j) = sd;
    for (int i = 0; i < n; ++i) {
      double v = (data(i, j) - m) / sd;
      if (v > 1.0) {
        v = 1.0;
        ++clipped;
      } else if (v < -1.0) {
        v = -1.0;
        ++clipped;
      }
      data(i, j) = v;
    }
  }
  t.clip_rate = double(clipped) / (double(n) * J);
  return t;
}

NeighborhoodFit neighborhood_select(const Eigen::MatrixXd& data, int j, const PriorSpec& spec,
                                    const McmcConfig& config) {
  int n = static_cast<int>(data.rows()), J = static_cast<int>(data.cols());
  if (j < 0 || j >= J) throw std::invalid_argument("node index out of range");
  if (!spec.dispersion) throw std::invalid_argument("neighborhood prior needs a dispersion prior");

  NeighborhoodFit fit;
  // response standardized without clipping; covariates standardized then clipped
  Eigen::VectorXd y = data.col(j);
  double ym = y.mean();
  double ysd = std::sqrt((y.array() - ym).square().mean());
  if (!(ysd > 1e-12)) throw std::invalid_argument("column " + std::to_string(j) + " is constant");

  Eigen::MatrixXd X(n, J - 1);
  int t = 0;
  for (int k = 0; k < J; ++k)
    if (k != j) {
      fit.covariate_nodes.push_back(k);
      X.col(t++) = data.col(k);
    }
  fit.transform = standardize_columns(X);
  // carry the response transform in the same structure, appended at the end
  Eigen::VectorXd center(J), scale(J);
  center.head(J - 1) = fit.transform.center;
  scale.head(J - 1) = fit.transform.scale;
  center(J - 1) = ym;
  scale(J - 1) = ysd;
  fit.transform.center = center;
  fit.transform.scale = scale;

  Dataset ds{std::move(X), (y.array() - ym) / ysd, GlmFamily::normal_unknown_var()};
  fit.chain = mcmc_run(ds, spec, config);
  return fit;
}

HellingerEstimate conditional_hellinger(const GraphTruth& truth, int j, const NeighborhoodFit& fit,
                                        const MixtureDensity& mix, int n_mc, Rng& rng) {
  if (n_mc < 2) throw std::invalid_argument("n_mc must be at least 2");
  static const QuadRule gh = gauss_hermite(64);
  int J = truth.J();
  Eigen::VectorXd beta_star = truth.regression_coeffs(j);
  double var_star = truth.residual_variance(j);
  double sd_star = std::sqrt(var_star);

  // marginal law of the other nodes
  Eigen::MatrixXd cov = truth.covariance();
  Eigen::MatrixXd cov_rest(J - 1, J - 1);
  for (int a = 0; a < J - 1; ++a)
    for (int b = 0; b < J - 1; ++b)
      cov_rest(a, b) = cov(fit.covariate_nodes[a], fit.covariate_nodes[b]);
  Eigen::LLT<Eigen::MatrixXd> llt(cov_rest);

  const int m = static_cast<int>(mix.components.size());
  double yc = fit.transform.center(J - 1), ys = fit.transform.scale(J - 1);
  std::vector<double> comp_sd(m), comp_lognorm(m);
  for (int k = 0; k < m; ++k) {
    double phi = mix.components[k].phi ? *mix.components[k].phi : 1.0;
    comp_sd[k] = ys / std::sqrt(phi);
    comp_lognorm[k] = -std::log(comp_sd[k]) - 0.5 * std::log(2.0 * M_PI);
  }

  std::normal_distribution<double> z(0.0, 1.0);
  Eigen::VectorXd zz(J - 1), x(J - 1), zstd(J - 1);
  std::vector<double> lp(m), comp_mean(m);
  double sum_d2 = 0.0, sum_d2_sq = 0.0;
  for (int t = 0; t < n_mc; ++t) {
    for (int a = 0; a < J - 1; ++a) zz(a) = z(rng);
    x = llt.matrixL() * zz;
    double m_star = beta_star.dot(x);
    // fitted mixture sees the standardized, clipped covariates
    for (int a = 0; a < J - 1; ++a)
      zstd(a) = std::clamp((x(a) - fit.transform.center(a)) / fit.transform.scale(a), -1.0, 1.0);
    for (int k = 0; k < m; ++k) {
      const auto& c = mix.components[k];
      double h = 0.0;
      for (int i = 0; i < c.gamma.size(); ++i) h += c.beta(i) * zstd(c.gamma.included[i]);
      comp_mean[k] = yc + ys * h;
    }
    double aff = 0.0;
    for (int q = 0; q < gh.nodes.size(); ++q) {
      double y = m_star + std::sqrt(2.0) * sd_star * gh.nodes(q);
      for (int k = 0; k < m; ++k) {
        double r = (y - comp_mean[k]) / comp_sd[k];
        lp[k] = std::log(mix.weights(k)) - 0.5 * r * r + comp_lognorm[k];
      }
      double mx = *std::max_element(lp.begin(), lp.end());
      double s = 0.0;
      for (double v : lp) s += std::exp(v - mx);
      double log_phat = mx + std::log(s);
      double rs = (y - m_star) / sd_star;
      double log_pstar = -0.5 * rs * rs - std::log(sd_star) - 0.5 * std::log(2.0 * M_PI);
      aff += gh.weights(q) * std::exp(0.5 * (log_phat - log_pstar));
    }
    aff /= std::sqrt(M_PI);
    double d2 = std::clamp(2.0 - 2.0 * aff, 0.0, 2.0);
    sum_d2 += d2;
    sum_d2_sq += d2 * d2;
  }
  double mean_d2 = sum_d2 / n_mc;
  double var_d2 = std::max(sum_d2_sq / n_mc - mean_d2 * mean_d2, 0.0);
  HellingerEstimate est;
  est.n_x = n_mc;
  est.exact = false;
  est.value = std::sqrt(mean_d2);
  double se_d2 = std::sqrt(var_d2 / n_mc);
  est.se = se_d2 / (2.0 * std::max(est.value, 1e-8));
  return est;
}

GraphEstimate build_graph(const std::vector<NeighborhoodFit>& fits, double threshold) {
  if (!(threshold > 0.0 && threshold < 1.0))
    throw std::invalid_argument("edge threshold must lie in (0,1)");
  int J = static_cast<int>(fits.size());
  if (J < 2) throw std::invalid_argument("need at least two per-node fits");
  GraphEstimate g;
  g.threshold = threshold;
  g.inclusion = Eigen::MatrixXd::Zero(J, J);
  g.h_hat = Eigen::VectorXd::Zero(J);
  for (int j = 0; j < J; ++j) {
    Eigen::VectorXd incl = inclusion_probabilities(fits[j].chain, J - 1);
    for (int a = 0; a < J - 1; ++a) g.inclusion(j, fits[j].covariate_nodes[a]) = incl(a);
  }
  g.adjacency_and = Eigen::MatrixXi::Zero(J, J);
  g.adjacency_or = Eigen::MatrixXi::Zero(J, J);
  for (int j = 0; j < J; ++j)
    for (int k = j + 1; k < J; ++k) {
      bool jk = g.inclusion(j, k) > threshold, kj = g.inclusion(k, j) > threshold;
      g.adjacency_or(j, k) = g.adjacency_or(k, j) = (jk || kj) ? 1 : 0;
      g.adjacency_and(j, k) = g.adjacency_and(k, j) = (jk && kj) ? 1 : 0;
    }
  return g;
}

}  // namespace bvsglm
