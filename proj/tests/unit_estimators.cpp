#include <cmath>

#include "bvsglm/estimators.hpp"
#include "doctest.h"

using namespace bvsglm;

namespace {

Chain toy_chain(int K) {
  // draws visiting {0}, {0}, {1}, {0,1}, {} in that order
  Chain c;
  auto push = [&](std::vector<int> idx, std::vector<double> b) {
    PosteriorDraw d;
    d.gamma = ModelIndicator(idx, K);
    d.beta = Eigen::Map<Eigen::VectorXd>(b.data(), b.size());
    c.draws.push_back(d);
  };
  push({0}, {1.0});
  push({0}, {0.5});
  push({1}, {-0.3});
  push({0, 1}, {0.2, 0.4});
  push({}, {});
  return c;
}

}  // namespace

TEST_CASE("selection rules") {
  Chain c = toy_chain(3);
  MixtureDensity all = select(c, SelectionRule::all(), 3);
  CHECK(all.components.size() == 5);
  CHECK(all.selection_prob == doctest::Approx(1.0));
  CHECK(all.weights.sum() == doctest::Approx(1.0));

  // inclusion probabilities: coord0 = 3/5, coord1 = 2/5, coord2 = 0
  MixtureDensity thr = select(c, SelectionRule::inclusion_threshold(0.5), 3);
  // retained draws each touch the surviving coordinate set {0}
  for (const auto& d : thr.components) CHECK(d.gamma.contains(0));
  CHECK(thr.components.size() == 3);  // {0}, {0}, {0,1}
  CHECK(thr.selection_prob == doctest::Approx(0.6));

  MixtureDensity best1 = select(c, SelectionRule::best_m(1), 3);
  // most-visited model is {0} (2 visits)
  CHECK(best1.components.size() == 2);
  for (const auto& d : best1.components) CHECK(d.gamma == ModelIndicator({0}, 3));
  CHECK(best1.selection_prob == doctest::Approx(0.4));

  // best-2: tie between {1}, {0,1}, {} at one visit each is broken
  // lexicographically, so {} joins {0}
  MixtureDensity best2 = select(c, SelectionRule::best_m(2), 3);
  CHECK(best2.components.size() == 3);
  CHECK(best2.selection_prob == doctest::Approx(0.6));

  CHECK_THROWS_AS(select(c, SelectionRule::inclusion_threshold(0.95), 3), std::runtime_error);
}

TEST_CASE("mixture mean and classification") {
  Chain c = toy_chain(2);
  c.draws.resize(2);  // {0}:1.0 and {0}:0.5
  MixtureDensity mix = select(c, SelectionRule::all(), 2);
  Eigen::VectorXd x(2);
  x << 1.0, 0.0;
  GlmFamily lg = GlmFamily::logistic();
  double expect = 0.5 * (mean(lg, 1.0) + mean(lg, 0.5));
  CHECK(mean_estimate(mix, lg, x) == doctest::Approx(expect).epsilon(1e-13));
  CHECK(classify(mix, lg, x) == 1);
  Eigen::VectorXd xneg = -x;
  CHECK(classify(mix, lg, xneg) == 0);
  CHECK_THROWS_AS(classify(mix, GlmFamily::poisson(), x), std::invalid_argument);
}

TEST_CASE("single-component mixture distance equals the plain distance") {
  for (const GlmFamily& fam :
       {GlmFamily::logistic(), GlmFamily::poisson(), GlmFamily::normal_known_var(1.3),
        GlmFamily::exponential_log_link()}) {
    int K = 2;
    Eigen::VectorXd bstar(K);
    bstar << 0.8, -0.3;
    TrueModel truth{fam, bstar, XLaw::uniform_cube(K), std::nullopt};
    Rng rng(5);
    XSample xs = make_x_sample(truth, 40, rng);
    Chain c;
    PosteriorDraw d;
    d.gamma = ModelIndicator({0}, K);
    d.beta = Eigen::VectorXd::Constant(1, 0.5);
    c.draws.push_back(d);
    MixtureDensity mix = select(c, SelectionRule::all(), K);
    HellingerEstimate a = mixture_hellinger(mix, fam, truth, xs);
    HellingerEstimate b = hellinger_distance(truth, fam, d.gamma, d.beta, std::nullopt, xs);
    CHECK(a.value == doctest::Approx(b.value).epsilon(2e-5));
  }
}

TEST_CASE("binary mixture distance uses the mixture mean in closed form") {
  int K = 2;
  Eigen::VectorXd bstar(K);
  bstar << 1.0, 0.0;
  GlmFamily lg = GlmFamily::logistic();
  TrueModel truth{lg, bstar, XLaw::uniform_cube(K), std::nullopt};
  Rng rng(8);
  XSample xs = make_x_sample(truth, 60, rng);
  Chain c = toy_chain(K);
  MixtureDensity mix = select(c, SelectionRule::all(), K);
  HellingerEstimate est = mixture_hellinger(mix, lg, truth, xs);
  double acc = 0.0;
  for (int i = 0; i < xs.size(); ++i) {
    double mu_mix = mean_estimate(mix, lg, xs.points.row(i).transpose());
    double mu_star = mean(lg, xs.points.row(i) * bstar);
    double aff = std::sqrt(mu_mix * mu_star) + std::sqrt((1 - mu_mix) * (1 - mu_star));
    acc += xs.weights(i) * (2.0 - 2.0 * aff);
  }
  CHECK(est.value == doctest::Approx(std::sqrt(acc)).epsilon(1e-10));
}

TEST_CASE("convexity bound holds on an easy problem") {
  Rng rng(31);
  int n = 120, K = 4;
  Eigen::VectorXd bstar = Eigen::VectorXd::Zero(K);
  bstar(0) = 1.0;
  TrueModel truth{GlmFamily::normal_known_var(1.0), bstar, XLaw::uniform_cube(K), std::nullopt};
  Dataset d{Eigen::MatrixXd(n, K), Eigen::VectorXd(n), truth.family};
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < K; ++j) d.X(i, j) = u(rng);
  for (int i = 0; i < n; ++i) d.y(i) = sample_response(d.family, d.X.row(i) * bstar, rng);
  PriorSpec spec;
  spec.r_exp = 1;
  spec.r_max = 3;
  McmcConfig mc;
  mc.iterations = 30000;
  mc.burn_in = 5000;
  mc.seed = 6;
  Chain chain = mcmc_run(d, spec, mc);
  XSample xs = make_x_sample(truth, 1500, rng);
  MixtureDensity mix = select(chain, SelectionRule::all(), K);
  auto dists = posterior_hellinger(chain, truth, truth.family, xs);
  std::vector<double> dv;
  for (const auto& e : dists) dv.push_back(e.value);
  ConvexityBound cb = convexity_bound_check(mix, truth.family, truth, dv, 0.5, xs);
  CHECK(cb.pass);
  CHECK(cb.lhs >= 0.0);
  CHECK(cb.rhs >= 0.25);
}

TEST_CASE("regression and classification checks on a binary problem") {
  Rng rng(41);
  int n = 150, K = 3;
  Eigen::VectorXd bstar(K);
  bstar << 1.2, 0.0, 0.0;
  GlmFamily lg = GlmFamily::logistic();
  TrueModel truth{lg, bstar, XLaw::uniform_cube(K), std::nullopt};
  Dataset d{Eigen::MatrixXd(n, K), Eigen::VectorXd(n), lg};
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < K; ++j) d.X(i, j) = u(rng);
  for (int i = 0; i < n; ++i) d.y(i) = sample_response(lg, d.X.row(i) * bstar, rng);
  PriorSpec spec;
  spec.r_exp = 1;
  spec.r_max = 2;
  McmcConfig mc;
  mc.iterations = 30000;
  mc.burn_in = 5000;
  mc.seed = 10;
  Chain chain = mcmc_run(d, spec, mc);
  XSample xs = make_x_sample(truth, 2000, rng);
  MixtureDensity mix = select(chain, SelectionRule::all(), K);
  RegressionClassificationReport rep = regression_classification_checks(mix, lg, truth, xs);
  CHECK(rep.weighted_l2 >= 0.0);
  CHECK(rep.excess_risk >= -1e-12);
  CHECK(rep.bayes_error > 0.0);
  CHECK(rep.bayes_error < 0.5);
  CHECK(rep.l2_pass);
  CHECK(rep.class_pass);
}
