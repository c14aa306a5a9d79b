#include <cmath>

#include "bvsglm/graphical.hpp"
#include "doctest.h"

using namespace bvsglm;

TEST_CASE("chain truth has the AR(1) covariance") {
  GraphTruth t = GraphTruth::chain(5, 0.5);
  Eigen::MatrixXd S = t.covariance();
  for (int i = 0; i < 5; ++i)
    for (int j = 0; j < 5; ++j)
      CHECK(S(i, j) == doctest::Approx(std::pow(0.5, std::abs(i - j))).epsilon(1e-10));
  // precision is tridiagonal
  CHECK(t.precision(0, 2) == doctest::Approx(0.0).scale(1.0).epsilon(1e-12));
  CHECK(t.precision(1, 4) == doctest::Approx(0.0).scale(1.0).epsilon(1e-12));
  t.validate();
}

TEST_CASE("node regressions follow the precision matrix") {
  Eigen::MatrixXd P(2, 2);
  P << 2.0, -1.0, -1.0, 2.0;
  GraphTruth t{P};  // aggregate: skips the unit-variance validation
  Eigen::VectorXd c0 = t.regression_coeffs(0);
  REQUIRE(c0.size() == 1);
  CHECK(c0(0) == doctest::Approx(0.5));
  CHECK(t.residual_variance(0) == doctest::Approx(0.5));

  GraphTruth chain = GraphTruth::chain(4, 0.6);
  // interior node: coefficients against both neighbours, zero elsewhere
  Eigen::VectorXd c1 = chain.regression_coeffs(1);
  REQUIRE(c1.size() == 3);
  CHECK(c1(0) == doctest::Approx(-chain.precision(1, 0) / chain.precision(1, 1)).epsilon(1e-12));
  CHECK(c1(1) == doctest::Approx(-chain.precision(1, 2) / chain.precision(1, 1)).epsilon(1e-12));
  CHECK(c1(2) == doctest::Approx(0.0).scale(1.0).epsilon(1e-12));
}

TEST_CASE("graph samples reproduce the covariance") {
  GraphTruth t = GraphTruth::chain(4, 0.5);
  Rng rng(3);
  Eigen::MatrixXd X = sample_graph_data(t, 60000, rng);
  REQUIRE(X.rows() == 60000);
  REQUIRE(X.cols() == 4);
  Eigen::MatrixXd S = X.transpose() * X / double(X.rows());
  CHECK(S(0, 0) == doctest::Approx(1.0).epsilon(0.03));
  CHECK(S(0, 1) == doctest::Approx(0.5).epsilon(0.05));
  CHECK(S(0, 3) == doctest::Approx(0.125).scale(1.0).epsilon(0.03));
}

TEST_CASE("standardization centers, bounds, and reports clipping") {
  Rng rng(5);
  std::normal_distribution<double> z(2.0, 3.0);
  Eigen::MatrixXd X(500, 2);
  for (int i = 0; i < 500; ++i) {
    X(i, 0) = z(rng);
    X(i, 1) = 0.1 * z(rng) - 4.0;
  }
  Eigen::MatrixXd orig = X;
  ColumnTransform tr = standardize_columns(X);
  for (int j = 0; j < 2; ++j) {
    CHECK(X.col(j).mean() == doctest::Approx(0.0).scale(1.0).epsilon(0.2));
    CHECK(X.col(j).maxCoeff() <= 1.0);
    CHECK(X.col(j).minCoeff() >= -1.0);
  }
  CHECK(tr.clip_rate > 0.0);   // unit-variance gaussians exceed 1 often
  CHECK(tr.clip_rate < 0.75);
  // transform round-trips an unclipped entry
  int i0 = 0;
  double v = (orig(i0, 0) - tr.center(0)) / tr.scale(0);
  if (std::abs(v) <= 1.0) CHECK(X(i0, 0) == doctest::Approx(v).epsilon(1e-12));

  Eigen::MatrixXd C = Eigen::MatrixXd::Constant(10, 1, 3.0);
  CHECK_THROWS_AS(standardize_columns(C), std::invalid_argument);
}

TEST_CASE("neighborhood selection recovers chain neighbours") {
  GraphTruth t = GraphTruth::chain(5, 0.6);
  Rng rng(9);
  Eigen::MatrixXd X = sample_graph_data(t, 400, rng);
  PriorSpec spec;
  spec.r_exp = 2;
  spec.r_max = 3;
  spec.dispersion = DispersionPrior{1.0, 1.0};
  McmcConfig mc;
  mc.iterations = 20000;
  mc.burn_in = 4000;
  mc.seed = 21;
  NeighborhoodFit fit = neighborhood_select(X, 2, spec, mc);
  REQUIRE(fit.covariate_nodes.size() == 4);
  CHECK(fit.covariate_nodes == std::vector<int>{0, 1, 3, 4});
  Eigen::VectorXd incl = inclusion_probabilities(fit.chain, 4);
  // columns 1 and 2 are the true neighbours (nodes 1 and 3)
  CHECK(incl(1) > 0.5);
  CHECK(incl(2) > 0.5);
  CHECK(incl(0) < 0.5);
  CHECK(incl(3) < 0.5);
}

TEST_CASE("conditional distance vanishes at the truth and matches a closed form off it") {
  GraphTruth t = GraphTruth::chain(3, 0.5);
  int j = 1;
  Rng rng(13);
  NeighborhoodFit fit;
  fit.covariate_nodes = {0, 2};
  // wide covariate scaling so the [-1,1] clip almost never fires; response
  // transform (last entries) left at the identity
  fit.transform.center = Eigen::VectorXd::Zero(3);
  fit.transform.scale = Eigen::VectorXd(3);
  fit.transform.scale << 3.0, 3.0, 1.0;

  // hand-built single component equal to the true conditional in original
  // units: mean = sum_k b*_k x_k, variance 1/Theta_jj
  Eigen::VectorXd bstar = t.regression_coeffs(j);
  MixtureDensity mix;
  PosteriorDraw d;
  d.gamma = ModelIndicator({0, 1}, 2);
  // coefficients act on the scaled covariates: b^std = b* * scale
  Eigen::VectorXd bs(2);
  bs << bstar(0) * 3.0, bstar(1) * 3.0;
  d.beta = bs;
  d.phi = t.precision(j, j);
  mix.components.push_back(d);
  mix.weights = Eigen::VectorXd::Constant(1, 1.0);

  HellingerEstimate near = conditional_hellinger(t, j, fit, mix, 300, rng);
  CHECK(near.value < 0.02);

  // doubled residual variance: closed-form d^2 = 2 - 2 sqrt(2 sqrt 2 / 3)
  GraphTruth iso = GraphTruth::from_precision(Eigen::MatrixXd::Identity(3, 3));
  MixtureDensity wide;
  PosteriorDraw w;
  w.gamma = ModelIndicator({}, 2);
  w.beta = Eigen::VectorXd(0);
  w.phi = 0.5;  // fitted variance 2, truth variance 1
  wide.components.push_back(w);
  wide.weights = Eigen::VectorXd::Constant(1, 1.0);
  HellingerEstimate far = conditional_hellinger(iso, j, fit, wide, 200, rng);
  double expect = std::sqrt(2.0 - 2.0 * std::sqrt(2.0 * std::sqrt(2.0) / 3.0));
  CHECK(far.value == doctest::Approx(expect).epsilon(1e-4));
}

TEST_CASE("edge rules combine neighbourhoods") {
  // two fabricated 3-node fits with known inclusion patterns
  auto make_fit = [&](int j, std::vector<std::vector<int>> supports) {
    NeighborhoodFit f;
    for (int o = 0; o < 3; ++o)
      if (o != j) f.covariate_nodes.push_back(o);
    for (const auto& s : supports) {
      PosteriorDraw d;
      d.gamma = ModelIndicator(s, 2);
      d.beta = Eigen::VectorXd::Zero(s.size());
      f.chain.draws.push_back(d);
    }
    return f;
  };
  std::vector<NeighborhoodFit> fits;
  fits.push_back(make_fit(0, {{0}, {0}}));   // node 0 always picks node 1
  fits.push_back(make_fit(1, {{0}, {}}));    // node 1 picks node 0 half the time
  fits.push_back(make_fit(2, {{}, {}}));     // node 2 picks nothing
  GraphEstimate g = build_graph(fits, 0.6);
  CHECK(g.inclusion(0, 1) == doctest::Approx(1.0));
  CHECK(g.inclusion(1, 0) == doctest::Approx(0.5));
  CHECK(g.inclusion(2, 0) == doctest::Approx(0.0));
  // OR keeps 0-1, AND drops it (0.5 < 0.6)
  CHECK(g.adjacency_or(0, 1) == 1);
  CHECK(g.adjacency_and(0, 1) == 0);
  CHECK(g.adjacency_or(0, 2) == 0);
  // symmetry and AND subset of OR
  for (int a = 0; a < 3; ++a)
    for (int b = 0; b < 3; ++b) {
      CHECK(g.adjacency_or(a, b) == g.adjacency_or(b, a));
      CHECK(g.adjacency_and(a, b) <= g.adjacency_or(a, b));
    }
  CHECK_THROWS_AS(build_graph(fits, 1.5), std::invalid_argument);
}
