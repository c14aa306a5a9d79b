#include <cmath>
#include <functional>
#include <vector>

#include "bvsglm/prior.hpp"
#include "doctest.h"

using namespace bvsglm;

namespace {

std::vector<std::vector<int>> subsets_up_to(int K, int max_size) {
  std::vector<std::vector<int>> out;
  std::vector<int> cur;
  std::function<void(int)> rec = [&](int start) {
    out.push_back(cur);
    if (int(cur.size()) == max_size) return;
    for (int j = start; j < K; ++j) {
      cur.push_back(j);
      rec(j + 1);
      cur.pop_back();
    }
  };
  rec(0);
  return out;
}

}  // namespace

TEST_CASE("model prior normalizes over the truncated support") {
  PriorSpec spec;
  spec.r_exp = 2;
  spec.r_max = 3;
  int K = 6;
  double total = 0.0;
  for (const auto& s : subsets_up_to(K, spec.r_max))
    total += std::exp(*log_prior_model(spec, ModelIndicator(s, K)));
  CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("hand-computed truncated model prior") {
  // K=4, lambda=1/4, cap 1: kept mass (81 + 4*27)/256, empty 81/189,
  // each size-1 model 27/189 = 1/7
  PriorSpec spec;
  spec.r_exp = 1;
  spec.r_max = 1;
  ModelIndicator g({2}, 4);
  CHECK(*log_prior_model(spec, g) == doctest::Approx(std::log(1.0 / 7.0)).epsilon(1e-12));
  CHECK(*log_prior_model(spec, ModelIndicator({}, 4)) ==
        doctest::Approx(std::log(3.0 / 7.0)).epsilon(1e-12));
  CHECK(!log_prior_model(spec, ModelIndicator({0, 1}, 4)).has_value());
}

TEST_CASE("real-valued-K truncated prior agrees with the integer path") {
  PriorSpec spec;
  spec.r_exp = 3;
  spec.r_max = 5;
  int K = 40;
  for (int s : {0, 2, 5}) {
    std::vector<int> idx;
    for (int i = 0; i < s; ++i) idx.push_back(i);
    CHECK(log_truncated_model_prior(double(K), 3.0, 5.0, double(s)) ==
          doctest::Approx(*log_prior_model(spec, ModelIndicator(idx, K))).epsilon(1e-12));
  }
  // huge K stays finite
  double lp = log_truncated_model_prior(1e10, 12.0, 40.0, 12.0);
  CHECK(std::isfinite(lp));
  CHECK(lp < 0.0);
}

TEST_CASE("slab covariance and coefficient prior") {
  // AR1 c=1 rho=0.5 size 2: det = 0.75
  Eigen::MatrixXd V = slab_covariance(VPolicy::ar1(1.0, 0.5), 2);
  CHECK(V(0, 1) == doctest::Approx(0.5));
  CHECK(V.determinant() == doctest::Approx(0.75).epsilon(1e-12));

  PriorSpec spec;
  spec.r_exp = 1;
  spec.r_max = 2;
  spec.v_policy = VPolicy::ar1(1.0, 0.5);
  Eigen::VectorXd beta0 = Eigen::VectorXd::Zero(2);
  double lp = log_prior_coeffs(spec, ModelIndicator({0, 3}, 5), beta0);
  CHECK(lp == doctest::Approx(-std::log(2.0 * M_PI) - 0.5 * std::log(0.75)).epsilon(1e-12));

  // identity slab: independent normals
  spec.v_policy = VPolicy::identity_scale(2.0);
  Eigen::VectorXd b(2);
  b << 0.7, -1.1;
  double expect = 0.0;
  for (int i = 0; i < 2; ++i)
    expect += -0.5 * b(i) * b(i) / 2.0 - 0.5 * std::log(2.0 * M_PI * 2.0);
  CHECK(log_prior_coeffs(spec, ModelIndicator({1, 2}, 5), b) ==
        doctest::Approx(expect).epsilon(1e-12));
}

TEST_CASE("conditional slab matches the joint density factorization") {
  VPolicy pol = VPolicy::ar1(1.3, 0.6);
  int size = 3;
  Eigen::MatrixXd V = slab_covariance(pol, size);
  Eigen::VectorXd b(size);
  b << 0.4, -0.2, 0.9;
  auto logmvn = [](const Eigen::VectorXd& x, const Eigen::MatrixXd& S) {
    Eigen::LLT<Eigen::MatrixXd> llt(S);
    double ld = 0.0;
    for (int i = 0; i < S.rows(); ++i) ld += 2.0 * std::log(llt.matrixL()(i, i));
    Eigen::VectorXd w = llt.matrixL().solve(x);
    return -0.5 * w.squaredNorm() - 0.5 * ld - 0.5 * x.size() * std::log(2.0 * M_PI);
  };
  for (int coord = 0; coord < size; ++coord) {
    Eigen::VectorXd others(size - 1);
    std::vector<int> rest;
    for (int i = 0, t = 0; i < size; ++i)
      if (i != coord) {
        others(t++) = b(i);
        rest.push_back(i);
      }
    Eigen::MatrixXd Voo(size - 1, size - 1);
    for (int i = 0; i < size - 1; ++i)
      for (int k = 0; k < size - 1; ++k) Voo(i, k) = V(rest[i], rest[k]);
    ConditionalSlab cs = conditional_slab(pol, size, coord, others);
    double lhs = logmvn(b, V);
    double rhs = logmvn(others, Voo) - 0.5 * (b(coord) - cs.mean) * (b(coord) - cs.mean) / cs.var -
                 0.5 * std::log(2.0 * M_PI * cs.var);
    CHECK(lhs == doctest::Approx(rhs).epsilon(1e-10));
  }
}

TEST_CASE("policy eigenvalue bounds") {
  PriorSpec spec;
  spec.v_policy = VPolicy::identity_scale(4.0);
  VPolicyBounds b = v_policy_bounds(spec, 7);
  CHECK(b.ch1_V == doctest::Approx(4.0));
  CHECK(b.ch1_Vinv == doctest::Approx(0.25));
  CHECK(b.H == doctest::Approx(4.0));

  spec.v_policy = VPolicy::ar1(1.0, 0.5);
  VPolicyBounds a = v_policy_bounds(spec, 3);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(slab_covariance(spec.v_policy, 3));
  CHECK(a.ch1_V == doctest::Approx(es.eigenvalues().maxCoeff()).epsilon(1e-12));
  CHECK(a.ch1_Vinv == doctest::Approx(1.0 / es.eigenvalues().minCoeff()).epsilon(1e-12));
}

TEST_CASE("prior draws respect the size cap and match the truncated size law") {
  PriorSpec spec;
  spec.r_exp = 3;
  spec.r_max = 4;
  int K = 12;
  Rng rng(7);
  const int N = 50000;
  std::vector<long> size_count(spec.r_max + 1, 0);
  for (int t = 0; t < N; ++t) {
    PriorDraw d = sample_prior(spec, K, rng);
    REQUIRE(d.gamma.size() <= spec.r_max);
    ++size_count[d.gamma.size()];
  }
  // expected truncated binomial size distribution
  double lam = spec.lambda(K);
  std::vector<double> expect(spec.r_max + 1);
  double Z = 0.0;
  auto lchoose = [](double n, double k) {
    return std::lgamma(n + 1) - std::lgamma(k + 1) - std::lgamma(n - k + 1);
  };
  for (int s = 0; s <= spec.r_max; ++s) {
    expect[s] = std::exp(lchoose(K, s) + s * std::log(lam) + (K - s) * std::log1p(-lam));
    Z += expect[s];
  }
  for (int s = 0; s <= spec.r_max; ++s)
    CHECK(double(size_count[s]) / N == doctest::Approx(expect[s] / Z).scale(1.0).epsilon(0.02));
}

TEST_CASE("dispersion-prior draws scale the slab") {
  PriorSpec spec;
  spec.r_exp = 2;
  spec.r_max = 3;
  spec.dispersion = DispersionPrior{3.0, 2.0};
  Rng rng(11);
  double mean_phi = 0.0;
  long n_phi = 0;
  for (int t = 0; t < 20000; ++t) {
    PriorDraw d = sample_prior(spec, 10, rng);
    REQUIRE(d.phi.has_value());
    mean_phi += *d.phi;
    ++n_phi;
  }
  CHECK(mean_phi / n_phi == doctest::Approx(1.5).epsilon(0.02));  // kappa/rate
}

TEST_CASE("validation rejects bad specs") {
  PriorSpec spec;
  spec.r_exp = 3;
  spec.r_max = 2;
  CHECK_THROWS_AS(spec.validate(10), std::invalid_argument);
  spec.r_exp = 1;
  spec.r_max = 10;
  CHECK_THROWS_AS(spec.validate(10), std::invalid_argument);
  CHECK_THROWS_AS(ModelIndicator({1, 1}, 4), std::domain_error);
  CHECK_THROWS_AS(ModelIndicator({4}, 4), std::domain_error);
}

TEST_CASE("gamma log density") {
  // Ga(2, 3) at x=1: 9 x e^{-3x}
  CHECK(log_gamma_density(1.0, 2.0, 3.0) == doctest::Approx(std::log(9.0) - 3.0).epsilon(1e-12));
  CHECK(log_gamma_density(-1.0, 2.0, 3.0) == -std::numeric_limits<double>::infinity());
}
