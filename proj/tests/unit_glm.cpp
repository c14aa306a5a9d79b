#include <cmath>
#include <vector>

#include "bvsglm/glm.hpp"
#include "doctest.h"

using namespace bvsglm;

namespace {

// numeric integral over the real line by Simpson's rule
template <typename F>
double simpson(F f, double a, double b, int n) {
  double h = (b - a) / n, s = f(a) + f(b);
  for (int i = 1; i < n; ++i) s += f(a + i * h) * (i % 2 ? 4.0 : 2.0);
  return s * h / 3.0;
}

double series_affinity(const GlmFamily& fam, double h1, double h2, int y_max) {
  double s = 0.0;
  for (int y = 0; y <= y_max; ++y)
    s += std::exp(0.5 * (log_density(fam, y, h1) + log_density(fam, y, h2)));
  return s;
}

}  // namespace

TEST_CASE("densities normalize to 1") {
  std::vector<double> hs{-1.5, -0.5, 0.0, 0.7, 1.3};
  for (double h : hs) {
    double p = 0.0;
    for (int y = 0; y <= 1; ++y) p += std::exp(log_density(GlmFamily::logistic(), y, h));
    CHECK(p == doctest::Approx(1.0).epsilon(1e-12));
    p = 0.0;
    for (int y = 0; y <= 1; ++y) p += std::exp(log_density(GlmFamily::probit(), y, h));
    CHECK(p == doctest::Approx(1.0).epsilon(1e-12));
    p = 0.0;
    for (int y = 0; y <= 200; ++y) p += std::exp(log_density(GlmFamily::poisson(), y, h));
    CHECK(p == doctest::Approx(1.0).epsilon(1e-10));

    GlmFamily nk = GlmFamily::normal_known_var(2.0);
    double pn = simpson([&](double y) { return std::exp(log_density(nk, y, h)); }, h - 12.0,
                        h + 12.0, 4000);
    CHECK(pn == doctest::Approx(1.0).epsilon(1e-9));

    GlmFamily ex = GlmFamily::exponential_log_link();
    double mu = std::exp(h);
    double pe = simpson([&](double y) { return y > 0 ? std::exp(log_density(ex, y, h)) : 0.0; },
                        1e-12, 60.0 * mu, 200000);
    CHECK(pe == doctest::Approx(1.0).epsilon(1e-7));
  }
}

TEST_CASE("mean matches numeric expectation") {
  for (double h : {-1.0, 0.3, 1.1}) {
    double m = 0.0;
    for (int y = 0; y <= 250; ++y)
      m += y * std::exp(log_density(GlmFamily::poisson(), y, h));
    CHECK(m == doctest::Approx(mean(GlmFamily::poisson(), h)).epsilon(1e-10));

    GlmFamily lg = GlmFamily::logistic();
    CHECK(std::exp(log_density(lg, 1, h)) == doctest::Approx(mean(lg, h)).epsilon(1e-12));
    GlmFamily pr = GlmFamily::probit();
    CHECK(std::exp(log_density(pr, 1, h)) == doctest::Approx(mean(pr, h)).epsilon(1e-12));

    GlmFamily ex = GlmFamily::exponential_log_link();
    double mu = std::exp(h);
    double me = simpson([&](double y) { return y * std::exp(log_density(ex, y, h)); }, 1e-12,
                        80.0 * mu, 200000);
    CHECK(me == doctest::Approx(mean(ex, h)).epsilon(1e-6));
  }
}

TEST_CASE("mean equals -b'/a'") {
  for (const GlmFamily& fam :
       {GlmFamily::logistic(), GlmFamily::probit(), GlmFamily::poisson(),
        GlmFamily::exponential_log_link(), GlmFamily::normal_known_var(0.7)}) {
    for (double h : {-2.0, -0.4, 0.0, 0.9, 2.0}) {
      NaturalTerms t = natural_terms(fam, h);
      CHECK(-t.b_prime / t.a_prime == doctest::Approx(mean(fam, h)).epsilon(1e-12));
    }
  }
}

TEST_CASE("closed-form affinities match oracles") {
  GlmFamily po = GlmFamily::poisson();
  CHECK(hellinger_affinity(po, 0.0, std::log(4.0)) ==
        doctest::Approx(std::exp(-0.5)).epsilon(1e-12));
  for (double h1 : {-1.0, 0.0, 0.8})
    for (double h2 : {-0.5, 0.3, 1.0})
      CHECK(hellinger_affinity(po, h1, h2) ==
            doctest::Approx(series_affinity(po, h1, h2, 300)).epsilon(1e-10));

  GlmFamily ex = GlmFamily::exponential_log_link();
  // means 1 and 4: 2*2/5
  CHECK(hellinger_affinity(ex, 0.0, std::log(4.0)) == doctest::Approx(0.8).epsilon(1e-12));

  // normal, equal dispersion
  GlmFamily nk = GlmFamily::normal_known_var(1.7);
  for (double d : {0.0, 0.5, 2.0})
    CHECK(hellinger_affinity(nk, 0.0, d) ==
          doctest::Approx(std::exp(-1.7 * d * d / 8.0)).epsilon(1e-12));

  // unequal variances, equal means: sqrt(2 s1 s2 / (s1^2 + s2^2)) with sd's
  CHECK(hellinger_affinity_normal(0.3, 1.0, 0.3, 0.5) ==
        doctest::Approx(std::sqrt(2.0 * std::sqrt(2.0) / 3.0)).epsilon(1e-12));
  // reduces to the equal-dispersion form
  CHECK(hellinger_affinity_normal(0.0, 1.7, 2.0, 1.7) ==
        doctest::Approx(hellinger_affinity(nk, 0.0, 2.0)).epsilon(1e-12));
}

TEST_CASE("affinity symmetry and unit diagonal") {
  for (const GlmFamily& fam :
       {GlmFamily::logistic(), GlmFamily::probit(), GlmFamily::poisson(),
        GlmFamily::exponential_log_link(), GlmFamily::normal_known_var(1.0)}) {
    for (double h1 : {-1.0, 0.2})
      for (double h2 : {-0.3, 0.9}) {
        double a = hellinger_affinity(fam, h1, h2);
        CHECK(a == doctest::Approx(hellinger_affinity(fam, h2, h1)).epsilon(1e-13));
        CHECK(a <= 1.0 + 1e-13);
        CHECK(a > 0.0);
      }
    CHECK(hellinger_affinity(fam, 0.4, 0.4) == doctest::Approx(1.0).epsilon(1e-13));
  }
}

TEST_CASE("probit natural terms") {
  NaturalTerms t = natural_terms(GlmFamily::probit(), 0.0);
  // a'(0) = 4 phi(0)
  CHECK(t.a_prime == doctest::Approx(4.0 * norm_pdf(0.0)).epsilon(1e-12));
  CHECK(t.a == doctest::Approx(0.0).epsilon(1e-14));
}

TEST_CASE("stable log normal cdf") {
  CHECK(log_norm_cdf(0.0) == doctest::Approx(std::log(0.5)).epsilon(1e-14));
  CHECK(std::exp(log_norm_cdf(1.3)) == doctest::Approx(norm_cdf(1.3)).epsilon(1e-12));
  // deep tail stays finite and monotone
  double a = log_norm_cdf(-38.0), b = log_norm_cdf(-40.0);
  CHECK(std::isfinite(a));
  CHECK(std::isfinite(b));
  CHECK(a > b);
  // near-continuity across the erfc/asymptotic switch near x = 25 sqrt(2);
  // the series truncation leaves a small log-scale seam
  double lo = log_norm_cdf(-25.0 * std::sqrt(2.0) + 1e-4);
  double hi = log_norm_cdf(-25.0 * std::sqrt(2.0) - 1e-4);
  CHECK(std::abs(lo - hi) < 0.02);
}

TEST_CASE("support errors name the family") {
  CHECK_THROWS_WITH_AS(log_density(GlmFamily::logistic(), 2.0, 0.0),
                       doctest::Contains("logistic"), std::domain_error);
  CHECK_THROWS_AS(log_density(GlmFamily::poisson(), 1.5, 0.0), std::domain_error);
  CHECK_THROWS_AS(log_density(GlmFamily::exponential_log_link(), -1.0, 0.0), std::domain_error);
  CHECK_THROWS_AS(log_density(GlmFamily::normal_unknown_var(), 0.0, 0.0), std::invalid_argument);
}

TEST_CASE("sampled responses match the mean function") {
  Rng rng(42);
  for (const GlmFamily& fam :
       {GlmFamily::logistic(), GlmFamily::poisson(), GlmFamily::normal_known_var(4.0)}) {
    double h = 0.6, acc = 0.0;
    const int N = 200000;
    for (int i = 0; i < N; ++i) acc += sample_response(fam, h, rng);
    CHECK(acc / N == doctest::Approx(mean(fam, h)).epsilon(0.02));
  }
}
