#include "bvsglm/glm.hpp"

#include <cmath>
#include <limits>

namespace bvsglm {

namespace {

constexpr double kSqrt2 = 1.4142135623730951;
constexpr double kLog2Pi = 1.8378770664093453;

double check_finite(double h) {
  if (!std::isfinite(h)) throw std::invalid_argument("linear parameter must be finite");
  return h;
}

[[noreturn]] void support_error(const GlmFamily& fam, double y) {
  throw std::domain_error("response " + std::to_string(y) + " outside the support of family " +
                          family_name(fam.kind));
}

bool is_nonneg_integer(double y) {
  return y >= 0.0 && std::floor(y) == y && std::isfinite(y);
}

// log(1 + e^h) without overflow
double softplus(double h) { return h > 0.0 ? h + std::log1p(std::exp(-h)) : std::log1p(std::exp(h)); }

double phi_of(const GlmFamily& fam, std::optional<double> phi) {
  double p = fam.dispersion;
  if (phi) p = *phi;
  if (fam.kind == FamilyKind::NormalUnknownVar && !phi)
    throw std::invalid_argument("NormalUnknownVar requires a dispersion value per call");
  if (!(p > 0.0)) throw std::invalid_argument("dispersion must be positive");
  return p;
}

}  // namespace

std::string family_name(FamilyKind kind) {
  switch (kind) {
    case FamilyKind::NormalKnownVar: return "normal_known_var";
    case FamilyKind::NormalUnknownVar: return "normal_unknown_var";
    case FamilyKind::Logistic: return "logistic";
    case FamilyKind::Probit: return "probit";
    case FamilyKind::Poisson: return "poisson";
    case FamilyKind::ExponentialLogLink: return "exponential_log_link";
  }
  return "unknown";
}

ResponseMeasure response_measure_for(FamilyKind kind) {
  switch (kind) {
    case FamilyKind::Logistic:
    case FamilyKind::Probit: return ResponseMeasure::CountingBinary;
    case FamilyKind::Poisson: return ResponseMeasure::CountingNonnegInt;
    case FamilyKind::ExponentialLogLink: return ResponseMeasure::LebesguePositive;
    default: return ResponseMeasure::LebesgueReals;
  }
}

double norm_pdf(double h) { return std::exp(-0.5 * h * h - 0.5 * kLog2Pi); }

double norm_cdf(double h) { return 0.5 * std::erfc(-h / kSqrt2); }

double log_norm_cdf(double h) {
  // erfc(x) underflows around x ~ 27; switch to the asymptotic expansion of
  // the Mills ratio well before that to avoid catastrophic loss.
  double x = -h / kSqrt2;
  if (x < 25.0) return std::log(0.5 * std::erfc(x));
  // ln Phi(h) = -x^2 - ln(2 x sqrt(pi)) + ln(1 - 1/(2x^2) + 3/(4x^4) - ...)
  double inv2 = 1.0 / (2.0 * x * x);
  double series = 1.0 - inv2 + 3.0 * inv2 * inv2;
  return -x * x - std::log(2.0 * x) - 0.5 * std::log(M_PI) + std::log(series);
}

double log_density(const GlmFamily& fam, double y, double h, std::optional<double> phi) {
  check_finite(h);
  switch (fam.kind) {
    case FamilyKind::Poisson: {
      if (!is_nonneg_integer(y)) support_error(fam, y);
      return h * y - std::exp(h) - std::lgamma(y + 1.0);
    }
    case FamilyKind::Logistic: {
      if (y != 0.0 && y != 1.0) support_error(fam, y);
      return h * y - softplus(h);
    }
    case FamilyKind::Probit: {
      if (y != 0.0 && y != 1.0) support_error(fam, y);
      return y > 0.5 ? log_norm_cdf(h) : log_norm_cdf(-h);
    }
    case FamilyKind::ExponentialLogLink: {
      if (!(y > 0.0) || !std::isfinite(y)) support_error(fam, y);
      return -std::exp(-h) * y - h;
    }
    case FamilyKind::NormalKnownVar:
    case FamilyKind::NormalUnknownVar: {
      if (!std::isfinite(y)) support_error(fam, y);
      double p = phi_of(fam, phi);
      double r = y - h;
      return -0.5 * p * r * r + 0.5 * std::log(p) - 0.5 * kLog2Pi;
    }
  }
  return std::numeric_limits<double>::quiet_NaN();
}

NaturalTerms natural_terms(const GlmFamily& fam, double h, std::optional<double> phi) {
  check_finite(h);
  switch (fam.kind) {
    case FamilyKind::Poisson: return {h, 1.0, -std::exp(h)};
    case FamilyKind::Logistic: return {h, 1.0, -1.0 / (1.0 + std::exp(-h))};
    case FamilyKind::ExponentialLogLink: return {-std::exp(-h), std::exp(-h), -1.0};
    case FamilyKind::Probit: {
      double lcdf = log_norm_cdf(h);
      double lccdf = log_norm_cdf(-h);
      double lpdf = -0.5 * h * h - 0.5 * kLog2Pi;
      double a = lcdf - lccdf;
      double a_prime = std::exp(lpdf - lcdf) + std::exp(lpdf - lccdf);
      double b_prime = -std::exp(lpdf - lccdf);
      return {a, a_prime, b_prime};
    }
    case FamilyKind::NormalKnownVar:
    case FamilyKind::NormalUnknownVar: {
      double p = phi_of(fam, phi);
      return {p * h, p, -p * h};
    }
  }
  return {0, 0, 0};
}

double mean(const GlmFamily& fam, double h) {
  check_finite(h);
  switch (fam.kind) {
    case FamilyKind::Poisson:
    case FamilyKind::ExponentialLogLink: return std::exp(h);
    case FamilyKind::Logistic: return 1.0 / (1.0 + std::exp(-h));
    case FamilyKind::Probit: return norm_cdf(h);
    default: return h;
  }
}

double second_moment(const GlmFamily& fam, double h, std::optional<double> phi) {
  double mu = mean(fam, h);
  switch (fam.kind) {
    case FamilyKind::Logistic:
    case FamilyKind::Probit: return mu;  // y^2 = y on {0,1}
    case FamilyKind::Poisson: return mu + mu * mu;
    case FamilyKind::ExponentialLogLink: return 2.0 * mu * mu;
    default: return h * h + 1.0 / phi_of(fam, phi);
  }
}

double hellinger_affinity_normal(double h1, double phi1, double h2, double phi2) {
  double s1 = 1.0 / phi1, s2 = 1.0 / phi2;  // variances
  double d = h1 - h2;
  return std::sqrt(2.0 * std::sqrt(s1 * s2) / (s1 + s2)) * std::exp(-d * d / (4.0 * (s1 + s2)));
}

double hellinger_affinity(const GlmFamily& fam, double h1, double h2) {
  check_finite(h1);
  check_finite(h2);
  switch (fam.kind) {
    case FamilyKind::NormalKnownVar: {
      double d = h1 - h2;
      return std::exp(-fam.dispersion * d * d / 8.0);
    }
    case FamilyKind::NormalUnknownVar:
      throw std::invalid_argument(
          "NormalUnknownVar affinity needs two dispersions; use hellinger_affinity_normal");
    case FamilyKind::Poisson: {
      double d = std::exp(0.5 * h1) - std::exp(0.5 * h2);
      return std::exp(-0.5 * d * d);
    }
    case FamilyKind::Logistic:
    case FamilyKind::Probit: {
      double m1 = mean(fam, h1), m2 = mean(fam, h2);
      return std::sqrt(m1 * m2) + std::sqrt((1.0 - m1) * (1.0 - m2));
    }
    case FamilyKind::ExponentialLogLink: {
      double m1 = std::exp(h1), m2 = std::exp(h2);
      return 2.0 * std::sqrt(m1 * m2) / (m1 + m2);
    }
  }
  return std::numeric_limits<double>::quiet_NaN();
}

double sample_response(const GlmFamily& fam, double h, Rng& rng, std::optional<double> phi) {
  check_finite(h);
  switch (fam.kind) {
    case FamilyKind::Logistic:
    case FamilyKind::Probit: {
      std::uniform_real_distribution<double> u(0.0, 1.0);
      return u(rng) < mean(fam, h) ? 1.0 : 0.0;
    }
    case FamilyKind::Poisson: {
      std::poisson_distribution<long> pois(std::exp(h));
      return static_cast<double>(pois(rng));
    }
    case FamilyKind::ExponentialLogLink: {
      std::exponential_distribution<double> e(std::exp(-h));
      return e(rng);
    }
    case FamilyKind::NormalKnownVar:
    case FamilyKind::NormalUnknownVar: {
      double p = phi_of(fam, phi);
      std::normal_distribution<double> z(0.0, 1.0);
      return h + z(rng) / std::sqrt(p);
    }
  }
  return std::numeric_limits<double>::quiet_NaN();
}

}  // namespace bvsglm
