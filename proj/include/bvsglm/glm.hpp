#pragma once

#include <optional>
#include <stdexcept>
#include <string>

#include "bvsglm/rng.hpp"

namespace bvsglm {

enum class FamilyKind {
  NormalKnownVar,
  NormalUnknownVar,
  Logistic,
  Probit,
  Poisson,
  ExponentialLogLink,
};

enum class ResponseMeasure {
  CountingBinary,      // {0,1}
  CountingNonnegInt,   // {0,1,2,...}
  LebesgueReals,       // (-inf,inf)
  LebesguePositive,    // (0,inf)
};

std::string family_name(FamilyKind kind);
ResponseMeasure response_measure_for(FamilyKind kind);

/// One-parameter exponential family f(y,h) = exp{a(h)y + b(h) + c(y)} with
/// linear parameter h = x^T beta.  Immutable value type.
struct GlmFamily {
  FamilyKind kind;
  double dispersion = 1.0;  // inverse variance, NormalKnownVar only

  static GlmFamily normal_known_var(double phi) {
    if (!(phi > 0.0)) throw std::invalid_argument("dispersion must be positive");
    return {FamilyKind::NormalKnownVar, phi};
  }
  static GlmFamily normal_unknown_var() { return {FamilyKind::NormalUnknownVar, 1.0}; }
  static GlmFamily logistic() { return {FamilyKind::Logistic, 1.0}; }
  static GlmFamily probit() { return {FamilyKind::Probit, 1.0}; }
  static GlmFamily poisson() { return {FamilyKind::Poisson, 1.0}; }
  static GlmFamily exponential_log_link() { return {FamilyKind::ExponentialLogLink, 1.0}; }

  ResponseMeasure response_measure() const { return response_measure_for(kind); }
  bool is_binary() const { return kind == FamilyKind::Logistic || kind == FamilyKind::Probit; }
  bool is_normal() const {
    return kind == FamilyKind::NormalKnownVar || kind == FamilyKind::NormalUnknownVar;
  }
};

struct NaturalTerms {
  double a;        // a(h)
  double a_prime;  // a'(h)
  double b_prime;  // b'(h)
};

/// ln f(y,h).  For NormalUnknownVar, phi must be supplied per call; for
/// NormalKnownVar a supplied phi overrides the family dispersion.
double log_density(const GlmFamily& fam, double y, double h,
                   std::optional<double> phi = std::nullopt);

NaturalTerms natural_terms(const GlmFamily& fam, double h,
                           std::optional<double> phi = std::nullopt);

/// Mean function psi(h) = -b'(h)/a'(h).
double mean(const GlmFamily& fam, double h);

/// Second moment of y given h: integral of y^2 f(y,h).
double second_moment(const GlmFamily& fam, double h, std::optional<double> phi = std::nullopt);

/// Hellinger affinity  integral of sqrt(f(.,h1) f(.,h2))  in closed form.
/// Per-x squared Hellinger distance is 2 - 2*affinity.
double hellinger_affinity(const GlmFamily& fam, double h1, double h2);

/// Unequal-dispersion normal affinity (variances 1/phi1, 1/phi2).
double hellinger_affinity_normal(double h1, double phi1, double h2, double phi2);

double sample_response(const GlmFamily& fam, double h, Rng& rng,
                       std::optional<double> phi = std::nullopt);

/// Numerically stable ln Phi(h) (standard normal CDF in log space).
double log_norm_cdf(double h);
/// Standard normal CDF / pdf.
double norm_cdf(double h);
double norm_pdf(double h);

}  // namespace bvsglm
