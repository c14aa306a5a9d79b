#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "bvsglm/conditions.hpp"
#include "bvsglm/estimators.hpp"
#include "bvsglm/graphical.hpp"
#include "bvsglm/hellinger.hpp"
#include "bvsglm/posterior.hpp"

namespace bvsglm {

/// Configuration problems (parse errors, constraint violations); the CLI maps
/// these to exit code 2.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class ExperimentKind { Fit, Counterexample, RateSweep, Audit, Graph };

std::string experiment_name(ExperimentKind k);

struct GrowthSpec {
  // power: coef * n^exponent; log_power: coef * (ln n)^exponent;
  // exp_power: e^{coef * n^exponent}.  Values are rounded up.
  std::string kind = "power";
  double coef = 1.0;
  double exponent = 1.0;

  double operator()(double n) const;
};

struct TruthConfig {
  BetaStarGen beta_star = BetaStarGen::geometric_gen(3.0, 0.5);
  std::string x_law = "uniform_cube";  // or "indicator"
  double dispersion = 1.0;             // residual precision for normal truths
};

struct GraphConfig {
  int nodes = 20;
  double rho = 0.5;
  double threshold = 0.5;
  std::string rule = "and";
  int n = 400;
  int x_mc = 300;           // MC points for the conditional distance
  int mix_components = 150; // chain draws kept per node when scoring
};

struct SelectionConfig {
  std::string rule = "all";
  int m = 10;
  double t = 0.05;

  SelectionRule to_rule() const;
};

struct RateGridConfig {
  std::vector<long> n_grid;
  GrowthSpec K_growth{"power", 1.0, 2.0};
  GrowthSpec r_growth{"log_power", 1.0, 1.0};
  GrowthSpec rbar_growth{"log_power", 1.0, 1.5};
  double xi = 0.5, k = 1.1, b = 0.1, alpha = 2.0, delta = 2.0;
  double C = 1.0, C_prime = 1.0, B = 1.0, v = 1.0;
  double eta = 0.5;

  RateConfig to_rate_config(const GlmFamily& fam) const;
};

struct ExperimentConfig {
  ExperimentKind experiment = ExperimentKind::Fit;
  std::uint64_t seed = 1;
  int replicates = 1;
  int threads = 1;
  GlmFamily family = GlmFamily::logistic();
  TruthConfig truth;
  int n = 100;
  int K = 20;
  PriorSpec prior;
  McmcConfig mcmc;
  int x_draws = 20000;
  long counterexample_draws = 10000;
  SelectionConfig selection;
  RateGridConfig rate;
  GraphConfig graph;
  std::string out_dir = ".";
};

/// Strict JSON parse: defaults applied, unknown keys rejected with
/// path-qualified messages, cross-field constraints enforced.
ExperimentConfig parse_config(const std::string& json_text);
ExperimentConfig parse_config_file(const std::string& path);

/// Canonical serialization (sorted keys, defaults materialized); equal
/// configs produce identical text.
std::string canonical_json(const ExperimentConfig& config);
std::uint64_t config_hash(const ExperimentConfig& config);

struct ExperimentResult {
  std::vector<std::string> files;
  bool check_passed = true;
  std::string check_detail;
  // rate_sweep extras
  double slope = 0.0;
  double slope_se = 0.0;
};

ExperimentResult run_experiment(const ExperimentConfig& config);

/// Least-squares line fit; returns (slope, se of slope).
std::pair<double, double> ols_slope(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace bvsglm
