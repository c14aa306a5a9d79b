#pragma once

#include <Eigen/Dense>
#include <map>
#include <optional>
#include <vector>

#include "bvsglm/glm.hpp"
#include "bvsglm/prior.hpp"

namespace bvsglm {

/// Bounded-design regression data: |X(i,j)| <= 1.
struct Dataset {
  Eigen::MatrixXd X;  // n x K
  Eigen::VectorXd y;
  GlmFamily family;

  int n() const { return static_cast<int>(X.rows()); }
  int K() const { return static_cast<int>(X.cols()); }
  void validate() const;
};

struct PosteriorDraw {
  ModelIndicator gamma;
  Eigen::VectorXd beta;
  std::optional<double> phi;
  double log_post = 0.0;  // cached log unnormalized posterior
};

struct McmcConfig {
  long iterations = 20000;
  long burn_in = 5000;
  int thin = 10;
  double p_add = 0.4, p_delete = 0.4, p_swap = 0.2;
  double rw_step = 0.25;
  std::uint64_t seed = 0;

  void validate() const;
};

struct MoveStats {
  long proposed = 0;
  long accepted = 0;
  double rate() const { return proposed ? double(accepted) / double(proposed) : 0.0; }
};

struct Chain {
  std::vector<PosteriorDraw> draws;
  MoveStats add, del, swap, walk;
  McmcConfig config;
};

/// log prior + log likelihood for a state; nullopt when |gamma| > r_max.
std::optional<double> log_unnormalized_posterior(const Dataset& data, const PriorSpec& spec,
                                                 const ModelIndicator& gamma,
                                                 const Eigen::VectorXd& beta,
                                                 std::optional<double> phi = std::nullopt);

/// Closed-form ln integral of the likelihood against the slab (and the gamma
/// dispersion prior, when present).  Normal families only.
double conjugate_log_marginal(const Dataset& data, const PriorSpec& spec,
                              const ModelIndicator& gamma);

/// Exact conditional posterior draw of (beta[, phi]) given gamma; normal
/// families only.
std::pair<Eigen::VectorXd, std::optional<double>> sample_conditional_coeffs(
    const Dataset& data, const PriorSpec& spec, const ModelIndicator& gamma, Rng& rng);

/// Reversible-jump MH over (gamma, beta[, phi]); for normal families the
/// gamma-moves are marginalized via conjugate_log_marginal.
Chain mcmc_run(const Dataset& data, const PriorSpec& spec, const McmcConfig& config);

struct EnumerationOptions {
  long mc_draws = 200000;  // prior-MC draws per model (non-conjugate path)
  std::uint64_t seed = 20070815;
};

struct EnumeratedPosterior {
  std::map<ModelIndicator, double> prob;
  std::map<ModelIndicator, double> log_marginal_se;  // nonzero only for prior-MC marginals
};

/// Exact normalized model posterior over all |gamma| <= r_max.  Guards:
/// K <= 15; for non-conjugate families additionally r_max <= 3.
EnumeratedPosterior enumerate_posterior(const Dataset& data, const PriorSpec& spec,
                                        const EnumerationOptions& opts = {});

Eigen::VectorXd inclusion_probabilities(const Chain& chain, int K);

std::map<ModelIndicator, double> model_frequencies(const Chain& chain);

double total_variation(const std::map<ModelIndicator, double>& a,
                       const std::map<ModelIndicator, double>& b);

}  // namespace bvsglm
