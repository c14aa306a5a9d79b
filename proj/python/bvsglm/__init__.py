"""Bayesian variable selection for high-dimensional GLMs."""

from ._bvsglm import (
    Chain,
    ChebyshevResult,
    ConfigError,
    Dataset,
    DispersionPrior,
    ExperimentConfig,
    ExperimentResult,
    GlmFamily,
    HellingerEstimate,
    McmcConfig,
    ModelIndicator,
    PosteriorDraw,
    PriorSpec,
    TrueModel,
    VPolicy,
    XLaw,
    XSample,
    canonical_json,
    chebyshev_check,
    conjugate_log_marginal,
    d_growth,
    delta,
    hellinger_affinity,
    hellinger_affinity_normal,
    hellinger_distance_full,
    inclusion_probabilities,
    log_density,
    make_x_sample,
    mcmc_run,
    mean,
    parse_config,
    posterior_hellinger,
    run_experiment,
)

__all__ = [
    "Chain",
    "ChebyshevResult",
    "ConfigError",
    "Dataset",
    "DispersionPrior",
    "ExperimentConfig",
    "ExperimentResult",
    "GlmFamily",
    "HellingerEstimate",
    "McmcConfig",
    "ModelIndicator",
    "PosteriorDraw",
    "PriorSpec",
    "TrueModel",
    "VPolicy",
    "XLaw",
    "XSample",
    "canonical_json",
    "chebyshev_check",
    "conjugate_log_marginal",
    "d_growth",
    "delta",
    "hellinger_affinity",
    "hellinger_affinity_normal",
    "hellinger_distance_full",
    "inclusion_probabilities",
    "log_density",
    "make_x_sample",
    "mcmc_run",
    "mean",
    "parse_config",
    "posterior_hellinger",
    "run_experiment",
]
