"""Bayesian adaptive pooled testing.

Exact posterior inference over infection states, information-optimal pool
selection, sample-complexity bounds, simulation harnesses, and a live
session service for driving real campaigns.
"""

from pooltest.bounds import (
    ComplexityReport,
    GaussianFit,
    InfeasibleBoundError,
    InsufficientDataError,
    MinorantMoments,
    J_quadratic,
    chebyshev_curve,
    complexity_report,
    estimate_nu,
    minorant_moments,
    mismatch_alpha,
    quadratic_coeff,
    sample_complexity,
)
from pooltest.config import ConfigError, RunConfig, load_config, parse_config
from pooltest.design import (
    DesignTarget,
    Selection,
    StoppingConfig,
    information_ledger,
    optimal_f,
    predictive_positive,
    select_group,
    stopping_met,
    utility,
)
from pooltest.model import (
    MAX_POPULATION,
    InconsistentEvidenceError,
    Posterior,
    Prior,
    TestParams,
    TestRecord,
    binary_entropy,
    group_from_members,
    group_hit,
    group_members,
    likelihood,
    prior_entropy,
)
from pooltest.simulate import (
    CellReport,
    EpisodeConfig,
    EpisodeTrace,
    StepRecord,
    StopStat,
    SweepReport,
    UndefinedAUCError,
    auc,
    make_stopping,
    run_episode,
    run_sweep,
    sample_ground_truth,
    simulate_outcome,
)

__all__ = [
    "MAX_POPULATION",
    "CellReport",
    "ComplexityReport",
    "ConfigError",
    "DesignTarget",
    "EpisodeConfig",
    "EpisodeTrace",
    "GaussianFit",
    "InconsistentEvidenceError",
    "InfeasibleBoundError",
    "InsufficientDataError",
    "J_quadratic",
    "MinorantMoments",
    "Posterior",
    "Prior",
    "RunConfig",
    "Selection",
    "StepRecord",
    "StopStat",
    "StoppingConfig",
    "SweepReport",
    "TestParams",
    "TestRecord",
    "UndefinedAUCError",
    "auc",
    "binary_entropy",
    "chebyshev_curve",
    "complexity_report",
    "estimate_nu",
    "group_from_members",
    "group_hit",
    "group_members",
    "information_ledger",
    "likelihood",
    "load_config",
    "make_stopping",
    "minorant_moments",
    "mismatch_alpha",
    "optimal_f",
    "parse_config",
    "predictive_positive",
    "prior_entropy",
    "quadratic_coeff",
    "run_episode",
    "run_sweep",
    "sample_complexity",
    "sample_ground_truth",
    "select_group",
    "simulate_outcome",
    "stopping_met",
    "utility",
]

__version__ = "0.1.0"
