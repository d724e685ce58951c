"""Semiparametric hazard regression for lifetimes observed under mixed
censoring: exact events, censored durations and current-status checks
in one sample.

Two models are provided.  The right-censoring model combines exactly
observed lifetimes (status 0), right-censored ones (status 1) and
current-status observations known only to bound the lifetime from above
(status 2); the proportional-hazards coefficient is estimated by
maximizing an explicit likelihood-type criterion, the baseline
cumulative hazard follows in closed form, and conditional survival
curves and cure rates come from product-integration.  The
left-censoring model mirrors everything through the reverse hazard,
yielding distribution curves and zero-lifetime probabilities.
Uncertainty is quantified by a multiplier (weighted) bootstrap.
"""

from ._backend import BACKEND
from .bootstrap import (
    ConfidenceIntervals,
    MultiplierDraws,
    bootstrap,
    confidence_intervals,
    draw_weights,
)
from .core import (
    AUTO,
    Dataset,
    FitConfig,
    Model,
    Observation,
    StepFunction,
    Theta,
    resolve_truncation,
    serialize_records,
    validate,
)
from .empirical import (
    combined_risk,
    counting_process,
    cumulative_hazard,
    group_denominators,
    reverse_hazard,
    risk_sum,
)
from .estimator import (
    ConditionalCurve,
    FitResult,
    cure_rate,
    distribution_curve,
    fit,
    survival_curve,
    zero_prob,
)
from .io import read_dataset, read_scenario, write_dataset, write_results, write_scenario
from .likelihood import (
    ScoreReport,
    estimate_p,
    evaluate,
    kim_loglik,
    loglik_left,
    loglik_right,
    score_jacobian,
    score_left,
    score_right,
)
from .simulate import (
    CovariateLaw,
    Law,
    ScenarioSpec,
    baseline_cum_hazard,
    baseline_reverse_hazard,
    population_oracle,
    simulate_dataset,
    simulate_left,
    simulate_right,
    simulate_with_latents,
)

__version__ = "0.1.0"

__all__ = [
    "AUTO",
    "BACKEND",
    "ConditionalCurve",
    "ConfidenceIntervals",
    "CovariateLaw",
    "Dataset",
    "FitConfig",
    "FitResult",
    "Law",
    "Model",
    "MultiplierDraws",
    "Observation",
    "ScenarioSpec",
    "ScoreReport",
    "StepFunction",
    "Theta",
    "bootstrap",
    "baseline_cum_hazard",
    "baseline_reverse_hazard",
    "combined_risk",
    "confidence_intervals",
    "counting_process",
    "cumulative_hazard",
    "cure_rate",
    "distribution_curve",
    "draw_weights",
    "estimate_p",
    "evaluate",
    "fit",
    "group_denominators",
    "kim_loglik",
    "loglik_left",
    "loglik_right",
    "population_oracle",
    "read_dataset",
    "read_scenario",
    "resolve_truncation",
    "reverse_hazard",
    "risk_sum",
    "score_jacobian",
    "score_left",
    "score_right",
    "serialize_records",
    "simulate_dataset",
    "simulate_left",
    "simulate_right",
    "simulate_with_latents",
    "survival_curve",
    "validate",
    "write_dataset",
    "write_results",
    "write_scenario",
    "zero_prob",
]
