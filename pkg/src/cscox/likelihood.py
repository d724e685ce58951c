"""Likelihood-type criteria and their analytic gradients.

``estimate_p`` is the closed-form status-count ratio.  ``evaluate``
computes the approximate log-likelihood of the model (three summands:
event term, current-status term, compensator term) together with its
exact gradient in beta; ``loglik_*`` / ``score_*`` are thin wrappers.
``kim_loglik`` evaluates the full-likelihood criterion for a supplied
step hazard, as a diagnostic only.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from ._backend import left_loglik_score, right_loglik_score
from .core import Dataset, Model, StepFunction
from .errors import (
    ClampedProbabilityWarning,
    DegenerateCurrentStatus,
    DroppedTermsWarning,
    MissingJumpAtEvent,
    ZeroRiskSet,
)


@dataclass(frozen=True)
class ScoreReport:
    """Value and gradient of the criterion at one parameter point.

    ``terms`` holds the three summands with signs included, so that
    ``sum(terms) == value``: the event term, the current-status term and
    the negated compensator term.  ``n_dropped`` counts current-status
    records whose inner integral was empty (their log(0) term is
    dropped; the truncation bound exists to control these).
    """

    value: float
    gradient: np.ndarray
    terms: tuple
    n_event_terms: int
    n_cs_terms: int
    n_dropped: int


def estimate_p(dataset: Dataset, p_floor: float = 1e-3, weights=None) -> float:
    """Share of exactly observed lifetimes among the records that could
    have produced one: statuses {0, 2} for the right model, {0, 1} for
    the left.  Clamped below at ``p_floor`` with a warning."""
    w = np.ones(dataset.n) if weights is None else np.asarray(weights, dtype=float)
    num = float(np.sum(w[dataset.a == 0]))
    other = 2 if dataset.model is Model.RIGHT_CS else 1
    den = num + float(np.sum(w[dataset.a == other]))
    if den <= 0:
        raise ZeroDivisionError("no weight on records with an observable lifetime")
    raw = num / den
    if raw < p_floor:
        warnings.warn(
            f"p estimate {raw:.3g} below the floor {p_floor}; clamped",
            ClampedProbabilityWarning,
            stacklevel=2,
        )
        return p_floor
    return min(raw, 1.0)


def _eval_kernel(dataset: Dataset, p, beta, trunc, weights, z=None):
    if not p > 0:
        raise ValueError("p must be positive")
    beta = np.ascontiguousarray(np.atleast_1d(beta), dtype=float)
    if beta.shape != (dataset.q,):
        raise ValueError(f"beta must have shape ({dataset.q},)")
    w = np.ones(dataset.n) if weights is None else np.ascontiguousarray(weights, dtype=float)
    z = dataset.z if z is None else z
    kernel = right_loglik_score if dataset.model is Model.RIGHT_CS else left_loglik_score
    out = kernel(
        dataset.x, dataset.a, z, dataset.grp_idx, dataset.grp_start,
        w, float(p), beta, float(trunc),
    )
    t1, t2, t3, grad, n_event, n_cs, n_dropped, bad = out
    if bad >= 0:
        raise ZeroRiskSet(float(dataset.x[dataset.grp_start[bad]]))
    return ScoreReport(
        value=t1 + t2 - t3,
        gradient=grad,
        terms=(t1, t2, -t3),
        n_event_terms=n_event,
        n_cs_terms=n_cs,
        n_dropped=n_dropped,
    )


def evaluate(dataset: Dataset, p, beta, trunc, weights=None, warn_dropped=True) -> ScoreReport:
    """Approximate log-likelihood and its beta-gradient at (p, beta).

    ``trunc`` is tau for the right model (terms with x <= tau enter) and
    rho for the left one (terms with x >= rho enter).
    """
    report = _eval_kernel(dataset, p, beta, trunc, weights)
    if warn_dropped and report.n_dropped:
        warnings.warn(
            f"{report.n_dropped} current-status record(s) precede every event "
            "time; their log(0) terms were dropped",
            DroppedTermsWarning,
            stacklevel=2,
        )
    return report


def loglik_right(dataset: Dataset, p, beta, tau, weights=None) -> float:
    if dataset.model is not Model.RIGHT_CS:
        raise ValueError("loglik_right needs a right-censoring dataset")
    return evaluate(dataset, p, beta, tau, weights).value


def loglik_left(dataset: Dataset, p, beta, rho, weights=None) -> float:
    if dataset.model is not Model.LEFT_CS:
        raise ValueError("loglik_left needs a left-censoring dataset")
    return evaluate(dataset, p, beta, rho, weights).value


def score_right(dataset: Dataset, p, beta, tau, weights=None) -> np.ndarray:
    if dataset.model is not Model.RIGHT_CS:
        raise ValueError("score_right needs a right-censoring dataset")
    return evaluate(dataset, p, beta, tau, weights).gradient


def score_left(dataset: Dataset, p, beta, rho, weights=None) -> np.ndarray:
    if dataset.model is not Model.LEFT_CS:
        raise ValueError("score_left needs a left-censoring dataset")
    return evaluate(dataset, p, beta, rho, weights).gradient


def score_jacobian(dataset: Dataset, p, beta, trunc, weights=None, step=1e-6):
    """Finite-difference derivatives of the score: (d/d beta, d/d p).

    Diagnostic only (the bootstrap never assembles these).  Returns a
    (q, q) matrix and a length-q vector.
    """
    beta = np.atleast_1d(np.asarray(beta, dtype=float))
    q = beta.size

    def s(pp, bb):
        return evaluate(dataset, pp, bb, trunc, weights, warn_dropped=False).gradient

    jac = np.empty((q, q))
    for j in range(q):
        e = np.zeros(q)
        e[j] = step
        jac[:, j] = (s(p, beta + e) - s(p, beta - e)) / (2 * step)
    dp = (s(p + step, beta) - s(p - step, beta)) / (2 * step)
    return jac, dp


def kim_loglik(dataset: Dataset, beta, hazard: StepFunction) -> float:
    """Log of the full-likelihood criterion for a supplied step hazard.

    The hazard must jump at every event time (the density factor is read
    as the jump there).  Never maximized here: with both censored and
    current-status records present the inner maximization over the
    hazard has no nondegenerate explicit solution, so this is exposed
    for diagnostics only.
    """
    beta = np.atleast_1d(np.asarray(beta, dtype=float))
    eta = dataset.z @ beta
    cum = np.concatenate([[0.0], np.cumsum(hazard.increments)])
    at = cum[np.searchsorted(hazard.times, dataset.x, side="right")]
    before = cum[np.searchsorted(hazard.times, dataset.x, side="left")]

    total = 0.0
    for i in range(dataset.n):
        ai = dataset.a[i]
        if ai == 0:
            j = np.searchsorted(hazard.times, dataset.x[i])
            if j >= hazard.times.size or hazard.times[j] != dataset.x[i]:
                raise MissingJumpAtEvent(i, float(dataset.x[i]))
            total += eta[i] + np.log(hazard.increments[j]) - np.exp(eta[i]) * before[i]
        elif ai == 1:
            total += -np.exp(eta[i]) * at[i]
        else:
            v = np.exp(eta[i]) * at[i]
            if v <= 0:
                raise DegenerateCurrentStatus(i)
            total += float(np.log(-np.expm1(-v)) if v < 0.6931471805599453
                           else np.log1p(-np.exp(-v)))
    return total
