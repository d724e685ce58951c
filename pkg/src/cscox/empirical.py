"""Empirical functionals of a dataset.

Counting processes, exp(beta'z)-weighted risk sums and the plug-in
cumulative (respectively reverse) hazard step functions.  Everything is
a finite weighted sum over the records; optional per-observation
weights re-weight every empirical average, which is how the multiplier
bootstrap perturbs the sample.

Risk sums are evaluated at distinct observed times through one scan of
the sorted sample (group subtotals, then a prefix or suffix
accumulation), so a full hazard costs O(n q) instead of the naive
O(n^2).
"""

from __future__ import annotations

import numpy as np

from .core import Dataset, Model, StepFunction, Theta
from .errors import ZeroRiskSet


def _weights(dataset: Dataset, weights) -> np.ndarray:
    if weights is None:
        return np.ones(dataset.n)
    w = np.ascontiguousarray(weights, dtype=float)
    if w.shape != (dataset.n,):
        raise ValueError(f"weights must have shape ({dataset.n},)")
    if np.any(w < 0) or not np.all(np.isfinite(w)):
        raise ValueError("weights must be finite and nonnegative")
    return w


def counting_process(dataset: Dataset, k: int, weights=None) -> StepFunction:
    """N_{n,k}(t): weighted share of records with x <= t and status k,
    as a step function with one jump per distinct such time."""
    w = _weights(dataset, weights)
    mask = dataset.a == k
    jumps = np.zeros(dataset.n_groups)
    np.add.at(jumps, dataset.grp_idx[mask], w[mask])
    keep = jumps > 0
    return StepFunction(dataset.x[dataset.grp_start[keep]], jumps[keep] / dataset.n)


def risk_sum(dataset: Dataset, t: float, beta, k: int, l: int = 0, weights=None):
    """Weighted exp(beta'z) risk sum of order l in {0, 1} for status k.

    Right model: records with x >= t enter; left model: records with
    x <= t.  Returns a scalar for l=0 and a length-q vector for l=1,
    zero on an empty risk set.
    """
    if l not in (0, 1):
        raise ValueError("l must be 0 or 1")
    w = _weights(dataset, weights)
    beta = np.atleast_1d(np.asarray(beta, dtype=float))
    if dataset.model is Model.RIGHT_CS:
        mask = (dataset.x >= t) & (dataset.a == k)
    else:
        mask = (dataset.x <= t) & (dataset.a == k)
    u = w[mask] * np.exp(dataset.z[mask] @ beta)
    if l == 0:
        return float(np.sum(u)) / dataset.n
    return (u[:, None] * dataset.z[mask]).sum(axis=0) / dataset.n


def combined_risk(dataset: Dataset, t: float, p: float, beta, l: int = 0, weights=None):
    """Combined risk denominator: status-0 sum plus p times the sum of
    the censored statuses sharing its risk-set direction (status 1 for
    the right model, status 2 for the left one)."""
    other = 1 if dataset.model is Model.RIGHT_CS else 2
    return (
        risk_sum(dataset, t, beta, 0, l, weights)
        + p * risk_sum(dataset, t, beta, other, l, weights)
    )


def _group_event_mass(dataset: Dataset, w: np.ndarray) -> np.ndarray:
    mass = np.zeros(dataset.n_groups)
    mask = dataset.a == 0
    np.add.at(mass, dataset.grp_idx[mask], w[mask])
    return mass


def group_denominators(dataset: Dataset, p: float, beta, weights=None) -> np.ndarray:
    """Combined risk denominator at every distinct observed time, in one
    scan.  Entry g is E_n^{(0)} (right) or L_n^{(0)} (left) at the g-th
    distinct time."""
    w = _weights(dataset, weights)
    beta = np.atleast_1d(np.asarray(beta, dtype=float))
    u = w * np.exp(dataset.z @ beta)
    u0 = np.where(dataset.a == 0, u, 0.0)
    if dataset.model is Model.RIGHT_CS:
        uo = np.where(dataset.a == 1, u, 0.0)
        s0 = np.cumsum(np.add.reduceat(u0, dataset.grp_start)[::-1])[::-1]
        so = np.cumsum(np.add.reduceat(uo, dataset.grp_start)[::-1])[::-1]
    else:
        uo = np.where(dataset.a == 2, u, 0.0)
        s0 = np.cumsum(np.add.reduceat(u0, dataset.grp_start))
        so = np.cumsum(np.add.reduceat(uo, dataset.grp_start))
    return (s0 + p * so) / dataset.n


def _theta(theta) -> tuple:
    if isinstance(theta, Theta):
        return float(theta.p), theta.beta
    p, beta = theta
    return float(p), np.atleast_1d(np.asarray(beta, dtype=float))


def cumulative_hazard(dataset: Dataset, theta, tau: float, weights=None) -> StepFunction:
    """Plug-in baseline cumulative hazard: one jump per distinct event
    time s <= tau, of size dN(s) / E_n^{(0)}(s; p, beta).

    Raises ZeroRiskSet when a jump inside [0, tau] meets a nonpositive
    denominator (the truncation is too wide for the sample).
    """
    if dataset.model is not Model.RIGHT_CS:
        raise ValueError("cumulative_hazard applies to the right-censoring model")
    p, beta = _theta(theta)
    w = _weights(dataset, weights)
    denom = group_denominators(dataset, p, beta, w)
    mass = _group_event_mass(dataset, w)
    times = dataset.x[dataset.grp_start]
    keep = (mass > 0) & (times <= tau)
    bad = keep & ~(denom > 0)
    if np.any(bad):
        raise ZeroRiskSet(float(times[np.argmax(bad)]))
    return StepFunction(times[keep], (mass[keep] / dataset.n) / denom[keep])


def reverse_hazard(dataset: Dataset, theta, rho: float, weights=None) -> StepFunction:
    """Reverse-hazard increments dN(s) / L_n^{(0)}(s; p, beta) at the
    distinct event times s >= rho.

    The cumulative version accumulates from the right: evaluate the
    returned step function with ``.tail(t)``.
    """
    if dataset.model is not Model.LEFT_CS:
        raise ValueError("reverse_hazard applies to the left-censoring model")
    p, beta = _theta(theta)
    w = _weights(dataset, weights)
    denom = group_denominators(dataset, p, beta, w)
    mass = _group_event_mass(dataset, w)
    times = dataset.x[dataset.grp_start]
    keep = (mass > 0) & (times >= rho)
    bad = keep & ~(denom > 0)
    if np.any(bad):
        raise ZeroRiskSet(float(times[np.argmax(bad)]))
    return StepFunction(times[keep], (mass[keep] / dataset.n) / denom[keep])
