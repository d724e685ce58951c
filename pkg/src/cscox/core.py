"""Domain types: observations, datasets, parameters, step functions.

A dataset holds lifetimes observed under a mixed censoring mechanism:
each record is a duration ``x``, a status ``a`` and a covariate vector
``z``.  Status 0 means the lifetime was observed exactly, status 1 that
it exceeds ``x`` and status 2 that it is at most ``x``.  Two latent
models are supported: right censoring combined with current-status
observations, and its left-censoring mirror.
"""

from __future__ import annotations

import enum
import warnings
from dataclasses import dataclass, field
from typing import NamedTuple, Sequence

import numpy as np

from .errors import (
    BadStatusCode,
    DegenerateDesignWarning,
    InconsistentCovariateDim,
    NoUncensoredEvents,
    NonFiniteValue,
    TruncationInfeasible,
)

AUTO = "auto"


class Model(str, enum.Enum):
    """Which censoring mechanism generated the data."""

    RIGHT_CS = "right-cs"
    LEFT_CS = "left-cs"

    def __str__(self):
        return self.value


class Observation(NamedTuple):
    """One record: duration, status code and covariate vector."""

    x: float
    a: int
    z: tuple


@dataclass(frozen=True)
class StepFunction:
    """Nondecreasing pure-jump function on [0, inf).

    ``times`` are strictly increasing nonnegative jump locations and
    ``increments`` the strictly positive jump sizes.  Evaluation at ``t``
    sums the increments with time <= t (so the value just before the
    first jump is 0).  ``tail`` sums the increments with time > t, the
    accumulation-from-the-right convention used by the left-censoring
    model's cumulative reverse hazard.
    """

    times: np.ndarray
    increments: np.ndarray

    def __post_init__(self):
        times = np.asarray(self.times, dtype=float)
        increments = np.asarray(self.increments, dtype=float)
        if times.shape != increments.shape or times.ndim != 1:
            raise ValueError("times and increments must be 1-d arrays of equal length")
        if times.size:
            if not np.all(np.isfinite(times)) or not np.all(np.isfinite(increments)):
                raise NonFiniteValue("step function with non-finite entries")
            if np.any(times < 0):
                raise ValueError("jump times must be nonnegative")
            if np.any(np.diff(times) <= 0):
                raise ValueError("jump times must be strictly increasing")
            if np.any(increments <= 0):
                raise ValueError("increments must be strictly positive")
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "increments", increments)

    def __call__(self, t):
        """Sum of increments at times <= t (vectorized)."""
        cum = np.concatenate([[0.0], np.cumsum(self.increments)])
        idx = np.searchsorted(self.times, np.asarray(t, dtype=float), side="right")
        out = cum[idx]
        return float(out) if np.isscalar(t) else out

    def tail(self, t):
        """Sum of increments at times strictly greater than t."""
        total = float(np.sum(self.increments))
        val = self.__call__(t)
        return total - val

    def total(self) -> float:
        return float(np.sum(self.increments))

    @property
    def n_jumps(self) -> int:
        return int(self.times.size)

    def __len__(self):
        return self.n_jumps


@dataclass(frozen=True)
class Theta:
    """Finite-dimensional parameter: success probability and regression
    coefficients, kept inside their admissible box."""

    p: float
    beta: np.ndarray
    p_floor: float = 1e-3
    beta_box: tuple = (-20.0, 20.0)

    def __post_init__(self):
        beta = np.atleast_1d(np.asarray(self.beta, dtype=float))
        if not np.all(np.isfinite(beta)):
            raise NonFiniteValue("beta has non-finite entries")
        lo, hi = self.beta_box
        if np.any(beta < lo) or np.any(beta > hi):
            raise ValueError(f"beta outside the box [{lo}, {hi}]")
        if not (self.p_floor <= self.p <= 1.0):
            raise ValueError(f"p={self.p} outside [{self.p_floor}, 1]")
        object.__setattr__(self, "beta", beta)

    @property
    def q(self) -> int:
        return int(self.beta.size)


@dataclass(frozen=True)
class FitConfig:
    """Fitting knobs: truncation, parameter box, optimizer tolerances."""

    tau: float | str = AUTO
    rho: float | str = AUTO
    beta_box: tuple = (-20.0, 20.0)
    p_floor: float = 1e-3
    grad_tol: float = 1e-8
    max_iter: int = 200
    n_random_starts: int = 4
    seed: int = 0
    tie_jitter: float | None = None


@dataclass(frozen=True)
class Dataset:
    """Validated, canonically sorted sample.

    Records are sorted by duration ascending with events first among
    ties (then by original position, so construction is deterministic).
    ``grp_start``/``grp_idx`` describe runs of tied durations; all
    empirical functionals are constant within a tie group.
    """

    x: np.ndarray
    a: np.ndarray
    z: np.ndarray
    model: Model
    grp_start: np.ndarray = field(repr=False, default=None)
    grp_idx: np.ndarray = field(repr=False, default=None)

    def __post_init__(self):
        if self.grp_start is None:
            starts = np.flatnonzero(np.concatenate([[True], np.diff(self.x) > 0]))
            object.__setattr__(self, "grp_start", starts.astype(np.int64))
            gidx = np.cumsum(np.concatenate([[0], (np.diff(self.x) > 0).astype(np.int64)]))
            object.__setattr__(self, "grp_idx", gidx.astype(np.int64))
        for name in ("x", "a", "z", "grp_start", "grp_idx"):
            arr = getattr(self, name)
            arr.setflags(write=False)

    @property
    def n(self) -> int:
        return int(self.x.size)

    @property
    def q(self) -> int:
        return int(self.z.shape[1])

    @property
    def n_groups(self) -> int:
        return int(self.grp_start.size)

    @property
    def z_bound(self) -> float:
        """Largest covariate norm in the sample (the empirical bound c)."""
        return float(np.max(np.linalg.norm(self.z, axis=1)))

    def status_counts(self) -> dict:
        return {k: int(np.sum(self.a == k)) for k in (0, 1, 2)}

    @property
    def observations(self) -> tuple:
        """Records as Observation tuples, in canonical order."""
        return tuple(
            Observation(float(xi), int(ai), tuple(zi))
            for xi, ai, zi in zip(self.x, self.a, self.z)
        )


def validate(
    records: Sequence,
    model: Model | str,
    *,
    tie_jitter: float | None = None,
    min_variance: float = 1e-12,
) -> Dataset:
    """Check raw (x, a, z) records and build a canonical Dataset.

    Records are sorted by (x, a, original index): ties in x keep events
    ahead of censorings, matching the closed risk-set indicator.  An
    optional ``tie_jitter`` adds ``i * tie_jitter`` to the i-th record's
    duration before sorting, for reproducibility studies on tied data.

    Raises NonFiniteValue, BadStatusCode, InconsistentCovariateDim or
    NoUncensoredEvents; a covariate variance matrix that is not
    positive definite only triggers a DegenerateDesignWarning.
    """
    model = Model(model)
    records = list(records)
    if not records:
        raise NoUncensoredEvents("empty record list")

    n = len(records)
    first_z = np.atleast_1d(np.asarray(records[0][2], dtype=float))
    q = first_z.size
    if q < 1:
        raise InconsistentCovariateDim("at least one covariate is required")

    x = np.empty(n)
    a = np.empty(n, dtype=np.int64)
    z = np.empty((n, q))
    for i, rec in enumerate(records):
        xi, ai, zi = rec
        zi = np.atleast_1d(np.asarray(zi, dtype=float))
        if zi.size != q:
            raise InconsistentCovariateDim(
                f"record {i}: covariate length {zi.size} != {q}"
            )
        xi = float(xi)
        if not np.isfinite(xi) or xi < 0:
            raise NonFiniteValue(f"record {i}: duration {xi!r} is not a finite nonnegative real")
        if not np.all(np.isfinite(zi)):
            raise NonFiniteValue(f"record {i}: covariates contain non-finite values")
        ai_f = float(ai)
        if ai_f not in (0.0, 1.0, 2.0) or ai_f != int(ai_f):
            raise BadStatusCode(f"record {i}: status {ai!r} not in {{0, 1, 2}}")
        x[i] = xi
        a[i] = int(ai_f)
        z[i] = zi

    if tie_jitter is not None:
        if tie_jitter <= 0:
            raise ValueError("tie_jitter must be positive")
        x = x + np.arange(n) * tie_jitter

    if not np.any(a == 0):
        raise NoUncensoredEvents("no record with status 0; p and the hazard are undefined")

    order = np.lexsort((np.arange(n), a, x))
    x, a, z = x[order], a[order], z[order]

    if n < 2:
        degenerate = True
    else:
        cov = np.cov(z, rowvar=False).reshape(q, q)
        degenerate = bool(
            np.min(np.linalg.eigvalsh(cov)) <= min_variance * max(1.0, np.max(np.abs(cov)))
        )
    if degenerate:
        warnings.warn(
            "covariate sample variance matrix is not positive definite; "
            "coefficients may not be identifiable",
            DegenerateDesignWarning,
            stacklevel=2,
        )

    return Dataset(x=x, a=a, z=z, model=model)


def resolve_truncation(dataset: Dataset, config: FitConfig) -> float:
    """Resolve the truncation bound (tau for the right model, rho for
    the left one).

    Auto picks the largest (right) or smallest (left) exactly observed
    duration.  A user-supplied bound must leave empirical risk mass at
    the bound: some record with x >= tau and status in {0, 1} (right),
    or x <= rho and status in {0, 2} (left).
    """
    events = dataset.x[dataset.a == 0]
    if dataset.model is Model.RIGHT_CS:
        value = config.tau
        if value == AUTO:
            return float(events.max())
        value = float(value)
        if not np.any((dataset.x >= value) & (dataset.a != 2)):
            raise TruncationInfeasible(
                f"tau={value}: no observation with x >= tau and status in {{0, 1}}; "
                "the empirical risk mass at the bound is zero"
            )
        return value
    value = config.rho
    if value == AUTO:
        return float(events.min())
    value = float(value)
    if not np.any((dataset.x <= value) & (dataset.a != 1)):
        raise TruncationInfeasible(
            f"rho={value}: no observation with x <= rho and status in {{0, 2}}; "
            "the empirical risk mass at the bound is zero"
        )
    return value


def serialize_records(dataset: Dataset) -> list:
    """Dataset back to plain (x, a, z) triples; validate() inverts this."""
    return [(float(xi), int(ai), tuple(map(float, zi)))
            for xi, ai, zi in zip(dataset.x, dataset.a, dataset.z)]
