"""Multiplier (weighted) bootstrap by re-running the fit pipeline.

Each replicate draws i.i.d. positive weights, normalizes them to sample
mean one and refits the whole pipeline with every empirical average
re-weighted: the p count ratio, the counting process, the risk sums and
the hazard.  The replicate spread approximates the joint sampling law
of (p, beta, hazard, curves); intervals are symmetric percentiles.
"""

from __future__ import annotations

import os
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from .core import Dataset, FitConfig, Model
from .errors import BootstrapDegenerate, ClampedProbabilityWarning, InsufficientReplicates
from .estimator import FitResult, distribution_curve, fit, survival_curve

WEIGHT_LAWS = ("exponential", "gaussian", "ones")
THREADS_ENV = "CSCOX_THREADS"


@dataclass(frozen=True)
class MultiplierDraws:
    """Replicate estimates from the weighted bootstrap.

    ``hazard`` rows hold the replicate cumulative hazard on the shared
    grid ``hazard_times`` (the base fit's jump times); for the left
    model these are tail accumulations.  ``curves`` is an optional
    (n_z, B, n_times) array of conditional curves.  ``failed`` flags
    replicates whose optimizer did not reach the gradient tolerance;
    their estimates are still recorded.
    """

    seed: int
    weight_law: str
    p: np.ndarray
    beta: np.ndarray
    hazard_times: np.ndarray
    hazard: np.ndarray
    failed: np.ndarray
    curve_z: np.ndarray | None = None
    curve_times: np.ndarray | None = None
    curves: np.ndarray | None = None

    @property
    def n_replicates(self) -> int:
        return int(self.p.size)


def draw_weights(law: str, n: int, rng) -> np.ndarray:
    """One replicate's weights: positive, sample mean exactly one."""
    if law == "exponential":
        w = rng.standard_exponential(n)
        return w / w.mean()
    if law == "gaussian":
        xi = rng.standard_normal(n)
        w = 1.0 + xi - xi.mean()
        neg = int(np.sum(w < 0))
        if neg:
            warnings.warn(
                f"{neg} gaussian multiplier weight(s) were negative; floored "
                "at 0 and renormalized",
                ClampedProbabilityWarning,
                stacklevel=2,
            )
            w = np.maximum(w, 0.0)
        return w / w.mean()
    if law == "ones":
        return np.ones(n)
    raise ValueError(f"unknown weight law {law!r}; expected one of {WEIGHT_LAWS}")


def _replicate_config(config: FitConfig, base: FitResult) -> FitConfig:
    # pin the replicate truncation to the base fit's resolved bound
    if base.model is Model.RIGHT_CS:
        return replace(config, tau=base.truncation)
    return replace(config, rho=base.truncation)


def _run_replicate(args):
    dataset, config, base, law, seed_seq, curve_z, curve_times = args
    rng = np.random.default_rng(seed_seq)
    w = draw_weights(law, dataset.n, rng)
    try:
        res = fit(dataset, config, weights=w, starts=[base.theta.beta])
    except Exception:
        nan_h = np.full(base.hazard.n_jumps, np.nan)
        nan_c = (np.full((len(curve_z), len(curve_times)), np.nan)
                 if curve_z is not None else None)
        return np.nan, np.full(dataset.q, np.nan), nan_h, nan_c, True

    if base.model is Model.RIGHT_CS:
        haz = res.hazard(base.hazard.times)
        curves = (np.stack([survival_curve(res, z, curve_times).values for z in curve_z])
                  if curve_z is not None else None)
    else:
        haz = res.hazard.total() - res.hazard(base.hazard.times)
        curves = (np.stack([distribution_curve(res, z, curve_times).values for z in curve_z])
                  if curve_z is not None else None)
    return res.theta.p, res.theta.beta, haz, curves, not res.converged


def bootstrap(
    dataset: Dataset,
    config: FitConfig,
    n_replicates: int,
    seed: int,
    *,
    weight_law: str = "exponential",
    base: FitResult | None = None,
    curve_z=None,
    curve_times=None,
    workers: int | None = None,
    max_failure_share: float = 0.2,
) -> MultiplierDraws:
    """Weighted-refit bootstrap with ``n_replicates`` replicates.

    Deterministic given (dataset, config, n_replicates, seed): each
    replicate owns a spawned seed stream, so results do not depend on
    execution order or worker count.  Replicates that fail to converge
    are flagged, not discarded; raises BootstrapDegenerate when more
    than ``max_failure_share`` of them fail.
    """
    if weight_law not in WEIGHT_LAWS:
        raise ValueError(f"unknown weight law {weight_law!r}; expected one of {WEIGHT_LAWS}")
    if base is None:
        base = fit(dataset, config)
    rep_config = _replicate_config(config, base)
    if curve_z is not None:
        curve_z = np.atleast_2d(np.asarray(curve_z, dtype=float))
        if curve_times is None:
            curve_times = base.hazard.times
        curve_times = np.atleast_1d(np.asarray(curve_times, dtype=float))

    children = np.random.SeedSequence(seed).spawn(n_replicates)
    tasks = [
        (dataset, rep_config, base, weight_law, child, curve_z, curve_times)
        for child in children
    ]

    if workers is None:
        workers = int(os.environ.get(THREADS_ENV, "1"))
    if workers > 1 and n_replicates > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_run_replicate, tasks, chunksize=8))
    else:
        results = [_run_replicate(t) for t in tasks]

    b = n_replicates
    p_star = np.array([r[0] for r in results])
    beta_star = (np.stack([r[1] for r in results])
                 if b else np.empty((0, dataset.q)))
    haz_star = (np.stack([r[2] for r in results])
                if b else np.empty((0, base.hazard.n_jumps)))
    failed = np.array([r[4] for r in results], dtype=bool)
    curves = (np.stack([r[3] for r in results], axis=1)
              if (b and curve_z is not None) else None)

    if b and failed.mean() > max_failure_share:
        raise BootstrapDegenerate(
            f"{int(failed.sum())} of {b} replicates failed to converge"
        )
    return MultiplierDraws(
        seed=seed,
        weight_law=weight_law,
        p=p_star,
        beta=beta_star,
        hazard_times=base.hazard.times,
        hazard=haz_star,
        failed=failed,
        curve_z=curve_z,
        curve_times=curve_times if curve_z is not None else None,
        curves=curves,
    )


@dataclass(frozen=True)
class ConfidenceIntervals:
    level: float
    p: tuple
    beta: np.ndarray
    hazard_times: np.ndarray
    hazard: np.ndarray
    curves: np.ndarray | None = None


def confidence_intervals(draws: MultiplierDraws, level: float = 0.95) -> ConfidenceIntervals:
    """Symmetric percentile intervals from the replicate estimates.

    Requires at least 50 usable replicates.  Flagged (non-converged)
    replicates are excluded from the quantiles.
    """
    if not 0 < level < 1:
        raise ValueError("level must be in (0, 1)")
    ok = ~draws.failed & np.isfinite(draws.p)
    if int(ok.sum()) < 50:
        raise InsufficientReplicates(
            f"only {int(ok.sum())} usable replicates; need at least 50"
        )
    lo, hi = (1 - level) / 2, (1 + level) / 2

    def pct(arr, axis=0):
        return np.quantile(arr, [lo, hi], axis=axis)

    p_lo, p_hi = pct(draws.p[ok])
    beta_ci = pct(draws.beta[ok]).T
    hazard_ci = pct(draws.hazard[ok]).T
    curves_ci = None
    if draws.curves is not None:
        curves_ci = np.moveaxis(pct(draws.curves[:, ok, :], axis=1), 0, -1)
    return ConfidenceIntervals(
        level=level,
        p=(float(p_lo), float(p_hi)),
        beta=beta_ci,
        hazard_times=draws.hazard_times,
        hazard=hazard_ci,
        curves=curves_ci,
    )
