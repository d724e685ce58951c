"""Exact latent-model generators and population oracles.

The right-model generator draws a lifetime T from the proportional
hazards law (baseline cumulative hazard times exp(beta0'z), inverted in
closed form), an independent censoring time C and an independent
Bernoulli(p0) mark, then emits (x, a): the lifetime itself when T <= C
and the mark succeeds, the censoring time with status 1 when C < T, and
the censoring time with status 2 otherwise.  The left-model generator
mirrors this with a proportional reverse-hazard law: the conditional
distribution function is the baseline cdf raised to exp(beta0'z).

A positive ``cure_mass`` caps the baseline cumulative hazard at
-log(cure_mass), so lifetimes are infinite with that probability at
z = 0 and the cure fraction stays inside the model class; ``zero_mass``
does the same to the reverse hazard, putting an atom at zero.

``population_oracle`` returns the true baseline, conditional curves,
combined-risk limits and status masses by closed forms plus adaptive
quadrature, for use as ground truth in Monte Carlo checks.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate

from .core import Dataset, Model, validate
from .errors import QuadratureFailure

QUAD_TOL = 1e-9


@dataclass(frozen=True)
class Law:
    """A nonnegative law given by its name and parameters.

    Families: ``exponential(rate)``, ``weibull(shape, scale)``,
    ``piecewise(breaks, rates)`` (len(rates) = len(breaks) + 1) and
    ``constant(value)`` (a point mass, admissible for censoring only).
    """

    family: str
    params: tuple

    def __post_init__(self):
        fam = self.family
        if fam == "exponential":
            (rate,) = self.params
            if rate <= 0:
                raise ValueError("exponential rate must be positive")
        elif fam == "weibull":
            shape, scale = self.params
            if shape <= 0 or scale <= 0:
                raise ValueError("weibull shape and scale must be positive")
        elif fam == "piecewise":
            breaks, rates = self.params
            breaks = tuple(float(b) for b in breaks)
            rates = tuple(float(r) for r in rates)
            if len(rates) != len(breaks) + 1:
                raise ValueError("piecewise needs len(rates) == len(breaks) + 1")
            if any(b <= 0 for b in breaks) or any(np.diff(breaks) <= 0):
                raise ValueError("breaks must be positive and increasing")
            if any(r < 0 for r in rates) or sum(rates) <= 0:
                raise ValueError("rates must be nonnegative, not all zero")
            object.__setattr__(self, "params", (breaks, rates))
        elif fam == "constant":
            (value,) = self.params
            if value <= 0:
                raise ValueError("constant value must be positive")
        else:
            raise ValueError(f"unknown law family {fam!r}")

    def _edges_knots(self):
        breaks, rates = self.params
        edges = np.array((0.0,) + breaks)
        rts = np.array(rates)
        knots = np.concatenate([[0.0], np.cumsum(rts[:-1] * np.diff(edges))])
        return edges, rts, knots

    def cum_hazard(self, t):
        """Integrated hazard on [0, t] (vectorized)."""
        t = np.maximum(np.asarray(t, dtype=float), 0.0)
        if self.family == "exponential":
            return self.params[0] * t
        if self.family == "weibull":
            shape, scale = self.params
            return (t / scale) ** shape
        if self.family == "piecewise":
            edges, rts, knots = self._edges_knots()
            idx = np.searchsorted(edges, t, side="right") - 1
            return knots[idx] + rts[idx] * (t - edges[idx])
        raise ValueError(f"{self.family} has no hazard representation")

    def inv_cum_hazard(self, e):
        """Smallest t with cum_hazard(t) >= e (vectorized)."""
        e = np.asarray(e, dtype=float)
        if self.family == "exponential":
            return e / self.params[0]
        if self.family == "weibull":
            shape, scale = self.params
            return scale * np.maximum(e, 0.0) ** (1.0 / shape)
        if self.family == "piecewise":
            edges, rts, knots = self._edges_knots()
            idx = np.minimum(np.searchsorted(knots, e, side="right") - 1, rts.size - 1)
            idx = np.maximum(idx, 0)
            with np.errstate(divide="ignore", invalid="ignore"):
                step = np.where(rts[idx] > 0, (e - knots[idx]) / rts[idx], np.inf)
            return np.where(e <= 0, 0.0, edges[idx] + step)
        raise ValueError(f"{self.family} has no hazard representation")

    def total_hazard(self) -> float:
        if self.family in ("exponential", "weibull"):
            return math.inf
        if self.family == "piecewise":
            breaks, rates = self.params
            return math.inf if rates[-1] > 0 else float(self.cum_hazard(breaks[-1]))
        raise ValueError(f"{self.family} has no hazard representation")

    def cdf(self, t):
        t = np.asarray(t, dtype=float)
        if self.family == "constant":
            return (t >= self.params[0]).astype(float)
        return -np.expm1(-self.cum_hazard(t))

    def sf(self, t):
        """P(X > t)."""
        t = np.asarray(t, dtype=float)
        if self.family == "constant":
            return (t < self.params[0]).astype(float)
        return np.exp(-self.cum_hazard(t))

    def sf_left_limit(self, t):
        """P(X >= t); differs from sf only at an atom."""
        t = np.asarray(t, dtype=float)
        if self.family == "constant":
            return (t <= self.params[0]).astype(float)
        return np.exp(-self.cum_hazard(t))

    def hazard_rate(self, t):
        t = np.asarray(t, dtype=float)
        if self.family == "exponential":
            return np.full(t.shape, self.params[0])
        if self.family == "weibull":
            shape, scale = self.params
            tt = np.maximum(t, 1e-300)
            return (shape / scale) * (tt / scale) ** (shape - 1.0)
        if self.family == "piecewise":
            edges, rts, _ = self._edges_knots()
            idx = np.searchsorted(edges, np.maximum(t, 0.0), side="right") - 1
            return rts[idx]
        raise ValueError("constant law has no hazard rate")

    def pdf(self, t):
        if self.family == "constant":
            raise ValueError("constant law has no density")
        return self.hazard_rate(t) * np.exp(-self.cum_hazard(t))

    def inv_cdf(self, v):
        """Quantile function (vectorized)."""
        v = np.asarray(v, dtype=float)
        if self.family == "constant":
            return np.full(v.shape, self.params[0])
        return self.inv_cum_hazard(-np.log1p(-v))

    def sample(self, rng, n: int):
        if self.family == "constant":
            return np.full(n, self.params[0])
        return self.inv_cum_hazard(rng.standard_exponential(n))


@dataclass(frozen=True)
class CovariateLaw:
    """Covariate generator: a uniform box or discrete levels."""

    kind: str
    bounds: tuple = ()        # uniform: ((lo, hi), ...) per coordinate
    levels: tuple = ()        # discrete: level vectors
    probs: tuple = ()

    def __post_init__(self):
        if self.kind == "uniform":
            bounds = tuple((float(lo), float(hi)) for lo, hi in self.bounds)
            if not bounds or any(lo >= hi for lo, hi in bounds):
                raise ValueError("uniform covariates need (lo, hi) with lo < hi per coordinate")
            object.__setattr__(self, "bounds", bounds)
        elif self.kind == "discrete":
            levels = tuple(tuple(float(v) for v in np.atleast_1d(lv)) for lv in self.levels)
            probs = tuple(float(p) for p in self.probs)
            if len(levels) != len(probs) or not levels:
                raise ValueError("discrete covariates need matching levels and probs")
            if any(p < 0 for p in probs) or abs(sum(probs) - 1.0) > 1e-12:
                raise ValueError("probs must be nonnegative and sum to 1")
            if len({len(lv) for lv in levels}) != 1:
                raise ValueError("all levels must share one dimension")
            object.__setattr__(self, "levels", levels)
            object.__setattr__(self, "probs", probs)
        else:
            raise ValueError(f"unknown covariate law {self.kind!r}")

    @property
    def q(self) -> int:
        return len(self.bounds) if self.kind == "uniform" else len(self.levels[0])

    def draw(self, rng, n: int) -> np.ndarray:
        if self.kind == "uniform":
            lo = np.array([b[0] for b in self.bounds])
            hi = np.array([b[1] for b in self.bounds])
            return rng.uniform(lo, hi, size=(n, self.q))
        idx = rng.choice(len(self.levels), size=n, p=np.array(self.probs))
        return np.array(self.levels, dtype=float)[idx]

    def nodes(self, per_dim: int = 48):
        """Nodes and weights for expectations over the covariate law
        (exact for discrete levels, Gauss-Legendre per dimension for a
        uniform box)."""
        if self.kind == "discrete":
            return np.array(self.levels, dtype=float), np.array(self.probs)
        xs, ws = np.polynomial.legendre.leggauss(per_dim)
        axes = [0.5 * (hi - lo) * xs + 0.5 * (hi + lo) for lo, hi in self.bounds]
        wax = [0.5 * ws for _ in self.bounds]  # uniform density times the jacobian
        mesh = np.meshgrid(*axes, indexing="ij")
        wmesh = np.meshgrid(*wax, indexing="ij")
        nodes = np.stack([m.ravel() for m in mesh], axis=1)
        weight = np.prod(np.stack([w.ravel() for w in wmesh]), axis=0)
        return nodes, weight


@dataclass(frozen=True)
class ScenarioSpec:
    """Ground-truth description of a simulated sample."""

    model: Model
    n: int
    p0: float
    beta0: tuple
    baseline: Law
    censoring: Law
    covariates: CovariateLaw
    cure_mass: float = 0.0
    zero_mass: float = 0.0
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "model", Model(self.model))
        object.__setattr__(self, "beta0", tuple(float(b) for b in np.atleast_1d(self.beta0)))
        if not 0 < self.p0 <= 1:
            raise ValueError("p0 must lie in (0, 1]")
        if not 0 <= self.cure_mass < 1 or not 0 <= self.zero_mass < 1:
            raise ValueError("cure_mass and zero_mass must lie in [0, 1)")
        if self.n < 1:
            raise ValueError("n must be positive")
        if len(self.beta0) != self.covariates.q:
            raise ValueError("beta0 length must match the covariate dimension")
        if self.baseline.family == "constant":
            raise ValueError("a point-mass baseline is not a hazard model")
        if self.censoring.family != "constant" and not math.isinf(self.censoring.total_hazard()):
            raise ValueError("the censoring law must be proper (infinite total hazard)")

    @property
    def hazard_cap(self) -> float:
        """Total baseline cumulative (reverse) hazard: finite exactly
        when mass sits at infinity (right) or at zero (left)."""
        if self.model is Model.RIGHT_CS:
            raw = self.baseline.total_hazard()
            mass = self.cure_mass
        else:
            raw = math.inf
            mass = self.zero_mass
        return min(raw, -math.log(mass)) if mass > 0 else raw

    @property
    def event_support_end(self) -> float:
        """Right endpoint of the exactly-observed times' support."""
        cap = self.hazard_cap
        if math.isinf(cap):
            return math.inf
        if self.model is Model.RIGHT_CS:
            return float(self.baseline.inv_cum_hazard(cap))
        return math.inf


def baseline_cum_hazard(spec: ScenarioSpec, t):
    """True baseline cumulative hazard (right model), cure cap applied."""
    return np.minimum(spec.baseline.cum_hazard(t), spec.hazard_cap)


def baseline_reverse_hazard(spec: ScenarioSpec, t):
    """True baseline cumulative reverse hazard (left model): tail
    integral of the reverse-hazard rate, capped by the zero-mass atom."""
    with np.errstate(divide="ignore"):
        raw = -np.log(spec.baseline.cdf(t))
    return np.minimum(raw, spec.hazard_cap)


def survival_true(spec: ScenarioSpec, t, z):
    """S_T(t | z) under a right-model spec."""
    scale = math.exp(float(np.dot(np.atleast_1d(z), spec.beta0)))
    return np.exp(-scale * baseline_cum_hazard(spec, t))


def distribution_true(spec: ScenarioSpec, t, z):
    """F_T(t | z) under a left-model spec."""
    scale = math.exp(float(np.dot(np.atleast_1d(z), spec.beta0)))
    return np.exp(-scale * baseline_reverse_hazard(spec, t))


def _draw_lifetimes_right(spec: ScenarioSpec, z: np.ndarray, rng) -> np.ndarray:
    e = rng.standard_exponential(spec.n) * np.exp(-(z @ np.array(spec.beta0)))
    cap = spec.hazard_cap
    return np.where(e < cap, spec.baseline.inv_cum_hazard(np.minimum(e, cap)), np.inf)


def _draw_lifetimes_left(spec: ScenarioSpec, z: np.ndarray, rng) -> np.ndarray:
    w = np.exp(z @ np.array(spec.beta0))
    u = rng.uniform(size=spec.n)
    gval = u ** (1.0 / w)          # F_T(t|z) = G(t)^w, G the baseline cdf
    cap = spec.hazard_cap
    floor = math.exp(-cap) if math.isfinite(cap) else 0.0
    return np.where(gval <= floor, 0.0,
                    spec.baseline.inv_cdf(np.minimum(gval, 1.0 - 1e-16)))


def simulate_with_latents(spec: ScenarioSpec, rng=None):
    """Simulate one sample and return (dataset, latents); the latent
    arrays are in draw order, before the dataset's canonical sort."""
    rng = np.random.default_rng(spec.seed) if rng is None else rng
    z = spec.covariates.draw(rng, spec.n)
    if spec.model is Model.RIGHT_CS:
        t = _draw_lifetimes_right(spec, z, rng)
    else:
        t = _draw_lifetimes_left(spec, z, rng)
    c = spec.censoring.sample(rng, spec.n)
    delta = rng.uniform(size=spec.n) < spec.p0

    if spec.model is Model.RIGHT_CS:
        observed = t <= c
        a = np.where(observed & delta, 0, np.where(~observed, 1, 2))
    else:
        observed = c <= t
        a = np.where(observed & delta, 0, np.where(observed, 1, 2))
    x = np.where(a == 0, t, c)

    dataset = validate(list(zip(x.tolist(), a.tolist(), z)), spec.model)
    return dataset, {"t": t, "c": c, "delta": delta, "z": z, "x": x, "a": a}


def simulate_right(spec: ScenarioSpec, rng=None) -> Dataset:
    if Model(spec.model) is not Model.RIGHT_CS:
        raise ValueError("spec.model must be right-cs")
    return simulate_with_latents(spec, rng)[0]


def simulate_left(spec: ScenarioSpec, rng=None) -> Dataset:
    if Model(spec.model) is not Model.LEFT_CS:
        raise ValueError("spec.model must be left-cs")
    return simulate_with_latents(spec, rng)[0]


def simulate_dataset(spec: ScenarioSpec, rng=None) -> Dataset:
    return simulate_with_latents(spec, rng)[0]


# ---------------------------------------------------------------------------
# population quantities


def _quad(f, a, b, points=None):
    if not b > a:
        return 0.0
    kwargs = {"epsabs": QUAD_TOL, "epsrel": 0.0, "limit": 400}
    if points is not None and math.isfinite(b):
        kwargs["points"] = [p for p in points if a < p < b]
    val, err = integrate.quad(f, a, b, **kwargs)
    if not np.isfinite(val) or err > max(1000 * QUAD_TOL, 1e-6 * abs(val)):
        raise QuadratureFailure(f"integral on [{a}, {b}] reached error {err:.2e}")
    return val


def _lifetime_pdf_right(spec: ScenarioSpec, s, scale):
    """f_T(s | z) for the right model at scale = exp(beta0'z)."""
    if s >= spec.event_support_end:
        return 0.0
    lam = float(spec.baseline.hazard_rate(s))
    return scale * lam * math.exp(-scale * float(baseline_cum_hazard(spec, s)))


def _lifetime_pdf_left(spec: ScenarioSpec, s, scale):
    """f_T(s | z) for the left model at s > 0."""
    g = float(spec.baseline.cdf(s))
    cap = spec.hazard_cap
    if g <= 0.0 or (math.isfinite(cap) and g <= math.exp(-cap)):
        return 0.0
    r = float(baseline_reverse_hazard(spec, s))
    return scale * float(spec.baseline.pdf(s)) / g * math.exp(-scale * r)


def _h_tails_right(spec: ScenarioSpec, ti, scale):
    """(H_0([ti, inf) | z), H_1([ti, inf) | z)) by quadrature."""
    upper = spec.event_support_end
    cen = spec.censoring
    if cen.family == "constant":
        v = cen.params[0]
        h0 = spec.p0 * _quad(lambda s: _lifetime_pdf_right(spec, s, scale), ti, min(upper, v))
        h1 = (math.exp(-scale * float(baseline_cum_hazard(spec, v))) if v >= ti else 0.0)
        return h0, h1
    h0 = spec.p0 * _quad(
        lambda s: float(cen.sf_left_limit(s)) * _lifetime_pdf_right(spec, s, scale),
        ti, upper if math.isfinite(upper) else math.inf,
    )
    h1 = _quad(
        lambda s: float(cen.pdf(s)) * math.exp(-scale * float(baseline_cum_hazard(spec, s))),
        ti, math.inf,
    )
    return h0, h1


def _h_heads_left(spec: ScenarioSpec, ti, scale):
    """(H_0([0, ti] | z), H_2([0, ti] | z)) by quadrature."""
    cen = spec.censoring
    cap = spec.hazard_cap
    tzero = float(spec.baseline.inv_cdf(math.exp(-cap))) if math.isfinite(cap) else 0.0
    if cen.family == "constant":
        v = cen.params[0]
        h0 = (spec.p0 * _quad(lambda s: _lifetime_pdf_left(spec, s, scale), v, ti)
              if ti >= v else 0.0)
        h2 = (math.exp(-scale * float(baseline_reverse_hazard(spec, v))) if v <= ti else 0.0)
        return h0, h2
    h0 = spec.p0 * _quad(
        lambda s: float(cen.cdf(s)) * _lifetime_pdf_left(spec, s, scale),
        tzero, ti,
    )
    h2 = _quad(
        lambda s: float(cen.pdf(s)) * math.exp(-scale * float(baseline_reverse_hazard(spec, s))),
        0.0, ti, points=(tzero,) if tzero > 0 else None,
    )
    return h0, h2


def combined_risk_true(spec: ScenarioSpec, t, theta=None):
    """Population combined-risk denominator (the limit of the empirical
    one).  At the true parameter it collapses to closed forms; at any
    other (p, beta) it is assembled from the sub-distribution integrals.
    """
    t = np.atleast_1d(np.asarray(t, dtype=float))
    nodes, wz = spec.covariates.nodes()
    beta0 = np.array(spec.beta0)
    scales0 = np.exp(nodes @ beta0)

    if theta is None:
        if spec.model is Model.RIGHT_CS:
            surv = np.exp(-scales0[None, :] * baseline_cum_hazard(spec, t)[:, None])
            mix = (wz * scales0 * surv).sum(axis=1)
            return spec.p0 * spec.censoring.sf_left_limit(t) * mix
        dist = np.exp(-scales0[None, :] * baseline_reverse_hazard(spec, t)[:, None])
        mix = (wz * scales0 * dist).sum(axis=1)
        return spec.p0 * spec.censoring.cdf(t) * mix

    p, beta = float(theta[0]), np.atleast_1d(np.asarray(theta[1], dtype=float))
    out = np.empty(t.size)
    for i, ti in enumerate(t):
        acc = 0.0
        for zrow, wgt, s0 in zip(nodes, wz, scales0):
            ez = math.exp(float(zrow @ beta))
            if spec.model is Model.RIGHT_CS:
                h0, h1 = _h_tails_right(spec, ti, s0)
                acc += wgt * ez * (h0 + p * h1)
            else:
                h0, h2 = _h_heads_left(spec, ti, s0)
                acc += wgt * ez * (h0 + p * h2)
        out[i] = acc
    return out


def prob_event_observable(spec: ScenarioSpec) -> float:
    """P(T <= C) for the right model, P(C <= T) for the left one,
    integrated over the covariate law."""
    nodes, wz = spec.covariates.nodes()
    beta0 = np.array(spec.beta0)
    total = 0.0
    for zrow, wgt in zip(nodes, wz):
        s0 = math.exp(float(zrow @ beta0))
        if spec.model is Model.RIGHT_CS:
            if spec.censoring.family == "constant":
                v = spec.censoring.params[0]
                val = 1.0 - math.exp(-s0 * float(baseline_cum_hazard(spec, v)))
            else:
                val = _quad(
                    lambda s: float(spec.censoring.sf_left_limit(s))
                    * _lifetime_pdf_right(spec, s, s0),
                    0.0, spec.event_support_end,
                )
        else:
            if spec.censoring.family == "constant":
                v = spec.censoring.params[0]
                val = 1.0 - math.exp(-s0 * float(baseline_reverse_hazard(spec, v)))
            else:
                # P(C <= T) = 1 - E[F_T(C- | z)]; the zero atom never ties C > 0
                val = 1.0 - _quad(
                    lambda s: float(spec.censoring.pdf(s))
                    * math.exp(-s0 * float(baseline_reverse_hazard(spec, s))),
                    0.0, math.inf,
                )
        total += wgt * val
    return total


def population_oracle(spec: ScenarioSpec, times, z) -> dict:
    """Ground-truth quantities at the requested times and covariate.

    Right model keys: ``lambda0``, ``survival``, ``e0`` (combined-risk
    limit at the true parameter), ``h_masses``, ``cure``.  Left model
    keys: ``r0``, ``distribution``, ``l0``, ``h_masses``, ``zero``.
    """
    times = np.atleast_1d(np.asarray(times, dtype=float))
    z = np.atleast_1d(np.asarray(z, dtype=float))
    obs = prob_event_observable(spec)
    scale = math.exp(float(z @ np.array(spec.beta0)))
    cap = spec.hazard_cap
    atom = math.exp(-scale * cap) if math.isfinite(cap) else 0.0
    if spec.model is Model.RIGHT_CS:
        return {
            "times": times,
            "lambda0": baseline_cum_hazard(spec, times),
            "survival": survival_true(spec, times, z),
            "e0": combined_risk_true(spec, times),
            "h_masses": {0: spec.p0 * obs, 1: 1.0 - obs, 2: (1.0 - spec.p0) * obs},
            "cure": atom,
        }
    return {
        "times": times,
        "r0": baseline_reverse_hazard(spec, times),
        "distribution": distribution_true(spec, times, z),
        "l0": combined_risk_true(spec, times),
        "h_masses": {0: spec.p0 * obs, 1: (1.0 - spec.p0) * obs, 2: 1.0 - obs},
        "zero": atom,
    }


def hazard_via_subdistributions(spec: ScenarioSpec, t: float) -> float:
    """The baseline cumulative hazard recovered from the observable
    sub-distributions: the integral of dH_0 over the combined-risk
    limit, everything evaluated by quadrature.  Independent route used
    to cross-check ``baseline_cum_hazard``."""
    if spec.model is not Model.RIGHT_CS:
        raise ValueError("sub-distribution route implemented for the right model")
    nodes, wz = spec.covariates.nodes()
    beta0 = np.array(spec.beta0)
    scales = np.exp(nodes @ beta0)

    def h0_density(s):
        ft = np.array([_lifetime_pdf_right(spec, s, s0) for s0 in scales])
        return spec.p0 * float(spec.censoring.sf_left_limit(s)) * float(np.sum(wz * ft))

    def e0_sub(s):
        return float(combined_risk_true(spec, [s], theta=(spec.p0, beta0))[0])

    tend = min(t, spec.event_support_end)
    return _quad(lambda s: h0_density(s) / e0_sub(s), 0.0, tend)
