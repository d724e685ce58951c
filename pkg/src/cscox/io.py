"""File formats: dataset tables, scenario configs, result documents.

Datasets travel as delimited text with the fixed header
``x,a,z1,...,zq``.  Scenario specs and the fitted-result document use a
flat ``key = value`` text format.  All floating-point numbers are
written with 17 significant digits, so reading back reproduces them
bit-exactly.
"""

from __future__ import annotations

import csv
from pathlib import Path

import numpy as np

from .bootstrap import ConfidenceIntervals, MultiplierDraws, confidence_intervals
from .core import Dataset, Model, StepFunction, validate
from .errors import InsufficientReplicates, IoError, SchemaError
from .estimator import FitResult, distribution_curve, survival_curve
from .simulate import CovariateLaw, Law, ScenarioSpec


def f17(v) -> str:
    return format(float(v), ".17g")


def _floats(text: str) -> list:
    return [float(tok) for tok in text.replace(",", " ").split()]


# ---------------------------------------------------------------------------
# datasets


def read_dataset(path, model, *, tie_jitter=None) -> Dataset:
    """Load a delimited dataset with header ``x,a,z1,...,zq`` and
    validate it for the given model."""
    path = Path(path)
    try:
        with open(path, newline="") as fh:
            rows = list(csv.reader(fh))
    except OSError as exc:
        raise IoError(f"cannot read {path}: {exc}") from exc
    if not rows:
        raise SchemaError(0, "x", "empty file")
    header = [h.strip() for h in rows[0]]
    q = len(header) - 2
    if q < 1 or header[:2] != ["x", "a"] or header[2:] != [f"z{j}" for j in range(1, q + 1)]:
        raise SchemaError(0, ",".join(header), "header must be x,a,z1,...,zq with q >= 1")

    records = []
    for r, row in enumerate(rows[1:], start=1):
        if len(row) != len(header):
            raise SchemaError(r, "", f"expected {len(header)} cells, found {len(row)}")
        try:
            x = float(row[0])
        except ValueError as exc:
            raise SchemaError(r, "x", f"not a number: {row[0]!r}") from exc
        astr = row[1].strip()
        try:
            a = int(astr)
        except ValueError as exc:
            raise SchemaError(r, "a", f"not an integer status: {astr!r}") from exc
        zs = []
        for j, cell in enumerate(row[2:], start=1):
            try:
                zs.append(float(cell))
            except ValueError as exc:
                raise SchemaError(r, f"z{j}", f"not a number: {cell!r}") from exc
        records.append((x, a, zs))
    return validate(records, model, tie_jitter=tie_jitter)


def write_dataset(dataset: Dataset, path) -> Path:
    path = Path(path)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["x", "a"] + [f"z{j}" for j in range(1, dataset.q + 1)])
        for xi, ai, zi in zip(dataset.x, dataset.a, dataset.z):
            writer.writerow([f17(xi), int(ai)] + [f17(v) for v in zi])
    return path


# ---------------------------------------------------------------------------
# scenario configs (flat key = value)


def _format_law(law: Law) -> str:
    if law.family == "piecewise":
        breaks, rates = law.params
        return ("piecewise(" + ", ".join(f17(b) for b in breaks)
                + " | " + ", ".join(f17(r) for r in rates) + ")")
    return f"{law.family}(" + ", ".join(f17(p) for p in law.params) + ")"


def _parse_law(text: str) -> Law:
    text = text.strip()
    name, _, rest = text.partition("(")
    if not rest.endswith(")"):
        raise ValueError(f"malformed law {text!r}")
    body = rest[:-1]
    if name.strip() == "piecewise":
        breaks, _, rates = body.partition("|")
        return Law("piecewise", (tuple(_floats(breaks)), tuple(_floats(rates))))
    return Law(name.strip(), tuple(_floats(body)))


def _format_covariates(law: CovariateLaw) -> str:
    if law.kind == "uniform":
        return "uniform(" + "; ".join(f"{f17(lo)}, {f17(hi)}" for lo, hi in law.bounds) + ")"
    parts = [", ".join(f17(v) for v in lv) + " : " + f17(p)
             for lv, p in zip(law.levels, law.probs)]
    return "discrete(" + "; ".join(parts) + ")"


def _parse_covariates(text: str) -> CovariateLaw:
    text = text.strip()
    name, _, rest = text.partition("(")
    body = rest[:-1] if rest.endswith(")") else ""
    name = name.strip()
    if name == "uniform":
        bounds = []
        for part in body.split(";"):
            lo, hi = _floats(part)
            bounds.append((lo, hi))
        return CovariateLaw("uniform", bounds=tuple(bounds))
    if name == "discrete":
        levels, probs = [], []
        for part in body.split(";"):
            vec, _, prob = part.partition(":")
            levels.append(tuple(_floats(vec)))
            probs.append(float(prob))
        return CovariateLaw("discrete", levels=tuple(levels), probs=tuple(probs))
    raise ValueError(f"unknown covariate law {text!r}")


def read_keyvalues(path) -> dict:
    out = {}
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise IoError(f"cannot read {path}: {exc}") from exc
    for line in text.splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        key, _, value = line.partition("=")
        if not _:
            raise ValueError(f"expected 'key = value', got {line!r}")
        out[key.strip()] = value.strip()
    return out


def read_scenario(path) -> ScenarioSpec:
    kv = read_keyvalues(path)
    try:
        return ScenarioSpec(
            model=Model(kv["model"]),
            n=int(kv["n"]),
            p0=float(kv["p0"]),
            beta0=tuple(_floats(kv["beta0"])),
            baseline=_parse_law(kv["baseline"]),
            censoring=_parse_law(kv["censoring"]),
            covariates=_parse_covariates(kv["covariates"]),
            cure_mass=float(kv.get("cure_mass", "0")),
            zero_mass=float(kv.get("zero_mass", "0")),
            seed=int(kv.get("seed", "0")),
        )
    except KeyError as exc:
        raise ValueError(f"scenario config missing key {exc.args[0]!r}") from exc


def write_scenario(spec: ScenarioSpec, path) -> Path:
    path = Path(path)
    lines = [
        f"model = {spec.model}",
        f"n = {spec.n}",
        f"p0 = {f17(spec.p0)}",
        "beta0 = " + ", ".join(f17(b) for b in spec.beta0),
        f"baseline = {_format_law(spec.baseline)}",
        f"censoring = {_format_law(spec.censoring)}",
        f"covariates = {_format_covariates(spec.covariates)}",
        f"cure_mass = {f17(spec.cure_mass)}",
        f"zero_mass = {f17(spec.zero_mass)}",
        f"seed = {spec.seed}",
    ]
    path.write_text("\n".join(lines) + "\n")
    return path


# ---------------------------------------------------------------------------
# results


def write_results(
    outdir,
    result: FitResult,
    draws: MultiplierDraws | None = None,
    *,
    level: float = 0.95,
    curve_z=None,
    curve_times=None,
) -> list:
    """Write the result document, the hazard table and one curve table
    per requested covariate vector; bootstrap draws add interval
    columns.  Returns the written paths."""
    outdir = Path(outdir)
    try:
        outdir.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise IoError(f"cannot create {outdir}: {exc}") from exc

    intervals = None
    if draws is not None and draws.n_replicates:
        try:
            intervals = confidence_intervals(draws, level)
        except InsufficientReplicates:
            intervals = None

    lines = [
        f"model = {result.model}",
        f"p_hat = {f17(result.theta.p)}",
        "beta_hat = " + ", ".join(f17(b) for b in result.theta.beta),
        f"truncation = {f17(result.truncation)}",
        f"loglik_at_max = {f17(result.loglik_at_max)}",
        f"score_norm_at_max = {f17(result.score_norm_at_max)}",
        f"iterations = {result.iterations}",
        f"n_event_terms = {result.n_event_terms}",
        f"n_cs_terms = {result.n_cs_terms}",
        f"dropped_terms = {result.dropped_terms}",
        f"converged = {str(result.converged).lower()}",
        f"n_warnings = {len(result.warnings)}",
    ]
    lines += [f"warning_{i + 1} = {w}" for i, w in enumerate(result.warnings)]
    if draws is not None:
        lines += [
            f"bootstrap_replicates = {draws.n_replicates}",
            f"bootstrap_seed = {draws.seed}",
            f"bootstrap_weight_law = {draws.weight_law}",
            f"bootstrap_failed = {int(draws.failed.sum()) if draws.n_replicates else 0}",
        ]
    if intervals is not None:
        lines += [
            f"ci_level = {f17(intervals.level)}",
            f"p_ci = {f17(intervals.p[0])}, {f17(intervals.p[1])}",
        ]
        lines += [
            f"beta_ci_{j + 1} = {f17(lo)}, {f17(hi)}"
            for j, (lo, hi) in enumerate(intervals.beta)
        ]
    doc = outdir / "estimates.txt"
    doc.write_text("\n".join(lines) + "\n")
    written = [doc]

    written.append(_write_hazard(outdir / "hazard.csv", result, intervals))
    if curve_z is not None:
        written += _write_curves(outdir, result, draws, intervals, curve_z, curve_times, level)
    return written


def _write_hazard(path, result: FitResult, intervals: ConfidenceIntervals | None):
    cum = (np.cumsum(result.hazard.increments) if result.model is Model.RIGHT_CS
           else np.cumsum(result.hazard.increments[::-1])[::-1])
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        header = ["time", "increment", "cumulative"]
        if intervals is not None:
            header += ["lo", "hi"]
        writer.writerow(header)
        for k in range(result.hazard.n_jumps):
            row = [f17(result.hazard.times[k]), f17(result.hazard.increments[k]), f17(cum[k])]
            if intervals is not None:
                row += [f17(intervals.hazard[k, 0]), f17(intervals.hazard[k, 1])]
            writer.writerow(row)
    return path


def _write_curves(outdir, result, draws, intervals, curve_z, curve_times, level):
    curve_z = np.atleast_2d(np.asarray(curve_z, dtype=float))
    if curve_times is None:
        curve_times = result.hazard.times
    curve_times = np.atleast_1d(np.asarray(curve_times, dtype=float))

    curve_ci = None
    if (
        intervals is not None
        and draws.curves is not None
        and draws.curve_z.shape == curve_z.shape
        and np.array_equal(draws.curve_z, curve_z)
        and np.array_equal(draws.curve_times, curve_times)
    ):
        curve_ci = intervals.curves

    paths = []
    for i, z in enumerate(curve_z):
        if result.model is Model.RIGHT_CS:
            curve = survival_curve(result, z, curve_times)
        else:
            curve = distribution_curve(result, z, curve_times)
        path = Path(outdir) / f"curve_{i + 1}.csv"
        with open(path, "w", newline="") as fh:
            fh.write("# z = " + ", ".join(f17(v) for v in z) + "\n")
            writer = csv.writer(fh)
            header = ["time", "value"] + (["lo", "hi"] if curve_ci is not None else [])
            writer.writerow(header)
            for k, t in enumerate(curve_times):
                row = [f17(t), f17(curve.values[k])]
                if curve_ci is not None:
                    row += [f17(curve_ci[i, k, 0]), f17(curve_ci[i, k, 1])]
                writer.writerow(row)
        paths.append(path)
    return paths


def read_estimates(path) -> dict:
    """Parse the result document back into a dict (floats and float
    lists where the values parse as numbers)."""
    kv = read_keyvalues(path)
    out = {}
    for key, value in kv.items():
        try:
            nums = _floats(value)
        except ValueError:
            out[key] = value
            continue
        out[key] = nums[0] if len(nums) == 1 else nums
    return out


def read_step_function(path) -> StepFunction:
    """Rebuild a hazard step function from its table."""
    with open(path, newline="") as fh:
        rows = [row for row in csv.reader(fh) if row and not row[0].startswith("#")]
    times = [float(r[0]) for r in rows[1:]]
    incs = [float(r[1]) for r in rows[1:]]
    return StepFunction(np.array(times), np.array(incs))
