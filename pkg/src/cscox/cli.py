"""Command-line interface.

Subcommands: ``fit`` (estimate one dataset), ``simulate`` (draw a
dataset from a scenario config), ``bootstrap`` (fit plus weighted
bootstrap intervals), ``mc-study`` (Monte Carlo bias/SD/coverage table
over a grid of sample sizes) and ``oracle`` (population ground-truth
table for a scenario).

Exit codes: 0 success, 2 the optimizer did not reach its tolerance
(results are still written), 1 input or usage error.  Errors go to
stderr; estimates go to stdout and files only.
"""

from __future__ import annotations

import argparse
import csv
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import io as cio
from .bootstrap import THREADS_ENV, bootstrap, confidence_intervals
from .core import AUTO, FitConfig, Model
from .errors import CsCoxError
from .estimator import fit
from .simulate import (
    ScenarioSpec,
    baseline_cum_hazard,
    baseline_reverse_hazard,
    population_oracle,
    simulate_dataset,
)


def _workers(arg=None) -> int:
    if arg:
        return int(arg)
    return int(os.environ.get(THREADS_ENV, os.cpu_count() or 1))


def _config(args) -> FitConfig:
    tau = AUTO if args.tau == "auto" else float(args.tau)
    rho = AUTO if args.rho == "auto" else float(args.rho)
    return FitConfig(tau=tau, rho=rho, seed=args.seed)


def _parse_vec(text):
    return [float(v) for v in text.replace(",", " ").split()]


def _add_common(parser):
    parser.add_argument("--tau", default="auto", help="right-model truncation (auto = largest event)")
    parser.add_argument("--rho", default="auto", help="left-model truncation (auto = smallest event)")
    parser.add_argument("--seed", type=int, default=0, help="seed for optimizer multi-start")


def cmd_fit(args) -> int:
    dataset = cio.read_dataset(args.data, Model(args.model))
    result = fit(dataset, _config(args))
    curve_z = [_parse_vec(zt) for zt in args.curve_z] if args.curve_z else None
    curve_times = _parse_vec(args.curve_times) if args.curve_times else None
    cio.write_results(args.out, result, curve_z=curve_z, curve_times=curve_times)
    print(f"p_hat = {result.theta.p}")
    print("beta_hat = " + ", ".join(str(b) for b in result.theta.beta))
    print(f"truncation = {result.truncation}")
    print(f"results written to {args.out}")
    return 0 if result.converged else 2


def cmd_simulate(args) -> int:
    spec = cio.read_scenario(args.spec)
    dataset = simulate_dataset(spec)
    cio.write_dataset(dataset, args.out)
    print(f"simulated n = {dataset.n} ({spec.model}) -> {args.out}")
    return 0


def cmd_bootstrap(args) -> int:
    if args.replicates <= 0:
        raise ValueError("-B must be a positive replicate count")
    dataset = cio.read_dataset(args.data, Model(args.model))
    config = _config(args)
    base = fit(dataset, config)
    curve_z = [_parse_vec(zt) for zt in args.curve_z] if args.curve_z else None
    curve_times = _parse_vec(args.curve_times) if args.curve_times else None
    draws = bootstrap(
        dataset, config, args.replicates, args.seed,
        weight_law=args.weight_law, base=base,
        curve_z=curve_z, curve_times=curve_times,
        workers=_workers(args.workers),
    )
    cio.write_results(args.out, base, draws, level=args.level,
                      curve_z=curve_z, curve_times=curve_times)
    print(f"bootstrap B = {args.replicates} written to {args.out}")
    return 0 if base.converged else 2


def _mc_replicate(task):
    spec, seed_seq, boot_b, boot_seed = task
    rng = np.random.default_rng(seed_seq)
    dataset = simulate_dataset(spec, rng)
    config = FitConfig()
    result = fit(dataset, config)

    if spec.model is Model.RIGHT_CS:
        truth = baseline_cum_hazard(spec, result.hazard.times)
        est = np.cumsum(result.hazard.increments)
    else:
        truth = baseline_reverse_hazard(spec, result.hazard.times)
        est = np.cumsum(result.hazard.increments[::-1])[::-1]
    # a step function's sup distance to a continuous curve is attained
    # at a jump, from one side or the other
    sup = 0.0
    if est.size:
        sup = float(np.max(np.abs(est - truth)))
        sup = max(sup, float(np.max(np.abs(est - result.hazard.increments - truth))))

    covered = None
    if boot_b:
        # replicate-level parallelism only; never nest pools
        draws = bootstrap(dataset, config, boot_b, boot_seed, base=result, workers=1)
        ci = confidence_intervals(draws)
        beta0 = np.array(spec.beta0)
        covered = (ci.beta[:, 0] <= beta0) & (beta0 <= ci.beta[:, 1])
    return result.theta.p, result.theta.beta, sup, covered, result.converged


def run_mc_study(spec: ScenarioSpec, reps: int, n_grid, boot_b: int = 0,
                 seed: int = 0, workers: int = 1) -> list:
    """Monte Carlo summary per sample size: bias, SD, hazard sup error,
    and bootstrap coverage when ``boot_b`` replicates are requested."""
    rows = []
    for n in n_grid:
        spec_n = replace(spec, n=int(n))
        children = np.random.SeedSequence(seed).spawn(reps)
        tasks = [
            (spec_n, children[r], boot_b, seed + 7919 * (r + 1))
            for r in range(reps)
        ]
        if workers > 1:
            with ProcessPoolExecutor(max_workers=workers) as pool:
                results = list(pool.map(_mc_replicate, tasks, chunksize=1))
        else:
            results = [_mc_replicate(t) for t in tasks]

        p_hat = np.array([r[0] for r in results])
        beta_hat = np.stack([r[1] for r in results])
        sup = np.array([r[2] for r in results])
        conv = np.array([r[4] for r in results])
        beta0 = np.array(spec.beta0)
        row = {
            "n": int(n),
            "reps": reps,
            "bias_p": float(p_hat.mean() - spec.p0),
            "sd_p": float(p_hat.std(ddof=1)) if reps > 1 else 0.0,
            "mean_beta_err": float(np.mean(np.linalg.norm(beta_hat - beta0, axis=1))),
            "mean_sup_hazard_err": float(sup.mean()),
            "nonconverged": int((~conv).sum()),
        }
        for j in range(beta0.size):
            row[f"bias_beta_{j + 1}"] = float(beta_hat[:, j].mean() - beta0[j])
            row[f"sd_beta_{j + 1}"] = float(beta_hat[:, j].std(ddof=1)) if reps > 1 else 0.0
        if boot_b:
            cov = np.stack([r[3] for r in results])
            for j in range(beta0.size):
                row[f"coverage_beta_{j + 1}"] = float(cov[:, j].mean())
        rows.append(row)
    return rows


def cmd_mc_study(args) -> int:
    spec = cio.read_scenario(args.spec)
    n_grid = [int(v) for v in args.grid_n.replace(",", " ").split()]
    if args.reps <= 0 or not n_grid:
        raise ValueError("--reps and --grid-n must be positive")
    rows = run_mc_study(spec, args.reps, n_grid, boot_b=args.boot_B,
                        seed=args.seed, workers=_workers(args.workers))
    outdir = Path(args.out)
    outdir.mkdir(parents=True, exist_ok=True)
    table = outdir / "mc_summary.csv"
    with open(table, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=list(rows[0].keys()))
        writer.writeheader()
        for row in rows:
            writer.writerow({k: (cio.f17(v) if isinstance(v, float) else v)
                             for k, v in row.items()})
    print(f"mc-study table ({len(rows)} rows) -> {table}")
    return 0


def cmd_oracle(args) -> int:
    spec = cio.read_scenario(args.spec)
    times = _parse_vec(args.t)
    z = _parse_vec(args.z) if args.z else [0.0] * len(spec.beta0)
    table = population_oracle(spec, times, z)
    lines = []
    masses = table["h_masses"]
    lines.append("# h_masses = " + ", ".join(cio.f17(masses[k]) for k in (0, 1, 2)))
    if spec.model is Model.RIGHT_CS:
        lines.append("# cure = " + cio.f17(table["cure"]))
        header = "t,lambda0,survival,e0"
        cols = zip(table["times"], table["lambda0"], table["survival"], table["e0"])
    else:
        lines.append("# zero = " + cio.f17(table["zero"]))
        header = "t,r0,distribution,l0"
        cols = zip(table["times"], table["r0"], table["distribution"], table["l0"])
    lines.append(header)
    lines += [",".join(cio.f17(v) for v in row) for row in cols]
    text = "\n".join(lines) + "\n"
    if args.out:
        Path(args.out).write_text(text)
        print(f"oracle table -> {args.out}")
    else:
        sys.stdout.write(text)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cscox",
        description="Semiparametric hazard regression for censored and "
                    "current-status lifetimes",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_fit = sub.add_parser("fit", help="fit one dataset")
    p_fit.add_argument("--data", required=True)
    p_fit.add_argument("--model", required=True, choices=[m.value for m in Model])
    p_fit.add_argument("--out", required=True)
    p_fit.add_argument("--curve-z", action="append",
                       help="covariate vector for a conditional curve (repeatable)")
    p_fit.add_argument("--curve-times", help="grid for the curve tables")
    _add_common(p_fit)
    p_fit.set_defaults(func=cmd_fit)

    p_sim = sub.add_parser("simulate", help="simulate a dataset from a scenario config")
    p_sim.add_argument("--spec", required=True)
    p_sim.add_argument("--out", required=True)
    p_sim.set_defaults(func=cmd_simulate)

    p_boot = sub.add_parser("bootstrap", help="fit plus multiplier bootstrap")
    p_boot.add_argument("--data", required=True)
    p_boot.add_argument("--model", required=True, choices=[m.value for m in Model])
    p_boot.add_argument("--out", required=True)
    p_boot.add_argument("-B", "--replicates", type=int, required=True)
    p_boot.add_argument("--weight-law", default="exponential",
                        choices=["exponential", "gaussian", "ones"])
    p_boot.add_argument("--level", type=float, default=0.95)
    p_boot.add_argument("--curve-z", action="append")
    p_boot.add_argument("--curve-times")
    p_boot.add_argument("--workers", type=int, default=None)
    _add_common(p_boot)
    p_boot.set_defaults(func=cmd_bootstrap)

    p_mc = sub.add_parser("mc-study", help="Monte Carlo bias/SD/coverage study")
    p_mc.add_argument("--spec", required=True)
    p_mc.add_argument("--reps", type=int, required=True)
    p_mc.add_argument("--grid-n", required=True, help="comma-separated sample sizes")
    p_mc.add_argument("--out", required=True)
    p_mc.add_argument("--boot-B", type=int, default=0)
    p_mc.add_argument("--seed", type=int, default=0)
    p_mc.add_argument("--workers", type=int, default=None)
    p_mc.set_defaults(func=cmd_mc_study)

    p_or = sub.add_parser("oracle", help="population ground truth for a scenario")
    p_or.add_argument("--spec", required=True)
    p_or.add_argument("--t", required=True, help="comma-separated evaluation times")
    p_or.add_argument("--z", help="covariate vector (default zeros)")
    p_or.add_argument("--out")
    p_or.set_defaults(func=cmd_oracle)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (CsCoxError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
