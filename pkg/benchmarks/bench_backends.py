#!/usr/bin/env python3
"""Benchmark the numba kernels against the pure-numpy fallback.

Times the criterion+score kernel for both models at several sample
sizes, plus one full fit per backend, and prints a small table.  The
first jit call is excluded (compile cost is a one-time, cached event).

Run:  python3 benchmarks/bench_backends.py
"""

import time

import numpy as np

import cscox
from cscox import _kernels_numpy

try:
    from cscox import _kernels_numba
except ImportError:
    _kernels_numba = None


def make_dataset(n, q=2, seed=0, model="right-cs"):
    spec = cscox.ScenarioSpec(
        model=model, n=n, p0=0.7, beta0=tuple([0.5, -0.5][:q]),
        baseline=cscox.Law("weibull", (1.5, 2.0)),
        censoring=cscox.Law("exponential", (0.25,)),
        covariates=cscox.CovariateLaw("uniform", bounds=((-2.0, 2.0),) * q),
        seed=seed,
    )
    return cscox.simulate_dataset(spec)


def time_kernel(kernel, ds, trunc, repeat=200):
    w = np.ones(ds.n)
    beta = np.full(ds.q, 0.3)
    args = (ds.x, ds.a, ds.z, ds.grp_idx, ds.grp_start, w, 0.7, beta, trunc)
    kernel(*args)  # warmup / compile
    t0 = time.perf_counter()
    for _ in range(repeat):
        kernel(*args)
    return (time.perf_counter() - t0) / repeat


def time_fit(ds, repeat=5):
    cscox.fit(ds)
    t0 = time.perf_counter()
    for _ in range(repeat):
        cscox.fit(ds)
    return (time.perf_counter() - t0) / repeat


def main():
    print(f"active backend: {cscox.BACKEND}")
    header = f"{'model':<10}{'n':>7}  {'numpy':>12}  {'numba':>12}  {'speedup':>8}"
    print(header)
    print("-" * len(header))
    for model, np_kern, nb_kern in (
        ("right-cs", _kernels_numpy.right_loglik_score,
         getattr(_kernels_numba, "right_loglik_score", None)),
        ("left-cs", _kernels_numpy.left_loglik_score,
         getattr(_kernels_numba, "left_loglik_score", None)),
    ):
        for n in (200, 2000, 20000):
            ds = make_dataset(n, model=model)
            trunc = cscox.resolve_truncation(ds, cscox.FitConfig())
            t_np = time_kernel(np_kern, ds, trunc)
            if nb_kern is not None:
                t_nb = time_kernel(nb_kern, ds, trunc)
                print(f"{model:<10}{n:>7}  {t_np * 1e6:>10.1f}us  "
                      f"{t_nb * 1e6:>10.1f}us  {t_np / t_nb:>7.1f}x")
            else:
                print(f"{model:<10}{n:>7}  {t_np * 1e6:>10.1f}us  {'n/a':>12}")

    ds = make_dataset(2000)
    print(f"\nfull fit (n=2000, q=2, multi-start, backend={cscox.BACKEND}): "
          f"{time_fit(ds) * 1e3:.1f} ms")
    print("set CSCOX_BACKEND=numpy and rerun to time the fallback end to end")


if __name__ == "__main__":
    main()
