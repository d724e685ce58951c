import numpy as np
import pytest

import cscox


def make_mixed(rng, n=40, q=2, model="right-cs", tie_share=0.0):
    """A random mixed-status dataset with at least one event."""
    x = rng.exponential(1.0, n)
    if tie_share > 0:
        x = np.round(x, 1)
    a = rng.integers(0, 3, n)
    a[rng.integers(0, n)] = 0
    z = rng.uniform(-1.0, 1.0, (n, q))
    return cscox.validate(list(zip(x, a, z)), model)


@pytest.fixture(scope="session", autouse=True)
def _warm_kernels():
    """Compile the jit kernels once so timed tests measure steady state."""
    rng = np.random.default_rng(0)
    for model in ("right-cs", "left-cs"):
        ds = make_mixed(rng, n=8, model=model)
        trunc = cscox.resolve_truncation(ds, cscox.FitConfig())
        cscox.evaluate(ds, 0.8, np.zeros(ds.q), trunc, warn_dropped=False)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
