import numpy as np
import pytest

import geocontact as gc

ENTRY_NAMES = (
    "euclidean_parallel",
    "euclidean_skew",
    "s3_hopf",
    "s3_weighted(2,3)",
    "h2xr_vertical",
    "h3_vertical",
    "heisenberg_reeb",
)


@pytest.fixture(scope="session")
def entries():
    return {name: gc.builtin(name) for name in ENTRY_NAMES}


@pytest.fixture(scope="session")
def orbit_cache(entries):
    """Lazily integrated default orbits (t in [0, 2], step 1e-3), shared
    across the whole run because each costs a few seconds."""
    cache = {}

    def get(name):
        if name not in cache:
            e = entries[name]
            cache[name] = gc.integrate_orbit(
                e.manifold, e.field, np.asarray(e.orbit.start, float),
                e.orbit.t_end, e.orbit.step)
        return cache[name]

    return get
