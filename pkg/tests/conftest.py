import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from anticonc.poly import make_poly

settings.register_profile(
    "default", deadline=None, max_examples=60, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("default")


def random_poly(rng, n, d, terms=8, domain="pm1", integer=False, low=True):
    """Random polynomial with ``terms`` top-degree monomials and a few lower ones."""
    out = []
    for _ in range(terms):
        s = rng.choice(n, size=d, replace=False) + 1
        out.append((s.tolist(), float(rng.integers(-3, 4)) if integer else float(rng.normal())))
    if low:
        for _ in range(max(1, terms // 2)):
            k = int(rng.integers(0, d))
            s = rng.choice(n, size=k, replace=False) + 1
            out.append((s.tolist(), float(rng.integers(-3, 4)) if integer else float(rng.normal())))
    return make_poly(n, out, domain)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
