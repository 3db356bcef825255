import math
from fractions import Fraction

import numpy as np
import pytest
from scipy import stats

import oracles
from anticonc.distributions import (
    DistributionSpec,
    GeneralCoordinate,
    coupled_biased_sampler,
    coupled_general_sampler,
    coupling_pushforward,
    product_law,
    rademacher_coordinate,
    sample,
    seed_streams,
    total_variation,
)
from anticonc.errors import InputError, InvalidP, UnsupportedDistribution
from anticonc.distributions import variance
from anticonc.poly import make_poly


def test_rademacher_means():
    X = sample(DistributionSpec.rademacher(10), seed=0, size=100_000)
    assert set(np.unique(X)) == {-1, 1}
    assert np.all(np.abs(X.mean(axis=0)) <= 4 / math.sqrt(100_000))


def test_biased_frequency():
    X = sample(DistributionSpec.biased(5, 0.1), seed=1, size=100_000)
    sigma = math.sqrt(0.1 * 0.9 / 100_000)
    assert np.all(np.abs(X.mean(axis=0) - 0.1) <= 4 * sigma)


def test_sampling_is_deterministic():
    d = DistributionSpec.biased(7, 0.3)
    assert np.array_equal(sample(d, 42, 100), sample(d, 42, 100))
    assert sample(d, 42).shape == (7,)


def test_seed_streams_independent_and_reproducible():
    a = [g.integers(0, 1 << 30) for g in seed_streams(5, 3)]
    b = [g.integers(0, 1 << 30) for g in seed_streams(5, 3)]
    assert a == b and len(set(a)) == 3


def test_invalid_specs():
    with pytest.raises(InvalidP):
        DistributionSpec.biased(3, 1.0)
    with pytest.raises(InputError):
        DistributionSpec("weird", 3)
    with pytest.raises(InputError):
        DistributionSpec("general", 2, coords=(rademacher_coordinate(),))
    with pytest.raises(InputError):
        GeneralCoordinate(lambda r, k: r.random(k), 0.0, 1.0)


def test_general_moments_unsupported():
    d = DistributionSpec.general([rademacher_coordinate()] * 2)
    with pytest.raises(UnsupportedDistribution):
        variance(make_poly(2, [((1,), 1.0)]), d)


# biased coupling ------------------------------------------------------------------


def test_coupling_identity_holds_per_sample():
    xi, eta, xp = coupled_biased_sampler(0.2, 9, seed=3, size=50_000)
    assert np.array_equal(xi, eta * xp)
    assert abs(eta.mean() - 0.5) < 0.01
    assert abs(xp.mean() - 0.4) < 0.01


def test_coupling_at_half():
    xi, eta, xp = coupled_biased_sampler(0.5, 6, seed=0, size=1000)
    assert np.all(xp == 1) and np.array_equal(xi, eta)


def test_coupling_rejects_large_p():
    with pytest.raises(InvalidP):
        coupled_biased_sampler(0.6, 3)


@pytest.mark.parametrize("p", [Fraction(1, 4), Fraction(1, 8), Fraction(1, 2), Fraction(3, 10)])
def test_coupling_pushforward_exact(p):
    n = 6 if p == Fraction(1, 4) else 4
    law = coupling_pushforward(p, n)
    assert total_variation(law, oracles.biased_law(p, n)) == 0
    assert sum(law.values()) == 1


def test_product_law_matches_oracle():
    assert product_law(Fraction(1, 3), 3) == oracles.biased_law(Fraction(1, 3), 3)


# general coupling -------------------------------------------------------------------


def test_general_two_point():
    d = DistributionSpec.general([rademacher_coordinate()] * 4)
    xp, eta, plus, minus = coupled_general_sampler(d, seed=0, size=20_000)
    assert np.all(plus == 1) and np.all(minus == -1)
    assert np.array_equal(xp, eta * plus + (1 - eta) * minus)


def _gauss(rng, k):
    return rng.normal(size=k)


def test_general_reconstruction_and_marginal():
    coord = GeneralCoordinate(_gauss, shift=0.3, split_prob=stats.norm.cdf(0.3), escape_prob=0.5)
    d = DistributionSpec.general([coord] * 2)
    xp, eta, plus, minus = coupled_general_sampler(d, seed=5, size=100_000)
    assert np.array_equal(xp, eta * plus + (1 - eta) * minus)
    assert np.all(plus > 0.3) and np.all(minus <= 0.3)
    # sqrt(n) * KS is O(1); 4 / sqrt(n) sits far in the Kolmogorov tail
    for i in range(2):
        assert stats.kstest(xp[:, i], "norm").statistic <= 4 / math.sqrt(100_000)


def test_general_params():
    c1 = GeneralCoordinate(_gauss, 0.0, 0.5, 0.3)
    c2 = GeneralCoordinate(_gauss, 0.0, 0.8, 0.7)
    assert DistributionSpec.general([c1, c2]).general_params() == (pytest.approx(0.2), 0.3)
