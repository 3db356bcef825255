"""Product distributions on n coordinates, samplers, and the two couplings
that reduce biased and general inputs to a uniform {0,1} selector."""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Sequence

import numpy as np

from .errors import InputError, InvalidP, UnsupportedDistribution
from .poly import MultilinearPoly, Term

Sampler = Callable[[np.random.Generator, int], np.ndarray]


def as_generator(seed) -> np.random.Generator:
    """Accept an int, a SeedSequence, a Generator or None."""
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def seed_streams(seed, count: int) -> list[np.random.Generator]:
    """``count`` independent generators derived deterministically from ``seed``."""
    if isinstance(seed, np.random.Generator):
        return seed.spawn(count)
    if not isinstance(seed, np.random.SeedSequence):
        seed = np.random.SeedSequence(seed)
    return [np.random.default_rng(s) for s in seed.spawn(count)]


@dataclass(frozen=True)
class GeneralCoordinate:
    """One coordinate of a general product distribution.

    ``split_prob`` is ``P(xi <= shift)``; the split probability used by
    ``bound_general`` is ``min(split_prob, 1 - split_prob)``.  ``escape_prob`` is
    ``P(|xi - shift| >= 1)``.
    """

    sampler: Sampler
    shift: float = 0.0
    split_prob: float = 0.5
    escape_prob: float = 1.0

    def __post_init__(self):
        if not 0.0 < self.split_prob < 1.0:
            raise InputError(f"split_prob must lie in (0,1), got {self.split_prob}")
        if not 0.0 < self.escape_prob <= 1.0:
            raise InputError(f"escape_prob must lie in (0,1], got {self.escape_prob}")

    @property
    def p(self) -> float:
        return min(self.split_prob, 1.0 - self.split_prob)


def rademacher_coordinate() -> GeneralCoordinate:
    return GeneralCoordinate(
        lambda rng, k: rng.integers(0, 2, size=k) * 2.0 - 1.0, 0.0, 0.5, 1.0
    )


@dataclass(frozen=True)
class DistributionSpec:
    kind: str
    n_vars: int
    p: float | None = None
    coords: tuple[GeneralCoordinate, ...] | None = None

    def __post_init__(self):
        if self.kind not in ("rademacher", "biased", "general"):
            raise InputError(f"unknown distribution kind {self.kind!r}")
        if self.n_vars < 0:
            raise InputError("n_vars must be nonnegative")
        if self.kind == "biased" and not (self.p is not None and 0.0 < self.p < 1.0):
            raise InvalidP(f"biased distribution needs p in (0,1), got {self.p}")
        if self.kind == "general":
            if self.coords is None or len(self.coords) != self.n_vars:
                raise InputError("general distribution needs one coordinate per variable")

    @classmethod
    def rademacher(cls, n: int) -> "DistributionSpec":
        return cls("rademacher", n)

    @classmethod
    def biased(cls, n: int, p: float) -> "DistributionSpec":
        return cls("biased", n, p=float(p))

    @classmethod
    def general(cls, coords: Sequence[GeneralCoordinate]) -> "DistributionSpec":
        return cls("general", len(coords), coords=tuple(coords))

    @property
    def domain(self) -> str:
        return {"rademacher": "pm1", "biased": "zero_one", "general": "real"}[self.kind]

    def general_params(self) -> tuple[float, float]:
        """Smallest (split probability, escape probability) over coordinates."""
        if self.kind != "general":
            raise UnsupportedDistribution("only general distributions carry (p, eps)")
        return min(c.p for c in self.coords), min(c.escape_prob for c in self.coords)

    def to_json(self) -> dict:
        out = {"kind": self.kind, "n": self.n_vars}
        if self.p is not None:
            out["p"] = self.p
        return out


# samplers -----------------------------------------------------------------


def sample(dist: DistributionSpec, seed=None, size: int | None = None) -> np.ndarray:
    """Draw one point (``size=None``) or a ``(size, n)`` matrix."""
    rng = as_generator(seed)
    k = 1 if size is None else int(size)
    n = dist.n_vars
    if dist.kind == "rademacher":
        X = (rng.integers(0, 2, size=(k, n), dtype=np.int8) * 2 - 1).astype(np.int8)
    elif dist.kind == "biased":
        X = (rng.random((k, n)) < dist.p).astype(np.int8)
    else:
        X = np.empty((k, n))
        for i, c in enumerate(dist.coords):
            X[:, i] = c.sampler(rng, k)
    return X[0] if size is None else X


def coupled_biased_sampler(p: float, n: int, seed=None, size: int | None = None):
    """Draw ``(xi, eta, xi_prime)`` with ``xi = eta * xi_prime`` componentwise.

    ``eta`` is uniform on {0,1} and ``P(xi_prime = 1) = 2p``, so ``xi`` has
    law ``mu_p``.  Requires ``p <= 1/2``; for larger ``p`` flip ``x -> 1 - x``
    first.
    """
    if not 0.0 < p <= 0.5:
        raise InvalidP(f"coupling needs 0 < p <= 1/2, got {p}; use the x -> 1-x symmetry")
    rng = as_generator(seed)
    shape = (n,) if size is None else (int(size), n)
    eta = rng.integers(0, 2, size=shape, dtype=np.int8)
    xi_prime = (rng.random(shape) < 2.0 * p).astype(np.int8)
    return eta * xi_prime, eta, xi_prime


def coupling_pushforward(p, n: int) -> dict[tuple[int, ...], Fraction]:
    """Exact law of ``xi = eta * xi_prime`` by enumerating every pair.

    ``p`` is converted to a Fraction, so dyadic inputs give exact masses.
    """
    p = Fraction(p)
    if not 0 < p <= Fraction(1, 2):
        raise InvalidP(f"coupling needs 0 < p <= 1/2, got {p}")
    eta_law = {0: Fraction(1, 2), 1: Fraction(1, 2)}
    prime_law = {0: 1 - 2 * p, 1: 2 * p}
    out: dict[tuple[int, ...], Fraction] = {}
    for eta in itertools.product((0, 1), repeat=n):
        w_eta = math.prod(eta_law[e] for e in eta)
        for xp in itertools.product((0, 1), repeat=n):
            w = w_eta * math.prod(prime_law[v] for v in xp)
            if w == 0:
                continue
            xi = tuple(e * v for e, v in zip(eta, xp))
            out[xi] = out.get(xi, Fraction(0)) + w
    return out


def product_law(p, n: int) -> dict[tuple[int, ...], Fraction]:
    """Exact ``mu_p^n`` as a dict over {0,1}^n."""
    p = Fraction(p)
    return {
        x: math.prod(p if v else 1 - p for v in x)
        for x in itertools.product((0, 1), repeat=n)
    }


def total_variation(a: dict, b: dict):
    keys = set(a) | set(b)
    return sum(abs(a.get(k, 0) - b.get(k, 0)) for k in keys) / 2


def _conditional(coord: GeneralCoordinate, rng, k: int, above: bool) -> np.ndarray:
    # rejection sampling from the coordinate's own sampler
    out = np.empty(k)
    filled = 0
    batch = max(64, 2 * k)
    for _ in range(10_000):
        draw = np.asarray(coord.sampler(rng, batch), dtype=np.float64)
        keep = draw[draw > coord.shift] if above else draw[draw <= coord.shift]
        take = min(len(keep), k - filled)
        out[filled:filled + take] = keep[:take]
        filled += take
        if filled == k:
            return out
    raise InputError("conditional sampler failed to reach the requested count")


def coupled_general_sampler(dist: DistributionSpec, seed=None, size: int | None = None):
    """Draw ``(xi_prime, eta, xi_plus, xi_minus)``.

    ``xi_plus`` follows the coordinate law conditioned above its shift,
    ``xi_minus`` conditioned at or below it, ``eta`` is 1 with probability
    ``P(xi > shift)``, and ``xi_prime = eta * xi_plus + (1 - eta) * xi_minus``
    has the coordinate law.
    """
    if dist.kind != "general":
        raise UnsupportedDistribution("coupled_general_sampler needs a general distribution")
    rng = as_generator(seed)
    k = 1 if size is None else int(size)
    n = dist.n_vars
    plus = np.empty((k, n))
    minus = np.empty((k, n))
    eta = np.empty((k, n), dtype=np.int8)
    for i, c in enumerate(dist.coords):
        eta[:, i] = rng.random(k) >= c.split_prob
        plus[:, i] = _conditional(c, rng, k, above=True)
        minus[:, i] = _conditional(c, rng, k, above=False)
    xi_prime = eta * plus + (1 - eta) * minus
    if size is None:
        return xi_prime[0], eta[0], plus[0], minus[0]
    return xi_prime, eta, plus, minus


# moments ------------------------------------------------------------------


def biased_fourier(P: MultilinearPoly, p: float) -> dict[Term, float]:
    """Coefficients of ``P`` (read on {0,1}) in the orthonormal p-biased basis
    ``phi(x) = (x - p) / sqrt(p (1 - p))``."""
    sigma = math.sqrt(p * (1.0 - p))
    out: dict[Term, float] = {}
    for s, a in P.terms.items():
        k = len(s)
        for r in range(k + 1):
            for sub in itertools.combinations(s, r):
                out[sub] = out.get(sub, 0.0) + a * p ** (k - r) * sigma**r
    return out


def expectation(P: MultilinearPoly, dist: DistributionSpec) -> float:
    if dist.kind == "rademacher":
        return float(P.constant)
    if dist.kind == "biased":
        return float(sum(a * dist.p ** len(s) for s, a in P.terms.items()))
    raise UnsupportedDistribution("exact moments need a Rademacher or biased distribution")


def variance(P: MultilinearPoly, dist: DistributionSpec) -> float:
    if dist.kind == "rademacher":
        return float(sum(a * a for s, a in P.terms.items() if s))
    if dist.kind == "biased":
        return float(sum(b * b for s, b in biased_fourier(P, dist.p).items() if s))
    raise UnsupportedDistribution("exact moments need a Rademacher or biased distribution")
