"""Polynomials as Boolean predictors: parity correlation and the OR hard
distribution."""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from ..distributions import as_generator
from ..errors import InputError, ParamInfeasible, TooManyVariables
from ..estimates import ProbEstimate, hoeffding_halfwidth
from ..poly import MultilinearPoly, evaluate_many, make_poly, translate_domain

MATCH_TOL = 1e-9
PARITY_CAP = 24


def _as_zero_one(P: MultilinearPoly) -> MultilinearPoly:
    return P if P.domain == "zero_one" else translate_domain(P, "zero_one")


def parity_correlation(P: MultilinearPoly, cap: int = PARITY_CAP, chunk: int = 1 << 16) -> float:
    """``P(P(x) = par(x)) - 1/2`` for uniform ``x`` in {0,1}^n.

    Agreement means ``|P(x) - par(x)| <= 1e-9``; a polynomial given on the
    pm1 domain is first rewritten over {0,1}.
    """
    P = _as_zero_one(P)
    n = P.n_vars
    if n > cap:
        raise TooManyVariables(f"parity correlation enumerates 2^{n} points; cap is {cap}")
    shifts = np.arange(n, dtype=np.int64)
    agree = 0
    for lo in range(0, 1 << n, chunk):
        cells = np.arange(lo, min(lo + chunk, 1 << n), dtype=np.int64)
        X = ((cells[:, None] >> shifts) & 1).astype(np.float64)
        par = X.sum(axis=1) % 2
        vals = evaluate_many(P, X) if n else np.full(len(cells), P.constant)
        agree += int(np.count_nonzero(np.abs(vals - par) <= MATCH_TOL))
    return agree / 2.0**n - 0.5


def parity_polynomial(n: int) -> MultilinearPoly:
    """Exact parity over {0,1}: ``(1 - (-1)^n prod(2 x_i - 1)) / 2``."""
    if n < 1:
        raise InputError("parity needs n >= 1")
    sign = -1.0 if n % 2 else 1.0
    Q = make_poly(n, [((), 0.5), (tuple(range(1, n + 1)), -0.5 * sign)], "pm1")
    return translate_domain(Q, "zero_one")


def or_polynomial(n: int) -> MultilinearPoly:
    """Exact OR over {0,1}: ``1 - prod(1 - x_i)``, with 2^n - 1 monomials."""
    if n > 20:
        raise TooManyVariables("the OR polynomial has 2^n monomials; n <= 20")
    terms = [
        (s, (-1.0) ** (k + 1))
        for k in range(1, n + 1)
        for s in itertools.combinations(range(1, n + 1), k)
    ]
    return make_poly(n, terms, "zero_one")


@dataclass(frozen=True)
class OrDistParams:
    """``D`` is the largest integer with ``2^(-a^D) >= 2/n``."""

    n: int
    a: int = 2

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 2:
            raise InputError(f"n must be an integer >= 2, got {self.n}")
        if int(self.a) != self.a or self.a < 2:
            raise InputError(f"a must be an integer >= 2, got {self.a}")
        if self.D < 1:
            raise ParamInfeasible(
                f"n = {self.n}, a = {self.a} gives D = {self.D} < 1; need log2(n) - 1 >= a"
            )

    @property
    def D(self) -> int:
        limit = math.log2(self.n) - 1.0
        D = 0
        while self.a ** (D + 1) <= limit + 1e-12:
            D += 1
        return D

    def rates(self) -> np.ndarray:
        """Per-branch coordinate probability ``2^(-a^i)``, ``i = 1..D``."""
        return np.array([2.0 ** -(self.a**i) for i in range(1, self.D + 1)])

    def to_json(self) -> dict:
        return {"n": self.n, "a": self.a, "D": self.D}


def or_distribution_sampler(params: OrDistParams, seed=None, size: int | None = None, return_branch: bool = False):
    """Half the time the all-zero string; otherwise ``x ~ mu_q^n`` with
    ``q = 2^(-a^i)`` for ``i`` uniform in 1..D.

    Branch tags are 0 for the all-zero branch and ``i`` otherwise.
    """
    rng = as_generator(seed)
    k = 1 if size is None else int(size)
    zero = rng.random(k) < 0.5
    branch = np.where(zero, 0, rng.integers(1, params.D + 1, size=k))
    q = np.concatenate([[0.0], params.rates()])[branch]
    X = (rng.random((k, params.n)) < q[:, None]).astype(np.int8)
    if size is None:
        X, branch = X[0], branch[0]
    return (X, branch) if return_branch else X


def or_zero_probability(params: OrDistParams) -> float:
    """``P(OR(x) = 0) = 1/2 + (1/2D) sum_i (1 - 2^(-a^i))^n``."""
    q = params.rates()
    return 0.5 + float(np.sum(np.exp(params.n * np.log1p(-q)))) / (2 * params.D)


def or_mixture_pmf(params: OrDistParams) -> np.ndarray:
    """Exact mixture law on {0,1}^n, indexed by the integer whose bit ``i``
    is ``x_{i+1}``."""
    n = params.n
    if n > 20:
        raise TooManyVariables("mixture law is tabulated for n <= 20")
    weight = np.array([bin(c).count("1") for c in range(1 << n)])
    pmf = np.zeros(1 << n)
    pmf[0] += 0.5
    for q in params.rates():
        pmf += q**weight * (1 - q) ** (n - weight) / (2 * params.D)
    return pmf


def or_agreement(
    P: MultilinearPoly,
    params: OrDistParams,
    samples: int,
    seed=0,
    confidence: float = 0.99,
    chunk: int = 4096,
) -> ProbEstimate:
    """Monte Carlo ``P(P(x) = OR(x))`` under the OR hard distribution."""
    if P.n_vars != params.n:
        raise InputError(f"polynomial has {P.n_vars} vars, distribution {params.n}")
    if samples < 1:
        raise InputError("samples must be positive")
    P = _as_zero_one(P)
    rng = as_generator(seed)
    hits = 0
    for lo in range(0, samples, chunk):
        k = min(chunk, samples - lo)
        X = or_distribution_sampler(params, rng, k)
        target = X.any(axis=1).astype(np.float64)
        vals = np.full(k, P.constant) if P.is_constant() else evaluate_many(P, X.astype(np.float64))
        hits += int(np.count_nonzero(np.abs(vals - target) <= MATCH_TOL))
    return ProbEstimate(
        hits / samples,
        hoeffding_halfwidth(samples, confidence),
        "monte_carlo",
        samples,
        seed if isinstance(seed, int) else None,
        confidence,
    )
