"""Point, interval and Levy small-ball probabilities of ``P(xi)``.

Exact distributions come from weighted enumeration of the cube.  The
polynomial is first split into variable-disjoint components, whose value
distributions are independent and get convolved.  Each component is
enumerated by walking its high-order variables in Gray-code order, updating
the restricted coefficient vector incrementally through per-variable term
lists, while the low-order block of the cube is evaluated in one matrix
product per batch of prefixes.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .distributions import DistributionSpec, sample, seed_streams
from .errors import InputError, TooManyVariables, UnsupportedDistribution
from .estimates import ProbEstimate, dkw_interval_halfwidth, hoeffding_halfwidth
from .poly import MultilinearPoly, evaluate_many

DEFAULT_CAP = 26
BUCKET_DECIMALS = 9
_FINE_DECIMALS = 12  # intermediate merges; final bucketing happens once
_HALF_BUCKET = 0.5 * 10.0**-BUCKET_DECIMALS
_LOW_BITS = 14
_LOW_CELLS = 1 << 22  # entries of the low-block character matrix
_BATCH_CELLS = 1 << 20  # values materialized per batch


@dataclass(frozen=True, eq=False)
class ValueHistogram:
    """Distribution of ``P(xi)``: sorted support values and their masses."""

    values: np.ndarray
    masses: np.ndarray
    method: str
    n_vars: int
    samples: int | None = None
    seed: int | None = None

    @property
    def entries(self) -> dict[float, float]:
        return {float(v): float(m) for v, m in zip(self.values, self.masses)}

    def total(self) -> float:
        return float(self.masses.sum())

    def mass_at(self, value: float) -> float:
        key = round(float(value), BUCKET_DECIMALS)
        i = np.searchsorted(self.values, key - _HALF_BUCKET)
        if i < len(self.values) and abs(self.values[i] - key) <= _HALF_BUCKET:
            return float(self.masses[i])
        return 0.0

    def interval_mass(self, a: float, length: float) -> float:
        """Mass of the half-open interval ``[a, a + length)``."""
        lo = np.searchsorted(self.values, a - _HALF_BUCKET, side="left")
        hi = np.searchsorted(self.values, a + length - _HALF_BUCKET, side="left")
        return float(self.masses[lo:hi].sum()) if hi > lo else 0.0

    def levy(self, length: float) -> float:
        """``sup_a`` mass of ``[a, a + length)``; an optimal window starts at
        a support point."""
        if length <= 0:
            raise InputError("window length must be positive")
        if len(self.values) == 0:
            return 0.0
        tol = min(_HALF_BUCKET, length / 2)
        cum = np.concatenate([[0.0], np.cumsum(self.masses)])
        ends = np.searchsorted(self.values, self.values + length - tol, side="left")
        starts = np.arange(len(self.values))
        return float(np.max(cum[ends] - cum[starts]))

    def mode(self) -> float:
        return float(self.masses.max()) if len(self.masses) else 0.0

    def to_csv(self) -> str:
        rows = ["value,probability"]
        rows += [f"{float(v)!r},{float(m)!r}" for v, m in zip(self.values, self.masses)]
        return "\n".join(rows) + "\n"

    @classmethod
    def from_csv(cls, text: str, method: str = "exact", n_vars: int = 0):
        lines = [ln for ln in text.strip().splitlines() if ln.strip()]
        if not lines or lines[0].strip() != "value,probability":
            raise InputError("histogram CSV must start with 'value,probability'")
        rows = [tuple(map(float, ln.split(","))) for ln in lines[1:]]
        vals = np.array([r[0] for r in rows])
        masses = np.array([r[1] for r in rows])
        return cls(vals, masses, method, n_vars)


# reduction helpers ---------------------------------------------------------


def _reduce(values: np.ndarray, weights: np.ndarray, integral: bool, decimals: int = _FINE_DECIMALS):
    if values.size == 0:
        return values, weights
    if integral:
        ints = np.rint(values).astype(np.int64)
        lo, hi = int(ints.min()), int(ints.max())
        if hi - lo <= 4 * values.size + 1024:
            counts = np.bincount(ints - lo, weights=weights, minlength=hi - lo + 1)
            nz = np.nonzero(counts)[0]
            return (nz + lo).astype(np.float64), counts[nz]
    keys = np.round(values, decimals) + 0.0
    uniq, inv = np.unique(keys, return_inverse=True)
    return uniq, np.bincount(inv.ravel(), weights=weights, minlength=len(uniq))


def _merge(parts, integral, decimals: int = _FINE_DECIMALS):
    vals = np.concatenate([p[0] for p in parts])
    ws = np.concatenate([p[1] for p in parts])
    return _reduce(vals, ws, integral, decimals)


def _convolve(h1, h2, integral):
    v = (h1[0][:, None] + h2[0][None, :]).ravel()
    w = (h1[1][:, None] * h2[1][None, :]).ravel()
    return _reduce(v, w, integral)


# components ------------------------------------------------------------------


def components(P: MultilinearPoly) -> list[list[int]]:
    """Variable sets of the connected components of the term hypergraph."""
    parent: dict[int, int] = {}

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for s in P.terms:
        for j in s:
            parent.setdefault(j, j)
        for j in s[1:]:
            a, b = find(s[0]), find(j)
            if a != b:
                parent[max(a, b)] = min(a, b)
    groups: dict[int, list[int]] = {}
    for j in parent:
        groups.setdefault(find(j), []).append(j)
    return sorted((sorted(g) for g in groups.values()), key=lambda g: g[0])


# cube enumeration ------------------------------------------------------------


def _popcount(a: np.ndarray) -> np.ndarray:
    return np.bitwise_count(a).astype(np.int64)


class _Component:
    """Precomputed tables for enumerating one component's cube."""

    def __init__(self, terms, k, kind, p):
        self.k, self.kind, self.p = k, kind, p
        self.coef = np.array([c for _, c in terms], dtype=np.float64)
        T = len(terms)
        m = min(k, _LOW_BITS)
        while m > 1 and (1 << m) * T > _LOW_CELLS:
            m -= 1
        self.m, self.h = m, k - m
        low_mask = np.array(
            [sum(1 << j for j in s if j < m) for s, _ in terms], dtype=np.int64
        )
        self.high_vars = [[j - m for j in s if j >= m] for s, _ in terms]
        self.high_size = np.array([len(v) for v in self.high_vars], dtype=np.int64)
        self.terms_of = [[] for _ in range(self.h)]
        for t, hv in enumerate(self.high_vars):
            for j in hv:
                self.terms_of[j].append(t)
        self.terms_of = [np.array(ts, dtype=np.int64) for ts in self.terms_of]

        cells = np.arange(1 << m, dtype=np.int64)
        hit = cells[:, None] & low_mask[None, :]
        if kind == "rademacher":
            # bit 1 <-> x = +1; product over S_low of (2b - 1)
            flips = _popcount(low_mask)[None, :] - _popcount(hit)
            self.A = np.where(flips % 2 == 0, 1.0, -1.0)
            self.w_low = np.full(1 << m, 0.5**m)
        else:
            self.A = (hit == low_mask[None, :]).astype(np.float64)
            ones = _popcount(cells)
            self.w_low = p**ones * (1.0 - p) ** (m - ones)
        self.A_T = np.ascontiguousarray(self.A.T)

    def prefix_weight(self, g: int) -> float:
        if self.kind == "rademacher":
            return 0.5**self.h
        ones = g.bit_count()
        return self.p**ones * (1.0 - self.p) ** (self.h - ones)

    def state_at(self, g: int):
        bits = [(g >> j) & 1 for j in range(self.h)]
        if self.kind == "rademacher":
            sign = np.array(
                [(-1.0) ** sum(1 - bits[j] for j in hv) for hv in self.high_vars]
            )
            return self.coef * sign
        return np.array(
            [sum(1 - bits[j] for j in hv) for hv in self.high_vars], dtype=np.int64
        )

    def run(self, t0: int, t1: int, integral: bool):
        """Histogram contribution of Gray-code prefixes ``t0 <= t < t1``."""
        g = t0 ^ (t0 >> 1)
        state = self.state_at(g)
        batch = max(1, _BATCH_CELLS >> self.m)
        parts = []
        rows, wts = [], []
        for t in range(t0, t1):
            if t > t0:
                ng = t ^ (t >> 1)
                j = (ng ^ g).bit_length() - 1
                ts = self.terms_of[j]
                if self.kind == "rademacher":
                    state[ts] *= -1.0
                elif ng >> j & 1:
                    state[ts] -= 1
                else:
                    state[ts] += 1
                g = ng
            if self.kind == "rademacher":
                rows.append(state.copy())
            else:
                rows.append(np.where(state == 0, self.coef, 0.0))
            wts.append(self.prefix_weight(g))
            if len(rows) == batch or t == t1 - 1:
                C = np.array(rows)
                V = C @ self.A_T
                W = np.asarray(wts)[:, None] * self.w_low[None, :]
                parts.append(_reduce(V.ravel(), W.ravel(), integral))
                rows, wts = [], []
        return _merge(parts, integral)


def _component_histogram(P, comp, kind, p, integral, threads):
    local = {j: i for i, j in enumerate(comp)}
    cset = set(comp)
    terms = [
        (tuple(local[j] for j in s), a) for s, a in P.terms.items() if s and set(s) <= cset
    ]
    tab = _Component(terms, len(comp), kind, p)
    total = 1 << tab.h
    workers = max(1, min(int(threads), total))
    if workers == 1:
        return tab.run(0, total, integral)
    cuts = [total * w // workers for w in range(workers + 1)]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        parts = list(pool.map(lambda w: tab.run(cuts[w], cuts[w + 1], integral), range(workers)))
    return _merge(parts, integral)


def _is_integral(P: MultilinearPoly) -> bool:
    return all(float(a).is_integer() for a in P.terms.values()) and (
        sum(abs(a) for a in P.terms.values()) < 2**52
    )


def exact_distribution(
    P: MultilinearPoly,
    dist: DistributionSpec,
    cap: int = DEFAULT_CAP,
    threads: int = 1,
) -> ValueHistogram:
    """Exact law of ``P(xi)`` for Rademacher or p-biased inputs.

    ``cap`` bounds the number of variables enumerated jointly, i.e. the size
    of the largest variable-disjoint component.
    """
    if dist.kind not in ("rademacher", "biased"):
        raise UnsupportedDistribution("exact enumeration needs a Rademacher or biased distribution")
    if dist.n_vars != P.n_vars:
        raise InputError(f"distribution has {dist.n_vars} vars, polynomial {P.n_vars}")
    comps = components(P)
    biggest = max((len(c) for c in comps), default=0)
    if biggest > cap:
        raise TooManyVariables(
            f"a component couples {biggest} variables; enumeration cap is {cap}"
        )
    integral = _is_integral(P)
    hists = [
        _component_histogram(P, c, dist.kind, dist.p, integral, threads) for c in comps
    ]
    hists.sort(key=lambda h: len(h[0]))
    acc = (np.array([0.0]), np.array([1.0]))
    for h in hists:
        acc = _convolve(acc, h, integral)
    vals, masses = _reduce(acc[0] + P.constant, acc[1], integral, BUCKET_DECIMALS)
    return ValueHistogram(vals, masses, "exact", P.n_vars)


def monte_carlo_distribution(
    P: MultilinearPoly,
    dist: DistributionSpec,
    samples: int,
    seed=0,
    chunk: int = 1 << 16,
    threads: int = 1,
) -> ValueHistogram:
    """Empirical law of ``P(xi)`` from ``samples`` draws.

    Draws are split into fixed-size chunks, each with its own seed stream
    spawned from ``seed``, so the result does not depend on ``threads``.
    """
    if samples < 1:
        raise InputError("samples must be positive")
    integral = _is_integral(P) and dist.kind != "general"
    sizes = [min(chunk, samples - lo) for lo in range(0, samples, chunk)]
    streams = seed_streams(seed, len(sizes))

    def one(k):
        X = sample(dist, streams[k], size=sizes[k])
        vals = evaluate_many(P, X)
        return _reduce(vals, np.ones_like(vals), integral)

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(one, range(len(sizes))))
    else:
        parts = [one(k) for k in range(len(sizes))]
    vals, counts = _merge(parts, integral, BUCKET_DECIMALS)
    return ValueHistogram(
        vals,
        counts / samples,
        "monte_carlo",
        P.n_vars,
        samples=samples,
        seed=seed if isinstance(seed, int) else None,
    )


def distribution(P, dist, method="exact", samples=None, seed=0, cap=DEFAULT_CAP, threads=1):
    if method == "exact":
        return exact_distribution(P, dist, cap=cap, threads=threads)
    if method in ("mc", "monte_carlo"):
        if samples is None:
            raise InputError("Monte Carlo needs a sample count")
        return monte_carlo_distribution(P, dist, samples, seed=seed, threads=threads)
    raise InputError(f"unknown method {method!r}")


def _histogram(P_or_hist, dist, method, samples, seed, cap, threads):
    if isinstance(P_or_hist, ValueHistogram):
        return P_or_hist
    return distribution(P_or_hist, dist, method, samples, seed, cap, threads)


# queries ---------------------------------------------------------------------


def interval_prob(
    P_or_hist,
    dist: DistributionSpec | None = None,
    a: float = -0.5,
    length: float = 1.0,
    method: str = "exact",
    samples: int | None = None,
    seed=0,
    confidence: float = 0.99,
    cap: int = DEFAULT_CAP,
    threads: int = 1,
) -> ProbEstimate:
    """``P(P(xi) in [a, a + length))``; Monte Carlo attaches a Hoeffding CI."""
    hist = _histogram(P_or_hist, dist, method, samples, seed, cap, threads)
    value = hist.interval_mass(a, length)
    return _estimate(hist, value, confidence, uniform=False)


def levy_concentration(
    P_or_hist,
    dist: DistributionSpec | None = None,
    length: float = 1.0,
    method: str = "exact",
    samples: int | None = None,
    seed=0,
    confidence: float = 0.99,
    cap: int = DEFAULT_CAP,
    threads: int = 1,
) -> ProbEstimate:
    """Largest mass of a half-open window of the given length."""
    hist = _histogram(P_or_hist, dist, method, samples, seed, cap, threads)
    return _estimate(hist, hist.levy(length), confidence, uniform=True)


def mode_prob(hist: ValueHistogram, confidence: float = 0.99) -> ProbEstimate:
    """Largest single-value mass."""
    return _estimate(hist, hist.mode(), confidence, uniform=True)


def _estimate(hist: ValueHistogram, value: float, confidence: float, uniform: bool):
    if hist.method == "exact":
        return ProbEstimate(value, 0.0, "exact")
    width = (dkw_interval_halfwidth if uniform else hoeffding_halfwidth)(
        hist.samples, confidence
    )
    return ProbEstimate(value, width, "monte_carlo", hist.samples, hist.seed, confidence)


def binomial_center_mass(n: int) -> float:
    """``C(n, n/2) 2^-n``, the atom at 0 of a sum of n Rademachers (n even)."""
    return math.comb(n, n // 2) / 2.0**n
