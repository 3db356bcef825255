"""Closed-form small-ball bounds and calibration of their absolute constant.

Every bound is a function of a size parameter (rank, number of
coefficients, or variance), the degree, and a constant ``B`` that the
underlying inequalities leave unspecified.  Logs are natural throughout.
Evaluation happens in log space so ranks up to ~1e300 are fine.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq

from .distributions import DistributionSpec, seed_streams
from .errors import EmptyCorpus, HypothesisViolated, InputError
from .poly import MultilinearPoly, make_poly
from .regularity import rank
from .smallball import exact_distribution

LN2 = math.log(2.0)


def _check_B(B):
    if not B > 0:
        raise InputError(f"B must be positive, got {B}")


# main bound --------------------------------------------------------------------


def _log_branch1(L: float, d: int, B: float) -> float:
    return math.log(B) + (4.0 / 3.0) * math.log(d) + 0.5 * math.log(L) - L / (4 * d + 1)


def _log_branch2(L: float, d: int, B: float) -> float:
    return B * d * d * math.log(L) ** 2 - L / 2.0


def main_branches(r: float, d: int, B: float = 1.0) -> tuple[float, float]:
    """The two raw branches
    ``B d^(4/3) sqrt(log r) / r^(1/(4d+1))`` and ``exp(B d^2 (log log r)^2) / sqrt(r)``."""
    if r < 2:
        raise HypothesisViolated(f"rank r = {r} < 2")
    if d < 1:
        raise InputError("degree must be at least 1")
    _check_B(B)
    L = math.log(r)
    return math.exp(_log_branch1(L, d, B)), _exp_capped(_log_branch2(L, d, B))


def _exp_capped(x: float) -> float:
    return math.exp(min(x, 700.0))


def _envelope_log(L: float, d: int, B: float) -> float:
    # branch 1 is concave in L = log r, so its minimum over [log 2, L] sits
    # at an endpoint; branch 2 decreases until 4 kappa log L = L, which has a
    # root in (1, e) once kappa > e / 4
    lo = LN2
    best = min(_log_branch1(lo, d, B), _log_branch1(L, d, B))
    cands = [lo, L]
    kappa = B * d * d
    if kappa > math.e / 4.0:
        h = lambda t: 4.0 * kappa * math.log(t) - t
        root = brentq(h, 1.0, math.e) if h(math.e) > 0 else None
        if root is not None and lo < root < L:
            cands.append(root)
    best = min(best, min(_log_branch2(t, d, B) for t in cands))
    return best


def bound_main(r: float, d: int, B: float = 1.0, envelope: bool = True) -> float:
    """Small-ball bound for a degree-``d`` polynomial of rank ``r >= 2``.

    The raw expression is the smaller of the two branches.  It is not
    monotone in ``r`` (branch 2 first falls, then climbs before decaying),
    yet it holds for every ``r' <= rank``.  With ``envelope`` the result is
    the minimum over real ``r'`` in ``[2, r]``, which is a valid bound and
    nonincreasing in ``r``.
    """
    b1, b2 = main_branches(r, d, B)
    if not envelope:
        return min(b1, b2)
    return math.exp(min(_envelope_log(math.log(r), d, B), math.log(min(b1, b2))))


def biased_effective_rank(r: float, d: int, p: float) -> float:
    a = min(p, 1.0 - p)
    return (2.0 * a) ** d * r


def bound_biased(r: float, d: int, p: float, B: float = 1.0, envelope: bool = True) -> float:
    """Bound for ``mu_p`` inputs: the main bound at ``r~ = 2^d min(p,1-p)^d r``,
    which must be at least 3."""
    if not 0.0 < p < 1.0:
        raise InputError(f"p must lie in (0,1), got {p}")
    rt = biased_effective_rank(r, d, p)
    if rt < 3:
        raise HypothesisViolated(f"effective rank {rt:.6g} < 3")
    return bound_main(rt, d, B, envelope)


def general_effective_rank(r: float, d: int, p: float, eps: float) -> float:
    return (p * eps) ** d * r


def bound_general(r: float, d: int, p: float, eps: float, B: float = 1.0, envelope: bool = True) -> float:
    """Bound for general independent inputs with split probability ``p`` and
    escape probability ``eps``: the main bound at ``r~ = (p eps)^d r >= 3``."""
    if not 0.0 < p <= 1.0 or not 0.0 < eps <= 1.0:
        raise InputError("p and eps must lie in (0, 1]")
    rt = general_effective_rank(r, d, p, eps)
    if rt < 3:
        raise HypothesisViolated(f"effective rank {rt:.6g} < 3")
    return bound_main(rt, d, B, envelope)


# classical bounds ------------------------------------------------------------------


def bound_ctv(m: float, d: int, B: float = 1.0) -> float:
    """``B m^(-1/2^((d^2+d)/2))`` for ``m`` coefficients of magnitude at least 1."""
    if m < 1:
        raise HypothesisViolated(f"m = {m} < 1")
    _check_B(B)
    return math.exp(math.log(B) - math.log(m) / 2.0 ** ((d * d + d) / 2))


def bound_rv(r: float, d: int, B: float = 1.0) -> float:
    """``B r^(-1/(d 2^(d+1)))``."""
    if r < 1:
        raise HypothesisViolated(f"rank r = {r} < 1")
    _check_B(B)
    return math.exp(math.log(B) - math.log(r) / (d * 2.0 ** (d + 1)))


def bound_carbery_wright(eps: float | None, d: int, var: float | None = None, B: float = 1.0) -> float:
    """``P(|P| <= eps sqrt(Var P)) <= B eps^(1/d)``.

    With ``eps=None`` the unit-interval form ``B / Var^(1/(2d))`` is returned.
    """
    _check_B(B)
    if eps is None:
        if var is None or var <= 0:
            raise InputError("unit-interval form needs a positive variance")
        return math.exp(math.log(B) - math.log(var) / (2 * d))
    if eps < 0:
        raise InputError("eps must be nonnegative")
    return B * eps ** (1.0 / d)


def bound_regular(alpha_len: float, d: int, var: float, tau: float, C: float = 1.0) -> float:
    """Invariance bound for a tau-regular polynomial:
    ``C d alpha^(1/d) / Var^(1/(2d)) + C d tau^(1/(4d+1))``."""
    if var <= 0:
        raise InputError("variance must be positive")
    if alpha_len < 0 or tau < 0:
        raise InputError("alpha and tau must be nonnegative")
    gauss = C * d * alpha_len ** (1.0 / d) / var ** (1.0 / (2 * d))
    return gauss + C * d * tau ** (1.0 / (4 * d + 1))


# reports -------------------------------------------------------------------------

_BOUNDS = {
    "main": (bound_main, ("r", "d")),
    "biased": (bound_biased, ("r", "d", "p")),
    "general": (bound_general, ("r", "d", "p", "eps")),
    "ctv": (bound_ctv, ("m", "d")),
    "rv": (bound_rv, ("r", "d")),
    "carbery_wright": (bound_carbery_wright, ("eps", "d", "var")),
}
BOUND_NAMES = tuple(_BOUNDS) + ("regular",)


@dataclass(frozen=True)
class BoundReport:
    bound_name: str
    inputs: dict
    B: float
    raw: float | None
    hypothesis_ok: bool = True
    note: str = ""

    @property
    def value(self) -> float:
        """Reported value, clamped to [0, 1]; 1 when the hypothesis fails."""
        if self.raw is None:
            return 1.0
        return min(1.0, max(0.0, self.raw))

    @property
    def vacuous(self) -> bool:
        return self.raw is None or self.raw >= 1.0

    def to_json(self) -> dict:
        return {
            "bound": self.bound_name,
            "inputs": dict(self.inputs),
            "B": self.B,
            "raw": self.raw,
            "value": self.value,
            "vacuous": self.vacuous,
            "hypothesis_ok": self.hypothesis_ok,
            "note": self.note,
        }


def evaluate_bound(name: str, B: float = 1.0, **inputs) -> BoundReport:
    """Evaluate a bound by name; a failed hypothesis yields a flagged report
    rather than an exception."""
    if name == "regular":
        keys = ("alpha_len", "d", "var", "tau")
        fn = lambda **kw: bound_regular(C=B, **kw)
    elif name in _BOUNDS:
        fn0, keys = _BOUNDS[name]
        fn = lambda **kw: fn0(B=B, **kw)
    else:
        raise InputError(f"unknown bound {name!r}; choose from {', '.join(BOUND_NAMES)}")
    args = {k: inputs.get(k) for k in keys}
    if name == "carbery_wright":
        args["var"] = inputs.get("var")
    elif any(v is None for v in args.values()):
        missing = [k for k, v in args.items() if v is None]
        raise InputError(f"bound {name!r} needs {', '.join(missing)}")
    for k in ("envelope",):
        if k in inputs and name in ("main", "biased", "general"):
            args[k] = inputs[k]
    try:
        raw = fn(**args)
    except HypothesisViolated as exc:
        return BoundReport(name, args, B, None, False, str(exc))
    return BoundReport(name, args, B, raw)


# calibration -----------------------------------------------------------------------


@dataclass(frozen=True)
class CorpusItem:
    poly: MultilinearPoly
    dist: DistributionSpec
    length: float = 1.0
    measured: float | None = None
    rank: int | None = None


@dataclass(frozen=True)
class Calibration:
    B: float
    witness: int
    needed: tuple[float | None, ...]
    skipped: tuple[int, ...] = field(default_factory=tuple)

    def to_json(self) -> dict:
        return {"B": self.B, "witness": self.witness, "needed": list(self.needed), "skipped": list(self.skipped)}


def measure(item: CorpusItem) -> tuple[float, int]:
    """Exact Levy concentration at the item's length, and its exact rank."""
    m = item.measured
    if m is None:
        m = exact_distribution(item.poly, item.dist).levy(item.length)
    r = item.rank
    if r is None:
        res = rank(item.poly)
        r = res.exact_rank if res.exact_rank is not None else res.greedy_rank
    return m, r


def _bound_for(name: str, item: CorpusItem, r: int):
    d = item.poly.degree
    if name == "main":
        return lambda B: bound_main(r, d, B)
    if name == "biased":
        p = item.dist.p if item.dist.kind == "biased" else 0.5
        return lambda B: bound_biased(r, d, p, B)
    if name == "rv":
        return lambda B: bound_rv(r, d, B)
    raise InputError(f"calibration is not available for bound {name!r}")


def minimal_B(f, target: float) -> float:
    """Least ``B > 0`` with ``f(B) >= target`` for ``f`` increasing in ``B``."""
    if target <= 0:
        return 0.0
    lo, hi = 1e-12, 1.0
    while f(hi) < target:
        hi *= 2.0
        if hi > 1e12:
            raise InputError("calibration target is out of reach")
    if f(lo) >= target:
        return lo
    g = lambda lb: f(math.exp(lb)) - target
    return math.exp(brentq(g, math.log(lo), math.log(hi), xtol=1e-14, rtol=1e-13))


def calibrate_B(corpus, bound_name: str = "main", method: str = "root") -> Calibration:
    """Smallest ``B`` making the bound dominate every measured probability.

    ``method="root"`` solves ``bound(B) = measured`` per instance, so the
    calibrated bound dominates by construction even where ``B`` enters
    nonlinearly.  ``method="ratio"`` returns ``max measured / bound(B=1)``,
    which coincides for bounds linear in ``B``.  Instances whose hypotheses
    fail are skipped and listed.
    """
    corpus = list(corpus)
    if not corpus:
        raise EmptyCorpus("calibration corpus is empty")
    if method not in ("root", "ratio"):
        raise InputError(f"unknown calibration method {method!r}")
    needed: list[float | None] = []
    skipped = []
    for k, item in enumerate(corpus):
        m, r = measure(item)
        f = _bound_for(bound_name, item, r)
        try:
            f(1.0)
        except HypothesisViolated:
            needed.append(None)
            skipped.append(k)
            continue
        needed.append(minimal_B(f, m) if method == "root" else m / f(1.0))
    usable = [(b, k) for k, b in enumerate(needed) if b is not None]
    if not usable:
        raise EmptyCorpus("no corpus instance satisfies the bound's hypotheses")
    B, arg = max(usable)
    return Calibration(B, arg, tuple(needed), tuple(skipped))


def random_corpus(
    count: int,
    seed=0,
    n: int = 16,
    degrees=(2, 3),
    top_terms: int = 12,
    low_terms: int = 6,
    coef_range: int = 3,
) -> list[CorpusItem]:
    """Random Rademacher instances with integer coefficients in
    ``[-coef_range, coef_range] minus {0}``.

    Each polynomial has ``top_terms`` distinct degree-``d`` monomials and
    ``low_terms`` monomials of lower degree (possibly the constant).
    """
    coefs = np.array([c for c in range(-coef_range, coef_range + 1) if c])
    out = []
    for k, rng in enumerate(seed_streams(seed, count)):
        d = int(degrees[k % len(degrees)])
        terms: dict[tuple[int, ...], float] = {}
        while len(terms) < top_terms:
            s = tuple(sorted(int(j) + 1 for j in rng.choice(n, d, replace=False)))
            terms.setdefault(s, float(rng.choice(coefs)))
        for _ in range(low_terms):
            size = int(rng.integers(0, d))
            s = tuple(sorted(int(j) + 1 for j in rng.choice(n, size, replace=False)))
            terms[s] = terms.get(s, 0.0) + float(rng.choice(coefs))
        out.append(CorpusItem(make_poly(n, terms.items()), DistributionSpec.rademacher(n)))
    return out
