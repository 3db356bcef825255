"""Sparse multilinear polynomials over the Boolean cube.

A polynomial is stored as a map from strictly increasing tuples of 1-based
variable indices to float coefficients.  The empty tuple is the constant
term.  The ``domain`` tag records which cube the variables live on and
decides how products reduce (``x**2 == 1`` on ``pm1``, ``x**2 == x`` on
``zero_one``).
"""
from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import (
    DomainMismatch,
    DuplicateIndexWithinTerm,
    IndexOutOfRange,
    InputError,
    LengthMismatch,
)

DOMAINS = ("pm1", "zero_one")

Term = tuple[int, ...]


def _check_domain(domain: str) -> str:
    if domain not in DOMAINS:
        raise DomainMismatch(f"unknown domain {domain!r}; expected one of {DOMAINS}")
    return domain


@dataclass(frozen=True, eq=False)
class MultilinearPoly:
    """Canonical sparse multilinear polynomial.

    Build instances with :func:`make_poly`; the constructor trusts its input.
    """

    n_vars: int
    terms: Mapping[Term, float]
    domain: str = "pm1"
    _arrays: dict = field(default_factory=dict, repr=False, compare=False)

    @property
    def degree(self) -> int:
        return max((len(s) for s in self.terms), default=0)

    @property
    def constant(self) -> float:
        return self.terms.get((), 0.0)

    def is_constant(self) -> bool:
        return all(len(s) == 0 for s in self.terms)

    def coefficient(self, vars: Iterable[int]) -> float:
        return self.terms.get(tuple(sorted(vars)), 0.0)

    def variables(self) -> list[int]:
        """Variables that appear in at least one term, ascending."""
        return sorted({j for s in self.terms for j in s})

    def __len__(self):
        return len(self.terms)

    def __eq__(self, other):
        if not isinstance(other, MultilinearPoly):
            return NotImplemented
        return (
            self.n_vars == other.n_vars
            and self.domain == other.domain
            and dict(self.terms) == dict(other.terms)
        )

    def __repr__(self):
        body = " + ".join(
            f"{c:g}" + "".join(f"*x{j}" for j in s) for s, c in self.terms.items()
        )
        return f"MultilinearPoly(n={self.n_vars}, {self.domain}: {body or '0'})"

    # arithmetic -----------------------------------------------------------

    def _compatible(self, other: "MultilinearPoly"):
        if self.n_vars != other.n_vars:
            raise LengthMismatch(f"n_vars differ: {self.n_vars} vs {other.n_vars}")
        if self.domain != other.domain:
            raise DomainMismatch(f"domains differ: {self.domain} vs {other.domain}")

    def __add__(self, other):
        if isinstance(other, (int, float)):
            other = constant_poly(self.n_vars, other, self.domain)
        self._compatible(other)
        return make_poly(
            self.n_vars,
            itertools.chain(self.terms.items(), other.terms.items()),
            self.domain,
        )

    __radd__ = __add__

    def __neg__(self):
        return self.scale(-1.0)

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def scale(self, c: float) -> "MultilinearPoly":
        return make_poly(
            self.n_vars, ((s, c * a) for s, a in self.terms.items()), self.domain
        )

    def __mul__(self, other):
        if isinstance(other, (int, float)):
            return self.scale(float(other))
        self._compatible(other)
        out: dict[Term, float] = {}
        for s, a in self.terms.items():
            ss = set(s)
            for t, b in other.terms.items():
                if self.domain == "pm1":
                    key = tuple(sorted(ss.symmetric_difference(t)))
                else:
                    key = tuple(sorted(ss.union(t)))
                out[key] = out.get(key, 0.0) + a * b
        return make_poly(self.n_vars, out.items(), self.domain)

    __rmul__ = __mul__

    def __pow__(self, k: int):
        if k < 0 or int(k) != k:
            raise InputError("only nonnegative integer powers are supported")
        result = constant_poly(self.n_vars, 1.0, self.domain)
        base = self
        k = int(k)
        while k:
            if k & 1:
                result = result * base
            base = base * base
            k >>= 1
        return result

    # cached array views ----------------------------------------------------

    def degree_groups(self) -> list[tuple[np.ndarray, np.ndarray]]:
        """Terms grouped by size: list of ``(index_matrix, coefficients)``.

        Index matrices hold 0-based variable positions, one row per term.
        The constant term is reported as a group with a ``(1, 0)`` matrix.
        """
        if "groups" not in self._arrays:
            by_deg: dict[int, list[tuple[Term, float]]] = {}
            for s, a in self.terms.items():
                by_deg.setdefault(len(s), []).append((s, a))
            groups = []
            for k in sorted(by_deg):
                items = by_deg[k]
                idx = np.array([[j - 1 for j in s] for s, _ in items], dtype=np.int64)
                idx = idx.reshape(len(items), k)
                coef = np.array([a for _, a in items], dtype=np.float64)
                groups.append((idx, coef))
            self._arrays["groups"] = groups
        return self._arrays["groups"]


def constant_poly(n_vars: int, c: float, domain: str = "pm1") -> MultilinearPoly:
    return make_poly(n_vars, [((), float(c))], domain)


def make_poly(
    n_vars: int,
    terms: Iterable[tuple[Iterable[int], float]],
    domain: str = "pm1",
) -> MultilinearPoly:
    """Build a canonical polynomial: merge duplicate sets, drop zeros, sort.

    >>> make_poly(3, [({1, 2}, 1.0), ({1, 2}, 2.0)]).terms
    {(1, 2): 3.0}
    """
    if int(n_vars) != n_vars or n_vars < 0:
        raise InputError(f"n_vars must be a nonnegative integer, got {n_vars!r}")
    n_vars = int(n_vars)
    _check_domain(domain)
    acc: dict[Term, float] = {}
    for vars_, coef in terms:
        vs = [int(j) for j in vars_]
        key = tuple(sorted(vs))
        if len(set(key)) != len(key):
            raise DuplicateIndexWithinTerm(f"term {vs} repeats a variable")
        for j in key:
            if j < 1 or j > n_vars:
                raise IndexOutOfRange(f"variable {j} outside [1, {n_vars}]")
        acc[key] = acc.get(key, 0.0) + float(coef)
    canon = {k: acc[k] for k in sorted(acc) if acc[k] != 0.0}
    return MultilinearPoly(n_vars, canon, domain)


def prune(P: MultilinearPoly, tol: float = 1e-12) -> MultilinearPoly:
    """Drop coefficients with magnitude at most ``tol``."""
    return make_poly(
        P.n_vars, ((s, a) for s, a in P.terms.items() if abs(a) > tol), P.domain
    )


def linear_form(coefs: Sequence[float], domain: str = "pm1") -> MultilinearPoly:
    """``sum_i coefs[i-1] * x_i``."""
    return make_poly(len(coefs), (((i + 1,), c) for i, c in enumerate(coefs)), domain)


# evaluation ----------------------------------------------------------------


def evaluate(P, x: Sequence[float]) -> float:
    """Value of ``P`` (or of a :class:`RestrictedPoly`) at a full-length point."""
    if isinstance(P, RestrictedPoly):
        return P.constant_part + evaluate(P.fluctuation, x)
    if len(x) != P.n_vars:
        raise LengthMismatch(f"point has length {len(x)}, polynomial has {P.n_vars} vars")
    total = 0.0
    for s, a in P.terms.items():
        prod = a
        for j in s:
            prod *= x[j - 1]
        total += prod
    return float(total)


def evaluate_many(P: MultilinearPoly, X: np.ndarray, chunk: int = 1 << 15) -> np.ndarray:
    """Vectorized evaluation at each row of ``X`` (shape ``(N, n_vars)``)."""
    X = np.asarray(X)
    if X.ndim != 2 or X.shape[1] != P.n_vars:
        raise LengthMismatch(f"expected shape (N, {P.n_vars}), got {X.shape}")
    N = X.shape[0]
    out = np.zeros(N, dtype=np.float64)
    groups = P.degree_groups()
    for lo in range(0, N, chunk):
        Xc = X[lo:lo + chunk]
        acc = out[lo:lo + chunk]
        for idx, coef in groups:
            if idx.shape[1] == 0:
                acc += coef.sum()
                continue
            mon = Xc[:, idx[:, 0]].astype(np.float64)
            for t in range(1, idx.shape[1]):
                mon *= Xc[:, idx[:, t]]
            acc += mon @ coef
    return out


def gradient_many(P: MultilinearPoly, X: np.ndarray) -> np.ndarray:
    """Row-wise gradient: ``G[k, i] = dP/dx_{i+1}`` at ``X[k]``."""
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2 or X.shape[1] != P.n_vars:
        raise LengthMismatch(f"expected shape (N, {P.n_vars}), got {X.shape}")
    G = np.zeros_like(X)
    for idx, coef in P.degree_groups():
        k = idx.shape[1]
        if k == 0:
            continue
        cols = X[:, idx]  # (N, T, k)
        for t in range(k):
            others = np.prod(np.delete(cols, t, axis=2), axis=2) * coef
            onehot = np.zeros((idx.shape[0], P.n_vars))
            onehot[np.arange(idx.shape[0]), idx[:, t]] = 1.0
            G += others @ onehot
    return G


# power-form input ----------------------------------------------------------


def multilinearize(expr, n_vars: int, domain: str = "pm1") -> MultilinearPoly:
    """Reduce a polynomial with arbitrary exponents to multilinear form.

    ``expr`` is either a sequence of ``(exponents, coef)`` pairs, where
    ``exponents`` maps a 1-based variable index to a nonnegative integer
    power, or a sympy expression in symbols ``x1 .. xn`` (expanded first).
    On ``pm1`` even powers collapse to 1 and odd powers to ``x``; on
    ``zero_one`` every positive power collapses to ``x``.
    """
    _check_domain(domain)
    if hasattr(expr, "free_symbols"):
        expr = _sympy_terms(expr, n_vars)
    out = []
    for exps, coef in expr:
        if not isinstance(exps, Mapping):
            counts: dict[int, int] = {}
            for j in exps:
                counts[int(j)] = counts.get(int(j), 0) + 1
            exps = counts
        vars_ = []
        for j, e in exps.items():
            if int(e) != e or e < 0:
                raise InputError(f"exponent {e!r} on x{j} is not a nonnegative integer")
            if domain == "pm1" and e % 2 == 1:
                vars_.append(j)
            elif domain == "zero_one" and e >= 1:
                vars_.append(j)
        out.append((vars_, coef))
    return make_poly(n_vars, out, domain)


def _sympy_terms(expr, n_vars):
    import sympy

    symbols = sympy.symbols(f"x1:{n_vars + 1}")
    unknown = set(expr.free_symbols) - set(symbols)
    if unknown:
        raise InputError(f"unexpected symbols {sorted(map(str, unknown))}")
    poly = sympy.Poly(sympy.expand(expr), *symbols)
    return [
        ({i + 1: int(e) for i, e in enumerate(monom) if e}, float(c))
        for monom, c in poly.terms()
    ]


# restriction -----------------------------------------------------------------


@dataclass(frozen=True)
class Restriction:
    """Partial assignment of variables (1-based index -> fixed value)."""

    assignments: Mapping[int, float]
    domain: str = "pm1"

    def __post_init__(self):
        _check_domain(self.domain)
        allowed = (-1.0, 1.0) if self.domain == "pm1" else (0.0, 1.0)
        for j, v in self.assignments.items():
            if float(v) not in allowed:
                raise DomainMismatch(f"x{j} = {v} is not in the {self.domain} domain")

    @property
    def fixed(self) -> frozenset[int]:
        return frozenset(self.assignments)

    def __len__(self):
        return len(self.assignments)

    def merged(self, other: "Restriction") -> "Restriction":
        if other.domain != self.domain:
            raise DomainMismatch("cannot merge restrictions on different domains")
        both = dict(self.assignments)
        both.update(other.assignments)
        return Restriction(both, self.domain)

    def to_json(self) -> dict:
        return {
            "domain": self.domain,
            "assignments": {str(j): self.assignments[j] for j in sorted(self.assignments)},
        }


@dataclass(frozen=True)
class RestrictedPoly:
    """``P_rho = constant_part + fluctuation`` after fixing some variables."""

    constant_part: float
    fluctuation: MultilinearPoly
    fixed: frozenset[int] = frozenset()

    @property
    def free_vars(self) -> list[int]:
        return [j for j in range(1, self.fluctuation.n_vars + 1) if j not in self.fixed]

    def as_poly(self) -> MultilinearPoly:
        return self.fluctuation + self.constant_part


def restrict(P: MultilinearPoly, rho: Restriction) -> RestrictedPoly:
    """Fix the variables in ``rho``; monomials touching only fixed variables
    (and the constant term) collapse into ``constant_part``."""
    if rho.domain != P.domain:
        raise DomainMismatch(f"restriction on {rho.domain}, polynomial on {P.domain}")
    for j in rho.assignments:
        if j < 1 or j > P.n_vars:
            raise IndexOutOfRange(f"restricted variable {j} outside [1, {P.n_vars}]")
    vals = rho.assignments
    const = 0.0
    acc: dict[Term, float] = {}
    for s, a in P.terms.items():
        c = a
        free = []
        for j in s:
            if j in vals:
                c *= vals[j]
            else:
                free.append(j)
        if not free:
            const += c
        elif c != 0.0:
            key = tuple(free)
            acc[key] = acc.get(key, 0.0) + c
    fluct = make_poly(P.n_vars, acc.items(), P.domain)
    return RestrictedPoly(float(const), fluct, rho.fixed)


def restrict_poly(R: RestrictedPoly, rho: Restriction) -> RestrictedPoly:
    """Restrict an already-restricted polynomial further."""
    inner = restrict(R.fluctuation, rho)
    return RestrictedPoly(
        R.constant_part + inner.constant_part, inner.fluctuation, R.fixed | rho.fixed
    )


# influence -------------------------------------------------------------------


def influences(P: MultilinearPoly, dist=None) -> np.ndarray:
    """Influence of every variable; entry ``i`` belongs to ``x_{i+1}``.

    Uniform measure: ``sum_{S contains i} a_S**2``.  For a p-biased
    distribution the coefficients are first rewritten in the orthonormal
    basis ``(x - p) / sqrt(p (1 - p))``.
    """
    terms = P.terms
    if dist is not None and dist.kind == "biased":
        from .distributions import biased_fourier

        terms = biased_fourier(P, dist.p)
    elif dist is not None and dist.kind != "rademacher":
        from .errors import UnsupportedDistribution

        raise UnsupportedDistribution("influence needs a Rademacher or biased distribution")
    inf = np.zeros(P.n_vars)
    for s, a in terms.items():
        for j in s:
            inf[j - 1] += a * a
    return inf


def influence(P: MultilinearPoly, i: int, dist=None) -> float:
    if i < 1 or i > P.n_vars:
        raise IndexOutOfRange(f"variable {i} outside [1, {P.n_vars}]")
    return float(influences(P, dist)[i - 1])


# domain translation ------------------------------------------------------------


def translate_domain(P: MultilinearPoly, to: str) -> MultilinearPoly:
    """Rewrite ``P`` for the other cube.

    ``zero_one -> pm1`` substitutes ``x = (y + 1) / 2``; ``pm1 -> zero_one``
    substitutes ``y = 2x - 1``.  The result agrees with ``P`` pointwise under
    the substitution and has the same degree.
    """
    _check_domain(to)
    if to == P.domain:
        raise DomainMismatch(f"polynomial is already on {to}")
    acc: dict[Term, float] = {}
    for s, a in P.terms.items():
        k = len(s)
        for r in range(k + 1):
            for sub in itertools.combinations(s, r):
                if to == "pm1":
                    c = a * math.ldexp(1.0, -k)
                else:
                    c = a * math.ldexp(1.0, r) * (-1.0) ** (k - r)
                acc[sub] = acc.get(sub, 0.0) + c
    return make_poly(P.n_vars, acc.items(), to)


# JSON --------------------------------------------------------------------------


def poly_to_json(P: MultilinearPoly) -> dict:
    return {
        "n": P.n_vars,
        "domain": P.domain,
        "terms": [{"vars": list(s), "coef": a} for s, a in P.terms.items()],
    }


def poly_from_json(obj: Mapping) -> MultilinearPoly:
    try:
        n = obj["n"]
        domain = obj.get("domain", "pm1")
        raw = obj["terms"]
        terms = []
        for t in raw:
            vars_ = list(t["vars"])
            if any(b <= a for a, b in zip(vars_, vars_[1:])):
                raise InputError(f"vars {vars_} are not strictly increasing")
            terms.append((vars_, float(t["coef"])))
    except (KeyError, TypeError) as exc:
        raise InputError(f"malformed polynomial JSON: {exc}") from exc
    return make_poly(n, terms, domain)


def dump_poly(P: MultilinearPoly, path) -> None:
    Path(path).write_text(json.dumps(poly_to_json(P), indent=2) + "\n")


def load_poly(path) -> MultilinearPoly:
    try:
        obj = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}: not valid JSON ({exc})") from exc
    return poly_from_json(obj)
