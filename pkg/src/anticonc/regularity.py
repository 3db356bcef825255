"""Structural analysis of multilinear polynomials under Rademacher inputs.

Rank, critical index, tightness, the random-restriction decision tree that
regularizes a polynomial, and the spread statistics used to bootstrap the
sharper small-ball bound.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .distributions import DistributionSpec, as_generator, expectation, seed_streams, variance
from .errors import (
    BudgetExceeded,
    ConstantPolynomial,
    DegreeZero,
    InputError,
    ParamInfeasible,
    TooManyVariables,
    TreeTooLarge,
)
from .estimates import ProbEstimate, hoeffding_halfwidth
from .packing import greedy_packing, max_packing
from .poly import (
    MultilinearPoly,
    Restriction,
    RestrictedPoly,
    evaluate_many,
    gradient_many,
    make_poly,
    restrict,
    restrict_poly,
)

# rank ------------------------------------------------------------------------


@dataclass(frozen=True)
class RankResult:
    greedy_rank: int
    witness: tuple[tuple[int, ...], ...]
    exact_rank: int | None = None

    def to_json(self) -> dict:
        out = {"greedy_rank": self.greedy_rank, "witness": [list(s) for s in self.witness]}
        if self.exact_rank is not None:
            out["exact_rank"] = self.exact_rank
        return out


def heavy_top_terms(P: MultilinearPoly) -> list[tuple[int, ...]]:
    """Size-d index sets with ``|a_S| >= 1``, in canonical order."""
    d = P.degree
    return [s for s, a in P.terms.items() if len(s) == d and abs(a) >= 1.0]


def rank_greedy(P: MultilinearPoly) -> RankResult:
    if P.degree == 0:
        raise DegreeZero("rank is undefined for a constant polynomial")
    sets = heavy_top_terms(P)
    chosen = greedy_packing([frozenset(s) for s in sets])
    return RankResult(len(chosen), tuple(sets[k] for k in chosen))


def rank_exact(P: MultilinearPoly, budget: int = 200_000) -> int:
    """Largest number of pairwise disjoint heavy size-d sets."""
    if P.degree == 0:
        raise DegreeZero("rank is undefined for a constant polynomial")
    sets = heavy_top_terms(P)
    return len(max_packing([frozenset(s) for s in sets], budget))


def rank(P: MultilinearPoly, exact: bool = True, budget: int = 200_000) -> RankResult:
    """Greedy rank and witness, plus the exact rank when it fits the budget."""
    res = rank_greedy(P)
    if not exact:
        return res
    try:
        r = rank_exact(P, budget)
    except BudgetExceeded:
        return res
    return RankResult(res.greedy_rank, res.witness, r)


# influence ordering ----------------------------------------------------------


def influence_order(P: MultilinearPoly, variables=None) -> tuple[list[int], np.ndarray]:
    """Variables sorted by decreasing influence, ties by ascending index."""
    inf = np.zeros(P.n_vars + 1)
    for s, a in P.terms.items():
        for j in s:
            inf[j] += a * a
    vars_ = list(range(1, P.n_vars + 1)) if variables is None else sorted(variables)
    order = sorted(vars_, key=lambda j: (-inf[j], j))
    return order, inf[order]


def critical_index(P: MultilinearPoly, tau: float, variables=None) -> float:
    """Least ``i`` with ``Inf_(i+1) <= tau * sum_{j > i} Inf_(j)`` over the
    sorted influences of ``variables`` (default: all); ``math.inf`` if none.

    Returns an ``int`` when finite.
    """
    if tau <= 0:
        raise InputError("tau must be positive")
    if P.is_constant():
        raise ConstantPolynomial("critical index of a constant polynomial")
    _, inf = influence_order(P, variables)
    tails = np.cumsum(inf[::-1])[::-1]
    for i in range(len(inf)):
        if inf[i] <= tau * tails[i]:
            return i
    return math.inf


def is_regular(P: MultilinearPoly, tau: float, variables=None) -> bool:
    return critical_index(P, tau, variables) == 0


def is_tight(R: RestrictedPoly, C: float, beta: float, d: int) -> bool:
    """``sqrt(Var q) <= |P*| (C log(1/beta))^(-d/2)`` for ``R = P* + q``."""
    sd = math.sqrt(sum(a * a for s, a in R.fluctuation.terms.items() if s))
    return sd <= abs(R.constant_part) * (C * math.log(1.0 / beta)) ** (-d / 2.0)


# regularization tree -----------------------------------------------------------


@dataclass(frozen=True)
class TreeParams:
    tau: float
    beta: float
    M: int
    C: float = 3.0
    C_prime: float = 3.0

    def __post_init__(self):
        if not 0 < self.tau < 1 / 3:
            raise InputError(f"tau must lie in (0, 1/3), got {self.tau}")
        if not 0 < self.beta < 1 / 3:
            raise InputError(f"beta must lie in (0, 1/3), got {self.beta}")
        if int(self.M) != self.M or self.M < 1:
            raise InputError(f"M must be a positive integer, got {self.M}")
        if self.C <= 1 or self.C_prime <= 1:
            raise InputError("C and C' must exceed 1")

    def alpha(self, d: int) -> float:
        return self.C * (d * math.log(math.log(1.0 / self.beta)) + d * math.log(d))

    def tau_prime(self, d: int) -> float:
        return (self.C_prime * d * math.log(d) * math.log(1.0 / self.tau)) ** d * self.tau

    def stage_width(self, d: int) -> int:
        # floor keeps the total depth within M alpha / tau
        return max(1, math.floor(self.alpha(d) / self.tau))

    def max_depth(self, d: int) -> float:
        return self.M * self.alpha(d) / self.tau

    def bad_leaf_bound(self, d: int) -> float:
        """Probability bound ``(1 - 1/(2 C^d))^M`` for reaching a bad leaf."""
        return (1.0 - 1.0 / (2.0 * self.C**d)) ** self.M

    def check_feasible(self, n: int, d: int):
        if self.max_depth(d) > n:
            raise ParamInfeasible(
                f"M*alpha/tau = {self.max_depth(d):.4g} exceeds n = {n}"
            )

    def to_json(self) -> dict:
        return {"tau": self.tau, "beta": self.beta, "M": self.M, "C": self.C, "C_prime": self.C_prime}


REGULAR, TIGHT, BAD = "Regular", "Tight", "Bad"


@dataclass(frozen=True)
class TreeReport:
    leaf_class: str
    depth: int
    path: Restriction
    leaf_poly: RestrictedPoly
    stages: int
    regular_tau: float | None = None

    def to_json(self) -> dict:
        q = self.leaf_poly.fluctuation
        return {
            "leaf_class": self.leaf_class,
            "depth": self.depth,
            "stages": self.stages,
            "regular_tau": self.regular_tau,
            "path": self.path.to_json(),
            "leaf_constant": self.leaf_poly.constant_part,
            "leaf_fluctuation_terms": [{"vars": list(s), "coef": a} for s, a in q.terms.items()],
        }


def _final_check(R: RestrictedPoly, params: TreeParams, d: int):
    """Every classifier at once: tau- or tau'-regular, tight, else bad."""
    q = R.fluctuation
    if not q.is_constant():
        for t in (params.tau, params.tau_prime(d)):
            # tau' vanishes at d = 1
            if t > 0 and is_regular(q, t, R.free_vars):
                return REGULAR, t
    if is_tight(R, params.C, params.beta, d):
        return TIGHT, None
    return BAD, None


def verify_leaf(leaf_class: str, R: RestrictedPoly, params: TreeParams, d: int, regular_tau=None) -> bool:
    """Re-run the classifiers on a leaf and check they agree with its label.

    Regular leaves must be regular at the threshold that accepted them,
    Tight leaves must satisfy the tightness inequality, and Bad leaves
    must fail every test.
    """
    q = R.fluctuation
    if leaf_class == REGULAR:
        return not q.is_constant() and regular_tau is not None and is_regular(q, regular_tau, R.free_vars)
    if leaf_class == TIGHT:
        return is_tight(R, params.C, params.beta, d)
    return _final_check(R, params, d)[0] == BAD


def _stage_plan(R: RestrictedPoly, params: TreeParams, d: int):
    """What the tree does at a node.

    Returns ``("leaf", class, tau_used)`` or ``("fix", vars, mode)`` where
    ``mode`` says which test the children face.
    """
    q = R.fluctuation
    free = R.free_vars
    if q.is_constant():
        return ("leaf", TIGHT if is_tight(R, params.C, params.beta, d) else BAD, None)
    ci = critical_index(q, params.tau, free)
    if ci == 0:
        return ("leaf", REGULAR, params.tau)
    order, _ = influence_order(q, free)
    if ci >= params.alpha(d) / params.tau:
        k = min(params.stage_width(d), len(order))
        return ("fix", order[:k], "tight")
    return ("fix", order[: int(ci)], "regular")


def _after_fix(R: RestrictedPoly, mode: str, params: TreeParams, d: int):
    """Classification of a child after a stage; ``None`` means keep going."""
    q = R.fluctuation
    if q.is_constant():
        return (TIGHT, None) if is_tight(R, params.C, params.beta, d) else None
    if mode == "tight":
        return (TIGHT, None) if is_tight(R, params.C, params.beta, d) else None
    tp = params.tau_prime(d)
    if tp > 0 and is_regular(q, tp, R.free_vars):
        return (REGULAR, tp)
    return None


def _root(P: MultilinearPoly, params: TreeParams, strict: bool) -> RestrictedPoly:
    if P.is_constant():
        raise ConstantPolynomial("the regularization tree needs a non-constant polynomial")
    if P.domain != "pm1":
        raise InputError("the regularization tree works on the pm1 domain")
    if strict:
        params.check_feasible(P.n_vars, P.degree)
    return restrict(P, Restriction({}, "pm1"))


def sample_tree_path(P: MultilinearPoly, params: TreeParams, seed=None, strict: bool = True) -> TreeReport:
    """Follow one uniformly random path of the regularization tree.

    At most ``M`` stages.  A stage either stops at a tau-regular node, or
    fixes the top-influence variables at random: ``ceil(alpha/tau)`` of them
    when the critical index is at least ``alpha/tau`` (children tested for
    tightness), otherwise the top ``k = critical index`` (children tested
    for tau'-regularity).  A stage that asks for more variables than remain
    fixes all of them.  A path still undecided after ``M`` stages is Bad
    unless one last pass of every classifier accepts it.  ``strict``
    enforces ``M alpha / tau <= n``.
    """
    rng = as_generator(seed)
    d = P.degree
    R = _root(P, params, strict)
    path: dict[int, float] = {}
    for stage in range(1, params.M + 1):
        plan = _stage_plan(R, params, d)
        if plan[0] == "leaf":
            return TreeReport(plan[1], len(path), Restriction(path), R, stage - 1, plan[2])
        _, vars_, mode = plan
        vals = rng.integers(0, 2, size=len(vars_)) * 2.0 - 1.0
        rho = Restriction(dict(zip(vars_, vals.tolist())))
        path.update(rho.assignments)
        R = restrict_poly(R, rho)
        verdict = _after_fix(R, mode, params, d)
        if verdict is not None:
            return TreeReport(verdict[0], len(path), Restriction(path), R, stage, verdict[1])
    cls, tau_used = _final_check(R, params, d)
    return TreeReport(cls, len(path), Restriction(path), R, params.M, tau_used)


def sample_tree_paths(P, params, count: int, seed=0, strict: bool = True) -> list[TreeReport]:
    return [sample_tree_path(P, params, g, strict) for g in seed_streams(seed, count)]


@dataclass
class TreeNode:
    poly: RestrictedPoly
    depth: int
    prob: float
    fixes: list[int] = field(default_factory=list)
    children: dict[tuple[float, ...], "TreeNode"] = field(default_factory=dict)
    leaf_class: str | None = None
    regular_tau: float | None = None

    def leaves(self):
        if not self.children:
            yield self
        for ch in self.children.values():
            yield from ch.leaves()

    def dump(self, indent: int = 0) -> str:
        pad = "  " * indent
        if not self.children:
            return f"{pad}leaf {self.leaf_class} depth={self.depth} prob={self.prob!r} const={self.poly.constant_part!r}\n"
        out = f"{pad}fix {self.fixes} depth={self.depth} prob={self.prob!r}\n"
        for vals, ch in self.children.items():
            out += f"{pad}  = {list(vals)}\n" + ch.dump(indent + 2)
        return out


def build_full_tree(P: MultilinearPoly, params: TreeParams, depth_cap: int = 20, strict: bool = True) -> TreeNode:
    """Materialize every branch of the regularization tree (tiny inputs)."""
    d = P.degree
    root = TreeNode(_root(P, params, strict), 0, 1.0)

    def grow(node: TreeNode, stage: int):
        if stage > params.M:
            node.leaf_class, node.regular_tau = _final_check(node.poly, params, d)
            return
        plan = _stage_plan(node.poly, params, d)
        if plan[0] == "leaf":
            node.leaf_class, node.regular_tau = plan[1], plan[2]
            return
        _, vars_, mode = plan
        if node.depth + len(vars_) > depth_cap:
            raise TreeTooLarge(f"a path fixes more than {depth_cap} variables")
        node.fixes = list(vars_)
        k = len(vars_)
        for bits in range(1 << k):
            vals = tuple(1.0 if bits >> (k - 1 - t) & 1 else -1.0 for t in range(k))
            R = restrict_poly(node.poly, Restriction(dict(zip(vars_, vals))))
            child = TreeNode(R, node.depth + k, node.prob * 0.5**k)
            node.children[vals] = child
            verdict = _after_fix(R, mode, params, d)
            if verdict is not None:
                child.leaf_class, child.regular_tau = verdict
            else:
                grow(child, stage + 1)

    grow(root, 1)
    return root


def leaf_class_probabilities(tree: TreeNode) -> dict[str, float]:
    out = {REGULAR: 0.0, TIGHT: 0.0, BAD: 0.0}
    for leaf in tree.leaves():
        out[leaf.leaf_class] += leaf.prob
    return out


def reports_to_json(reports) -> str:
    return json.dumps([r.to_json() for r in reports], indent=2, sort_keys=True)


# spread ------------------------------------------------------------------------


def _moments(P, dist):
    if isinstance(P, RestrictedPoly):
        var = sum(a * a for s, a in P.fluctuation.terms.items() if s)
        return P.constant_part, var
    dist = dist or DistributionSpec.rademacher(P.n_vars)
    return expectation(P, dist), variance(P, dist)


def is_gamma_spread(P, gamma: float, dist: DistributionSpec | None = None) -> bool:
    """``sqrt(Var P) >= |E P| / gamma``; a constant polynomial is never spread.

    ``P`` may be a :class:`RestrictedPoly`, read under uniform signs on its
    free variables.
    """
    mean, var = _moments(P, dist)
    if var <= 0.0:
        return False
    return gamma * math.sqrt(var) >= abs(mean)


def _alpha_terms(P: MultilinearPoly, xi: np.ndarray, zeta: np.ndarray) -> np.ndarray:
    vals = evaluate_many(P, xi)
    deriv = np.einsum("ij,ij->i", gradient_many(P, xi), zeta)
    return _capped_ratio(deriv, vals)


def _capped_ratio(deriv, vals):
    d2, v2 = deriv * deriv, vals * vals
    out = np.ones_like(v2)
    nz = v2 > 0
    out[nz] = np.minimum(1.0, d2[nz] / v2[nz])
    out[(~nz) & (d2 == 0)] = 0.0
    return out


def alpha_estimate(P: MultilinearPoly, samples: int, seed=0, confidence: float = 0.99) -> ProbEstimate:
    """Monte Carlo ``E min(1, |D_zeta P(xi)|^2 / |P(xi)|^2)`` over independent
    uniform sign vectors ``zeta, xi``; the ratio is 1 where only ``P``
    vanishes and 0 where both vanish."""
    if samples < 1:
        raise InputError("samples must be positive")
    rng = as_generator(seed)
    n = P.n_vars
    total = 0.0
    for lo in range(0, samples, 1 << 15):
        k = min(1 << 15, samples - lo)
        xi = rng.integers(0, 2, size=(k, n)) * 2.0 - 1.0
        zeta = rng.integers(0, 2, size=(k, n)) * 2.0 - 1.0
        total += _alpha_terms(P, xi, zeta).sum()
    return ProbEstimate(
        float(total / samples),
        hoeffding_halfwidth(samples, confidence),
        "monte_carlo",
        samples,
        seed if isinstance(seed, int) else None,
        confidence,
    )


def _cube(n: int) -> np.ndarray:
    cells = np.arange(1 << n, dtype=np.int64)
    return ((cells[:, None] >> np.arange(n)) & 1) * 2.0 - 1.0


def alpha_exact(P: MultilinearPoly, cap: int = 11) -> float:
    """Exact spread statistic by enumerating all ``(zeta, xi)`` pairs."""
    n = P.n_vars
    if n > cap:
        raise TooManyVariables(f"exact alpha enumerates 4^n pairs; n = {n} > {cap}")
    X = _cube(n)
    vals = evaluate_many(P, X)
    grad = gradient_many(P, X)
    D = grad @ X.T  # D[xi, zeta]
    ratio = _capped_ratio(D, np.broadcast_to(vals[:, None], D.shape))
    return float(ratio.mean())


def spread_ratio(P: MultilinearPoly, alpha: float | None = None) -> float:
    """``Var P / ((E P^2 + Var P) alpha(P))`` under uniform signs."""
    mean, var = _moments(P, None)
    a = alpha_exact(P) if alpha is None else alpha
    denom = (mean * mean + var) * a
    if denom == 0.0:
        return 0.0 if var == 0.0 else math.inf
    return var / denom


def calibrate_spread_exponent(polys) -> tuple[float, int]:
    """Smallest ``c`` with ``spread_ratio(P) <= 2^(c d)`` over the corpus,
    and the index of the instance that forces it."""
    best, arg = -math.inf, -1
    for k, P in enumerate(polys):
        r = spread_ratio(P)
        if not math.isfinite(r):
            raise InputError(f"instance {k}: spread ratio is infinite")
        c = math.log2(r) / P.degree if r > 0 else -math.inf
        if c > best:
            best, arg = c, k
    return best, arg


@dataclass(frozen=True)
class BlockSpreadResult:
    probabilities: np.ndarray
    ci_halfwidth: float
    blocks: tuple[tuple[int, ...], ...]
    samples: int

    def to_json(self) -> dict:
        return {
            "probabilities": self.probabilities.tolist(),
            "ci_halfwidth": self.ci_halfwidth,
            "blocks": [list(b) for b in self.blocks],
            "samples": self.samples,
        }


def partition_blocks(n: int, b: int, witness=None) -> tuple[tuple[int, ...], ...]:
    """Split ``1..n`` (padded up to a multiple of ``b``) into ``b`` equal
    blocks; with a witness, block ``l`` first receives witness sets
    ``l, l + b, ...`` so each holds ``floor(r / b)`` of them."""
    if b < 1:
        raise InputError("block count must be positive")
    size = -(-n // b)
    blocks: list[list[int]] = [[] for _ in range(b)]
    placed: set[int] = set()
    if witness:
        per = len(witness) // b
        for l in range(b):
            for s in witness[l: per * b: b]:
                blocks[l].extend(s)
                placed.update(s)
    rest = iter(j for j in range(1, size * b + 1) if j not in placed)
    for blk in blocks:
        while len(blk) < size:
            blk.append(next(rest))
    return tuple(tuple(sorted(blk)) for blk in blocks)


def block_spread_experiment(
    P: MultilinearPoly,
    b: int,
    gamma: float,
    samples: int,
    seed=0,
    witness=None,
    confidence: float = 0.99,
) -> BlockSpreadResult:
    """For each block, the probability over uniform signs on the other blocks
    that the restricted polynomial is gamma-spread.

    Variables beyond ``n`` (padding to a multiple of ``b``) are dummies.
    ``witness="greedy"`` partitions along the greedy rank witness.
    """
    if P.is_constant():
        raise ConstantPolynomial("block experiment needs a non-constant polynomial")
    if witness == "greedy":
        witness = rank_greedy(P).witness
    blocks = partition_blocks(P.n_vars, b, witness)
    n_pad = sum(len(x) for x in blocks)
    Q = make_poly(n_pad, P.terms.items(), P.domain)
    streams = seed_streams(seed, b)
    probs = np.empty(b)
    for l, blk in enumerate(blocks):
        probs[l] = _spread_frequency(Q, set(blk), gamma, samples, streams[l])
    return BlockSpreadResult(probs, hoeffding_halfwidth(samples, confidence), blocks, samples)


def _spread_frequency(Q, block, gamma, samples, rng):
    # group terms by their part inside the block; coefficient of each group
    # is a polynomial in the outside variables
    groups: dict[tuple[int, ...], list[tuple[tuple[int, ...], float]]] = {}
    for s, a in Q.terms.items():
        inside = tuple(j for j in s if j in block)
        outside = tuple(j for j in s if j not in block)
        groups.setdefault(inside, []).append((outside, a))
    keys = list(groups)
    outer = [j for j in range(1, Q.n_vars + 1) if j not in block]
    pos = {j: i for i, j in enumerate(outer)}
    hits = 0
    for lo in range(0, samples, 1 << 14):
        k = min(1 << 14, samples - lo)
        X = rng.integers(0, 2, size=(k, len(outer))) * 2.0 - 1.0
        coefs = np.zeros((k, len(keys)))
        for g, key in enumerate(keys):
            for outside, a in groups[key]:
                mon = np.full(k, a)
                for j in outside:
                    mon = mon * X[:, pos[j]]
                coefs[:, g] += mon
        mean = np.zeros(k)
        var = np.zeros(k)
        for g, key in enumerate(keys):
            if key:
                var += coefs[:, g] ** 2
            else:
                mean = coefs[:, g]
        hits += int(np.sum((var > 0) & (gamma * np.sqrt(var) >= np.abs(mean))))
    return hits / samples
