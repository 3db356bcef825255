"""Counting copies of a small pattern graph inside a random subgraph of a host.

Each host edge becomes a {0,1} variable; the number of copies of ``H`` in
the random subgraph is a multilinear polynomial of degree ``e(H)`` with one
monomial per (unlabeled) copy.
"""
from __future__ import annotations

import itertools
import json
from dataclasses import dataclass
from pathlib import Path

from ..distributions import DistributionSpec
from ..errors import InputError, PatternLargerThanHost
from ..packing import greedy_packing, max_packing
from ..poly import MultilinearPoly, make_poly
from ..smallball import DEFAULT_CAP, ValueHistogram, distribution

Edge = tuple[int, int]


def _canon_edges(edges) -> tuple[Edge, ...]:
    out = set()
    for e in edges:
        if len(e) != 2:
            raise InputError(f"edge {e!r} must have two endpoints")
        u, v = int(e[0]), int(e[1])
        if u == v:
            raise InputError(f"self-loop at vertex {u}")
        if u < 0 or v < 0:
            raise InputError("vertex labels must be nonnegative")
        key = (min(u, v), max(u, v))
        if key in out:
            raise InputError(f"duplicate edge {key}")
        out.add(key)
    return tuple(sorted(out))


@dataclass(frozen=True)
class GraphSpec:
    n_vertices: int
    edges: tuple[Edge, ...]
    name: str = "custom"

    def __post_init__(self):
        object.__setattr__(self, "edges", _canon_edges(self.edges))
        for u, v in self.edges:
            if v >= self.n_vertices:
                raise InputError(f"edge ({u}, {v}) uses a vertex outside 0..{self.n_vertices - 1}")

    @property
    def n_edges(self) -> int:
        return len(self.edges)

    @classmethod
    def complete(cls, n: int) -> "GraphSpec":
        return cls(n, tuple(itertools.combinations(range(n), 2)), f"K{n}")

    @classmethod
    def cycle(cls, n: int) -> "GraphSpec":
        if n < 3:
            raise InputError("a cycle needs at least 3 vertices")
        return cls(n, tuple((i, (i + 1) % n) for i in range(n)), f"C{n}")

    @classmethod
    def from_text(cls, text: str, name: str = "custom") -> "GraphSpec":
        """One ``u v`` pair per line; blank lines and ``#`` comments skipped."""
        edges = []
        for k, line in enumerate(text.splitlines(), 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            parts = line.split()
            if len(parts) != 2:
                raise InputError(f"line {k}: expected 'u v', got {line!r}")
            try:
                edges.append((int(parts[0]), int(parts[1])))
            except ValueError:
                raise InputError(f"line {k}: vertex labels must be integers") from None
        n = 1 + max((max(e) for e in edges), default=-1)
        return cls(n, tuple(edges), name)

    @classmethod
    def from_json(cls, obj) -> "GraphSpec":
        if "edges" not in obj:
            raise InputError("graph JSON needs an 'edges' list")
        edges = [tuple(e) for e in obj["edges"]]
        n = obj.get("n", 1 + max((max(e) for e in edges), default=-1))
        return cls(int(n), tuple(edges), obj.get("name", "custom"))

    @classmethod
    def load(cls, path) -> "GraphSpec":
        path = Path(path)
        text = path.read_text()
        if path.suffix == ".json":
            try:
                return cls.from_json(json.loads(text))
            except json.JSONDecodeError as exc:
                raise InputError(f"{path}: {exc}") from None
        return cls.from_text(text, path.stem)

    def to_json(self) -> dict:
        return {"name": self.name, "n": self.n_vertices, "edges": [list(e) for e in self.edges]}

    def to_text(self) -> str:
        return "".join(f"{u} {v}\n" for u, v in self.edges)

    def adjacency(self) -> list[set[int]]:
        adj = [set() for _ in range(self.n_vertices)]
        for u, v in self.edges:
            adj[u].add(v)
            adj[v].add(u)
        return adj


@dataclass(frozen=True)
class PatternSpec:
    """A connected pattern graph on vertices ``0..v-1``."""

    n_vertices: int
    edges: tuple[Edge, ...]
    name: str = "pattern"

    def __post_init__(self):
        object.__setattr__(self, "edges", _canon_edges(self.edges))
        if not self.edges:
            raise InputError("a pattern needs at least one edge")
        used = {x for e in self.edges for x in e}
        if used != set(range(self.n_vertices)):
            raise InputError("pattern vertices must be exactly 0..v-1 with no isolated vertex")
        adj = GraphSpec(self.n_vertices, self.edges).adjacency()
        seen, stack = {0}, [0]
        while stack:
            for w in adj[stack.pop()]:
                if w not in seen:
                    seen.add(w)
                    stack.append(w)
        if len(seen) != self.n_vertices:
            raise InputError(f"pattern {self.name!r} is not connected")

    @property
    def n_edges(self) -> int:
        return len(self.edges)

    @classmethod
    def named(cls, name: str) -> "PatternSpec":
        try:
            v, edges = PATTERNS[name]
        except KeyError:
            raise InputError(f"unknown pattern {name!r}; choose from {', '.join(PATTERNS)}") from None
        return cls(v, edges, name)


PATTERNS = {
    "edge": (2, ((0, 1),)),
    "path2": (3, ((0, 1), (1, 2))),
    "triangle": (3, ((0, 1), (1, 2), (0, 2))),
    "c4": (4, ((0, 1), (1, 2), (2, 3), (0, 3))),
    "k4": (4, tuple(itertools.combinations(range(4), 2))),
}


def copies(H: PatternSpec, G: GraphSpec) -> list[tuple[Edge, ...]]:
    """Edge sets of all copies of ``H`` in ``G``, sorted lexicographically.

    Backtracking over injective vertex maps; each copy is found
    ``|Aut(H)|`` times and deduplicated by its image edge set.
    """
    if H.n_vertices > G.n_vertices or H.n_edges > G.n_edges:
        raise PatternLargerThanHost(
            f"pattern has {H.n_vertices} vertices / {H.n_edges} edges, host {G.n_vertices} / {G.n_edges}"
        )
    hadj = [sorted(a) for a in GraphSpec(H.n_vertices, H.edges).adjacency()]
    gadj = G.adjacency()
    # visit pattern vertices so each one after the first touches an earlier one
    order, seen = [0], {0}
    while len(order) < H.n_vertices:
        nxt = min(w for u in order for w in hadj[u] if w not in seen)
        order.append(nxt)
        seen.add(nxt)
    found: set[tuple[Edge, ...]] = set()
    image = [-1] * H.n_vertices
    used: set[int] = set()

    def extend(k: int):
        if k == len(order):
            found.add(tuple(sorted((min(image[a], image[b]), max(image[a], image[b])) for a, b in H.edges)))
            return
        h = order[k]
        placed = [image[w] for w in hadj[h] if image[w] >= 0]
        cands = range(G.n_vertices) if not placed else set.intersection(*(gadj[x] for x in placed))
        for g in sorted(cands):
            if g in used:
                continue
            image[h] = g
            used.add(g)
            extend(k + 1)
            used.discard(g)
            image[h] = -1

    extend(0)
    return sorted(found)


def count_copies(H: PatternSpec, G: GraphSpec) -> int:
    return len(copies(H, G))


def edge_index(G: GraphSpec) -> dict[Edge, int]:
    """1-based variable index of each host edge, in sorted edge order."""
    return {e: k for k, e in enumerate(G.edges, 1)}


def count_polynomial(H: PatternSpec, G: GraphSpec) -> MultilinearPoly:
    idx = edge_index(G)
    terms = [(tuple(idx[e] for e in c), 1.0) for c in copies(H, G)]
    return make_poly(G.n_edges, terms, "zero_one")


def indicator(G: GraphSpec, sub_edges) -> list[int]:
    """0/1 vector over host edges selecting ``sub_edges``."""
    keep = set(_canon_edges(sub_edges))
    return [1 if e in keep else 0 for e in G.edges]


def packing_rank(H: PatternSpec, G: GraphSpec, method: str = "exact", budget: int = 200_000) -> int:
    """Largest number of pairwise edge-disjoint copies of ``H`` in ``G``.

    ``greedy`` scans copies in lexicographic order of their edge lists and
    gives a lower bound.
    """
    sets = [frozenset(c) for c in copies(H, G)]
    if method == "greedy":
        return len(greedy_packing(sets))
    if method == "exact":
        return len(max_packing(sets, budget))
    raise InputError(f"unknown packing method {method!r}")


def subgraph_count_histogram(
    H: PatternSpec,
    G: GraphSpec,
    p: float,
    method: str = "exact",
    samples: int | None = None,
    seed=0,
    cap: int = DEFAULT_CAP,
    threads: int = 1,
) -> ValueHistogram:
    """Law of the number of copies of ``H`` in the ``p``-random subgraph of ``G``."""
    P = count_polynomial(H, G)
    return distribution(P, DistributionSpec.biased(G.n_edges, p), method, samples, seed, cap, threads)
