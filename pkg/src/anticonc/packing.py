"""Maximum set packing: greedy lower bound and exact branch-and-bound.

Both the rank of a polynomial (disjoint heavy size-d terms) and the
edge-disjoint packing number of a pattern in a host graph reduce to this.
Sets are given in the caller's canonical order; the greedy pass respects it.
"""
from __future__ import annotations

from typing import Hashable, Sequence

from .errors import BudgetExceeded


def greedy_packing(sets: Sequence[frozenset]) -> list[int]:
    """Indices of a maximal-by-inclusion disjoint family, scanning in order."""
    used: set = set()
    chosen = []
    for k, s in enumerate(sets):
        if used.isdisjoint(s):
            chosen.append(k)
            used |= s
    return chosen


def max_packing(sets: Sequence[frozenset], budget: int = 200_000) -> list[int]:
    """Indices of a maximum-cardinality disjoint family.

    Depth-first branch-and-bound on bitmasks.  Each node branches on the
    uncovered element with the fewest live candidate sets (every optimum
    either uses one of them or leaves the element uncovered).  The bound at a
    node is ``chosen + min(#live sets, floor(#live elements / set size))``
    for uniform set sizes, ``#live sets`` otherwise.  Raises
    :class:`BudgetExceeded` carrying the best size found once ``budget``
    nodes have been expanded.
    """
    universe: dict[Hashable, int] = {}
    masks = []
    for s in sets:
        m = 0
        for e in s:
            m |= 1 << universe.setdefault(e, len(universe))
        masks.append(m)
    sizes = {len(s) for s in sets}
    width = sizes.pop() if len(sizes) == 1 else None

    best = greedy_packing(sets)
    state = {"best": list(best), "nodes": 0}

    def bound(live: list[int]) -> int:
        if not live:
            return 0
        if width:
            cover = 0
            for k in live:
                cover |= masks[k]
            return min(len(live), cover.bit_count() // width)
        return len(live)

    def search(live: list[int], chosen: list[int]):
        state["nodes"] += 1
        if state["nodes"] > budget:
            raise BudgetExceeded(
                f"exact packing exceeded {budget} nodes", lower_bound=len(state["best"])
            )
        if len(chosen) > len(state["best"]):
            state["best"] = list(chosen)
        if len(chosen) + bound(live) <= len(state["best"]):
            return
        # element covered by the fewest live sets
        counts: dict[int, list[int]] = {}
        for k in live:
            m = masks[k]
            while m:
                low = m & -m
                counts.setdefault(low, []).append(k)
                m ^= low
        if not counts:
            return
        pivot_bit, pivot = min(counts.items(), key=lambda kv: len(kv[1]))
        for k in pivot:
            rest = [j for j in live if j != k and not masks[j] & masks[k]]
            search(rest, chosen + [k])
        # leave the pivot element uncovered
        rest = [j for j in live if not masks[j] & pivot_bit]
        search(rest, chosen)

    search(list(range(len(masks))), [])
    return sorted(state["best"])
