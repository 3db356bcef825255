# %% [markdown]
# # Triangles in random graphs, and the OR distribution

# %%
from anticonc.applications import (
    GraphSpec,
    OrDistParams,
    PatternSpec,
    or_agreement,
    or_zero_probability,
    packing_rank,
    subgraph_count_histogram,
)
from anticonc.bounds import evaluate_bound
from anticonc.poly import constant_poly
from anticonc.smallball import mode_prob

tri = PatternSpec.named("triangle")
for N in range(5, 10):
    G = GraphSpec.complete(N)
    method = "exact" if G.n_edges <= 20 else "mc"
    h = subgraph_count_histogram(tri, G, 0.5, method=method, samples=200_000, seed=N)
    r = packing_rank(tri, G)
    rep = evaluate_bound("biased", r=r, d=3, p=0.5)
    print(N, r, round(mode_prob(h).value, 4), rep.value, "flagged" if not rep.hypothesis_ok else "")

# %% [markdown]
# Half the time the OR distribution outputs all zeros, otherwise a sparse
# biased string. The zero polynomial agrees with OR a little more than half
# the time.

# %%
params = OrDistParams(2**10)
print(params.D, or_zero_probability(params))
print(or_agreement(constant_poly(params.n, 0.0, "zero_one"), params, 100_000, seed=0))
