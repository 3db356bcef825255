# %% [markdown]
# # Small-ball probabilities, exactly
#
# How likely is a random signed sum to land in a unit window? For the plain
# sum of n signs the answer is the central binomial mass, about n^(-1/2).

# %%
import math

import numpy as np

from anticonc import exact_distribution, make_poly
from anticonc.poly import linear_form
from anticonc.bounds import bound_main, bound_rv, calibrate_B, random_corpus
from anticonc.distributions import DistributionSpec

for n in (10, 16, 24):
    h = exact_distribution(linear_form([1.0] * n), DistributionSpec.rademacher(n))
    print(n, h.levy(1.0), math.comb(n, n // 2) / 2**n, n**-0.5)

# %% [markdown]
# Products of disjoint blocks behave like a sum of r signs whatever the block
# size, so the mass at 0 decays like r^(-1/2) at every degree.

# %%
def product_witness(r, d):
    return make_poly(r * d, [(tuple(range(j * d + 1, j * d + d + 1)), 1.0) for j in range(r)])


rs = np.arange(8, 25, 2)
for d in (1, 2, 3):
    mass = [exact_distribution(product_witness(int(r), d), DistributionSpec.rademacher(int(r) * d)).mass_at(0) for r in rs]
    slope = np.polyfit(np.log(rs), np.log(mass), 1)[0]
    print(f"d={d} slope {slope:.3f}")

# %% [markdown]
# Rank alone cannot force decay once the degree reaches log2 of the rank:
# sum over 2^d blocks of prod (x_ij + 1) vanishes unless some block is all
# ones, which keeps P(P = 0) near 1/e.

# %%
for d in (2, 3):
    terms = []
    for i in range(2**d):
        expr = [((), 1.0)]
        for j in range(d):
            v = i * d + j + 1
            expr = [(s + (v,), c) for s, c in expr] + expr
        terms.extend(expr)
    P = make_poly(d * 2**d, terms)
    print(d, exact_distribution(P, DistributionSpec.rademacher(P.n_vars)).mass_at(0), (1 - 2.0**-d) ** (2**d))

# %% [markdown]
# The bounds carry an unknown constant B. Fit it on a random corpus and
# compare the rank-based bound with the older one.

# %%
cal = calibrate_B(random_corpus(100, seed=1))
print("B* =", cal.B)
for r in (10, 1e3, 1e6):
    print(r, bound_main(r, 3, cal.B), bound_rv(r, 3, cal.B))
