# %% [markdown]
# # Random restrictions toward regularity
#
# A polynomial is tau-regular when no variable dominates the influence.
# The tree below fixes the heaviest variables at random until each leaf is
# regular, tight (its constant part dwarfs what is left), or given up on.

# %%
import math
from collections import Counter

from anticonc import make_poly
from anticonc.regularity import TreeParams, build_full_tree, critical_index, leaf_class_probabilities, sample_tree_paths

# influences 4^-i: no index is ever tau-critical, so the tree fixes everything
n = 30
terms = [((1, i), 2.0 ** -i) for i in range(2, n + 1)]
terms.append(((1,), math.sqrt(0.25 - sum(4.0 ** -i for i in range(2, n + 1)))))
stair = make_poly(n, terms)
params = TreeParams(tau=0.05, beta=0.01, M=3)
print("critical index", critical_index(stair, 0.05), "alpha/tau", params.alpha(2) / params.tau)
reps = sample_tree_paths(stair, params, 2000, seed=0, strict=False)
print(Counter(r.leaf_class for r in reps), "bad-leaf bound", params.bad_leaf_bound(2))

# %% [markdown]
# With loose constants small trees end in a mix of leaves. The full tree
# gives exact class probabilities and a readable dump.

# %%
loose = TreeParams(0.3, 0.3, 2, C=1.1, C_prime=1.1)
P = make_poly(9, [((), 0.5), ((1,), 3.0), ((2,), 2.0), ((3,), 1.5)] + [((i,), 0.6) for i in range(4, 10)])
tree = build_full_tree(P, loose, strict=False)
print(tree.dump())
print(leaf_class_probabilities(tree))
