"""The Gram matrix of Pi_b Pi_d computed on the grid and from tree chains.

The grid route applies both paraproducts to every sampled Haar function.
The closed route only visits chains I ⊊ K ⊊ J, so it scales to deep trees.
"""

import time

import numpy as np

from dyadic_paraproducts.paraproducts import (
    composition_gram_closed,
    composition_gram_direct,
    operator_norm,
)
from dyadic_paraproducts.symbols import generate

# b = d = 1 at depth 2: only the root column survives
one = generate("constant", 2)
G = composition_gram_closed(one, one).toarray()
print("b = d = 1, column J = root on the four leaves:", np.round(G[3:7, 0].real, 6))
print("operator norm", operator_norm(G), "= 2 sqrt 2 =", 2 * np.sqrt(2))

print("\ndepth   max|closed - direct| / max   t_direct   t_closed")
for depth in range(2, 9):
    b = generate("random", depth, seed=2 * depth)
    d = generate("random", depth, seed=2 * depth + 1)
    t0 = time.perf_counter()
    direct = composition_gram_direct(b, d).toarray()
    t1 = time.perf_counter()
    closed = composition_gram_closed(b, d).toarray()
    t2 = time.perf_counter()
    err = np.abs(closed - direct).max() / np.abs(direct).max()
    print(f"{depth:5d}   {err:26.2e}   {t1 - t0:8.4f}s  {t2 - t1:8.4f}s")

# Deep trees: sparse assembly and power iteration
b = generate("random", 12, seed=0)
d = generate("random", 12, seed=1)
G = composition_gram_closed(b, d, sparse=True)
print(f"\ndepth 12: {G.shape[0]} nodes, {G.matrix.nnz} nonzeros")
print("norm by power iteration:", operator_norm(G, method="power_iteration"))
