"""Haar functions on a finite tree and what a paraproduct does to a signal.

Run with ``python demos/01_haar_and_paraproducts.py``.
"""

import numpy as np

from dyadic_paraproducts.dyadic_core import DyadicIndex, Tree, haar_coefficients, haar_grid
from dyadic_paraproducts.paraproducts import apply_paraproduct
from dyadic_paraproducts.symbols import generate

depth = 3
tree = Tree(depth)
print(f"depth {depth}: {tree.size} intervals, grid of {tree.grid_size} cells")

# h_I is -1/sqrt|I| on the left half of I and +1/sqrt|I| on the right half
for label in ("0:0", "1:1", "2:1"):
    I = DyadicIndex.parse(label)
    print(f"h_{label:<4s}", np.round(haar_grid(I, depth), 3))

# A signal and its Haar expansion
x = (np.arange(tree.grid_size) + 0.5) / tree.grid_size
f = np.sin(2 * np.pi * x) + 0.3 * (x > 0.6)
mean, coeffs = haar_coefficients(f, depth)
print("\nmean", round(mean, 4))
for level in range(depth + 1):
    print(f"level {level} coefficients", np.round(coeffs[tree.level_slice(level)], 4))

# The constant symbol reproduces the Haar projection: f minus its mean
one = generate("constant", depth)
print("\nP_1^(0,0) f == f - mean:", np.allclose(apply_paraproduct(one, (0, 0), f), f - mean))

# A decaying random symbol damps fine scales
b = generate("random", depth, seed=1, gamma=1.0, distribution="normal")
print("P_b^(0,1) f =", np.round(apply_paraproduct(b, (0, 1), f).real, 4))
