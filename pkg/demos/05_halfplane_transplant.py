"""Moving the composition to the upper half-plane.

Tile-constant functions are vectors indexed by tree nodes.  U sends each
normalized tile to the normalized signed cube below it, and the operator
M_{conj b}^{-1} U M_{conj d}^{-1/2} U M_1^{1/2} has the paraproduct Gram
matrix up to a constant and a conjugation.
"""

import numpy as np

from dyadic_paraproducts import halfplane as hp
from dyadic_paraproducts.dyadic_core import DyadicIndex
from dyadic_paraproducts.paraproducts import composition_gram_closed
from dyadic_paraproducts.symbols import generate

depth = 4
J = DyadicIndex(1, 0)
print("U 1_T(J) under the two signed-cube normalizations:")
for convention in ("half", "area"):
    ratio = hp.apply_U(hp.tile(J, depth), convention) / np.where(
        hp.signed_cube(J, depth) != 0, hp.signed_cube(J, depth), np.nan
    )
    print(f"  {convention:>4s}: U 1_T(J) / 1_Q±(J) = {np.nanmax(ratio):.6f}")

print("\nsigned-cube norm on a finite tree vs |J|/sqrt 2:")
for D in (2, 4, 8, 16):
    print(f"  D={D:2d}: {hp.norm(hp.signed_cube(J, D), D):.6f}  vs  {J.length / np.sqrt(2):.6f}")

b = generate("random", depth, seed=4)
d = generate("random", depth, seed=5)
P = composition_gram_closed(b, d).toarray()
T = hp.t_gram_direct(b, d).toarray()
print("\nmax |T - 2 conj(P)| =", np.abs(T - 2 * np.conj(P)).max())
print("max |T - 2 P|       =", np.abs(T - 2 * P).max(), "(complex symbols)")

b = generate("random", depth, seed=4, distribution="normal")
d = generate("random", depth, seed=5, distribution="normal")
P = composition_gram_closed(b, d).toarray()
print("real symbols: max |T - 2 P| =", np.abs(hp.t_gram_direct(b, d).toarray() - 2 * P).max())
