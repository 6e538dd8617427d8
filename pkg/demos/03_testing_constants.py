"""The testing constants A, B, C next to the operator norm they control.

Each row is one random pair; the ratio op_norm / (A + B + C) stays in a
narrow band while both sides move with the symbols.
"""

import math

import numpy as np

from dyadic_paraproducts.conditions import full_report
from dyadic_paraproducts.dyadic_core import DyadicIndex
from dyadic_paraproducts.symbols import Symbol, generate

one = generate("constant", 2)
r = full_report(one, one)
print("b = d = 1, depth 2:", f"A={r.A:g} B={r.B:.6f} C={r.C:.1e} op={r.op_norm:.6f}")

atom = np.zeros(7)
atom[DyadicIndex(2, 0).index] = 1
r = full_report(Symbol(2, atom), one)
print("unit mass at leaf 2:0:", f"A={r.A:g} B={r.B:g} C={r.C:.6f} (sqrt 2 = {math.sqrt(2):.6f})")

print("\ndepth seed      A      B      C   op_norm  ratio  witnesses")
ratios = []
for depth in (3, 5, 7):
    for seed in range(4):
        b = generate("random", depth, seed=2 * seed)
        d = generate("random", depth, seed=2 * seed + 1)
        r = full_report(b, d, seed=seed)
        ratios.append(r.ratio)
        w = f"{r.witness_A.label} {r.witness_B.label} {r.witness_C.label}"
        print(
            f"{depth:5d} {seed:4d} {r.A:6.3f} {r.B:6.3f} {r.C:6.3f} {r.op_norm:9.3f} "
            f"{r.ratio:6.3f}  {w}"
        )
print(f"\nratio range {min(ratios):.3f} .. {max(ratios):.3f}")
