"""Growth of the log-type family b_I = sqrt|I| with depth.

BMO norms grow like sqrt(D + 1); the operator norm grows like
sqrt(D (D - 1) / 2) and A + B + C tracks it with ratio 2.  The rows are
also written to ``log_type_sweep.csv`` for external plotting.
"""

import csv
import math

from dyadic_paraproducts.campaign import log_type_sweep

rows = log_type_sweep(range(2, 11))
print("depth   A+B+C   op_norm   sqrt(D(D-1)/2)   ratio   bmo_b*bmo_d")
for row in rows:
    D = row["depth"]
    print(
        f"{D:5d} {row['total']:7.4f} {row['op_norm']:9.4f} {math.sqrt(D * (D - 1) / 2):16.4f}"
        f" {row['ratio']:7.4f} {row['bmo_product']:12.4f}"
    )

with open("log_type_sweep.csv", "w", newline="") as fh:
    writer = csv.DictWriter(fh, fieldnames=list(rows[0]))
    writer.writeheader()
    writer.writerows(rows)
print("\nwrote log_type_sweep.csv")
