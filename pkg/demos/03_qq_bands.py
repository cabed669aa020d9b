"""Simultaneous Q-Q bands from the M_n threshold.

A sample lies inside every band exactly when M_n > c_alpha, so one
threshold gives a band for the whole plot.
"""

import numpy as np

from berkjones import stats
from berkjones.bands import confidence_bands, inside_bands

n, alpha = 100, 0.05
table = confidence_bands(n, alpha)
print(f"c_alpha = {table.c_alpha:.4g} (approximate: {table.approximate})")
lo, hi = table.level_bounds
print(f"true level lies in [{lo:.4f}, {hi:.4f}]")

print(" i  expected   x_lower   x_upper")
for i in (1, 2, 10, 50, 91, 99, 100):
    k = i - 1
    print(f"{i:3d} {table.expected[k]:9.3f} {table.x_lower[k]:9.3f} {table.x_upper[k]:9.3f}")

rng = np.random.default_rng(2)
null = stats.transform(rng.normal(size=n))
wide = stats.transform(rng.normal(scale=1.4, size=n))
print("null sample inside:", bool(inside_bands(null, table)))
print("wide sample inside:", bool(inside_bands(wide, table)))

# empirical coverage over many null samples
u = np.sort(rng.random((10_000, n)), axis=1)
print("coverage:", inside_bands(u, table).mean())

with open("qq_bands.csv", "w", newline="") as fh:
    table.to_csv(fh)
print("wrote qq_bands.csv")
