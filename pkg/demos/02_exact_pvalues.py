"""The crossing-probability recursion: accuracy and speed.

P[L_i <= U_(i) for all i] = n! f_n(1).  The standard monomial basis loses
all accuracy after a few hundred steps; the translated basis with power-of-two
rescaling keeps ~1e-16 well past n = 10^4.
"""

import time

import numpy as np

from berkjones.engine import (boundary_for, crossing_probability,
                              crossing_probability_naive, find_threshold,
                              one_sided_pvalue)

# small-n table, n = 2: 2! * (0.5 (1 - L1)^2 - 0.5 (L2 - L1)^2)
print("n=2, L=(0.2, 0.5):", crossing_probability([0.2, 0.5]))

for n in (50, 200, 400, 800):
    L = boundary_for("mn_plus", n, 0.01)
    fast = crossing_probability(L)
    naive = crossing_probability_naive(L)
    dbl = crossing_probability(L, precision="double")
    print(f"n={n:4d}  translated={fast:.15f}  double={dbl:.15f}  naive={naive:.6g}")

# roughly quadratic cost
for n in (1000, 2000, 4000):
    L = boundary_for("mn_plus", n, 0.001)
    t0 = time.perf_counter()
    crossing_probability(L)
    print(f"n={n}: {time.perf_counter() - t0:.2f}s")

# critical values and their round trip
for kind in ("mn_plus", "ks_plus", "hc2004", "hc2008"):
    c = find_threshold(kind, 500, 0.05)
    print(f"{kind:8s} c_0.05 = {c:.6g}   p(c) = {one_sided_pvalue(kind, 500, c):.10f}")
