"""Power against mean and variance shifts at n = 100, alpha = 1%.

AD leads for a mean shift with M_n and KS close behind; for a change in
scale M_n dominates and AD_sup has almost no power when sigma < 1.
"""

import numpy as np

from berkjones.sim import GaussianAlternative, power_curve

n, alpha, reps = 100, 0.01, 2000
tests = ["mn", "ks", "ad", "ad_sup"]

mus = [0.0, 0.2, 0.4, 0.6]
res = power_curve(tests, [GaussianAlternative(m, 1.0, n) for m in mus], mus, alpha, reps, seed=1)
print("mean shift")
print("  mu   " + "  ".join(f"{t:>7s}" for t in tests))
for k, mu in enumerate(mus):
    row = res[k * len(tests):(k + 1) * len(tests)]
    print(f"{mu:5.2f} " + "  ".join(f"{r.power:7.3f}" for r in row))

sigmas = [0.6, 0.8, 1.0, 1.2, 1.4]
res = power_curve(tests, [GaussianAlternative(0.0, s, n) for s in sigmas], sigmas, alpha, reps, seed=2)
print("scale change")
print("sigma  " + "  ".join(f"{t:>7s}" for t in tests))
for k, s in enumerate(sigmas):
    row = res[k * len(tests):(k + 1) * len(tests)]
    print(f"{s:5.2f} " + "  ".join(f"{r.power:7.3f}" for r in row))
