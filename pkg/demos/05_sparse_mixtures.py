"""Rare-weak mixtures: who detects what.

(1 - eps) N(0, 1) + eps N(mu, 1).  The sum wins for dense weak signals,
HC2004 for very sparse strong ones, and M_n+ in between.
"""

import math

from berkjones.engine import find_threshold
from berkjones.sim import (MixtureSpec, SweepGrid, detection_boundary,
                           first_order_tail_probability,
                           hc_first_index_deviation, roc_curve, tpr_at,
                           winner_map)

# asymptotic detection boundary
for beta in (0.55, 0.65, 0.75, 0.85, 0.95):
    print(f"beta={beta:.2f}  r_min={detection_boundary(beta):.4f}")

# why HC thresholds are so large at small n
n, c = 100, 65.48
print(f"P[u_(1) < 1/(c n lln)] = {first_order_tail_probability(n, c):.5f}")
print(f"first-index HC deviation ~ {hc_first_index_deviation(n, c):.3f} "
      f"(exact {hc_first_index_deviation(n, c, exact=True):.3f})")
print(f"exact HC2004 1% threshold at n=100: {find_threshold('hc2004', n, 0.01):.3f}")
print(f"asymptotic scale sqrt(2 lln): {math.sqrt(2 * math.log(math.log(n))):.3f}")

# ROC with the likelihood ratio as the ceiling
spec = MixtureSpec(0.01, 2.0, 1000)
curves = roc_curve(["lr", "sum", "max", "hc2004", "mn_plus"], spec, 2000, seed=4)
for name, (fpr, tpr) in curves.items():
    print(f"{name:8s} TPR at FPR 0.05: {tpr_at(fpr, tpr, 0.05):.3f}")

# a small winner map
grid = SweepGrid(eps=(0.2, 0.05, 0.01), mu=(0.5, 1.5, 3.5), reps=1000, seed=3)
for cell in winner_map(grid, 1000, workers=2):
    miss = ", ".join(f"{k}={v:.3f}" for k, v in cell.misdetection.items())
    print(f"eps={cell.epsilon:<5} mu={cell.mu:<4} winner={cell.winner or '-':8s} ({miss})")
