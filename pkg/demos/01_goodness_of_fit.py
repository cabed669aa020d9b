"""Goodness of fit for a sample that is slightly too wide in the tails.

Every statistic in the package, computed on the same data, with p-values
where an exact one is available.
"""

import numpy as np

from berkjones import stats
from berkjones.engine import one_sided_pvalue, two_sided_pvalue

rng = np.random.default_rng(0)
x = rng.standard_t(df=5, size=200)   # heavier tails than N(0, 1)

s = stats.transform(x)               # u = Phi(x), sorted
print("n =", s.n, " ties:", s.ties)

p = stats.order_pvalues(s)
m = stats.mn_statistics(p)
print(f"M_n+ = {m.mn_plus:.3g} at i={m.argmin_plus}   M_n- = {m.mn_minus:.3g} at i={m.argmin_minus}")

# one-sided: exact
print("P[M_n+ < observed] =", one_sided_pvalue("mn_plus", s.n, m.mn_plus))

# two-sided: rigorous bounds and the asymptotic point estimate
r = two_sided_pvalue(s.n, m.mn)
print(f"two-sided M_n p-value in [{r.two_sided_lower:.4g}, {r.two_sided_upper:.4g}], "
      f"estimate {r.two_sided_asymptotic:.4g}")

# the classical statistics on the same sample
k = stats.ks_statistics(s)
print(f"KS = {k.k:.3f}  (K+ {k.k_plus:.3f}, K- {k.k_minus:.3f})")
print(f"AD = {stats.ad_statistic(s):.3f}   AD_sup = {stats.adsup_statistic(s):.3f}")
for variant in ("hc2004", "hc2008"):
    hc = stats.hc_statistic(s, variant)
    print(f"{variant} = {hc:.3f}  p = {one_sided_pvalue(variant, s.n, hc):.4g}")

# reflecting the sample swaps the one-sided statistics
mr = stats.mn_statistics(stats.order_pvalues(s.reflect()))
print("reflected M_n+ == M_n- :", mr.mn_plus == m.mn_minus)
