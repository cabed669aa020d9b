"""Goodness-of-fit statistics on probability-integral-transformed samples.

The public functions take a :class:`SortedUniformSample`.  Each has a
vectorized kernel (``*_values``) operating on the last axis of an array of
sorted uniforms, which the simulation harness uses on whole replicate
matrices at once.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import NamedTuple, Sequence

import numpy as np
from scipy import special as sc

from .special import normal_cdf, normal_quantile

__all__ = [
    "STATISTIC_TAGS",
    "StatisticKind",
    "NullModel",
    "SortedUniformSample",
    "OrderPValues",
    "MnStatistics",
    "KsStatistics",
    "TieWarning",
    "transform",
    "order_pvalues",
    "mn_statistics",
    "ks_statistics",
    "hc_statistic",
    "ad_statistic",
    "adsup_statistic",
    "compute_statistic",
    "order_pvalue_values",
    "upper_pvalue_values",
    "mn_plus_values",
    "mn_minus_values",
    "mn_values",
    "ks_plus_values",
    "ks_minus_values",
    "ks_values",
    "hc_values",
    "ad_values",
    "adsup_values",
]

STATISTIC_TAGS = (
    "mn_plus", "mn_minus", "mn",
    "ks_plus", "ks_minus", "ks",
    "hc2004", "hc2008",
    "ad", "ad_sup",
)
# statistics for which small values are evidence against the null
SMALL_REJECTS = frozenset({"mn_plus", "mn_minus", "mn"})


class TieWarning(UserWarning):
    pass


@dataclass(frozen=True)
class StatisticKind:
    tag: str
    alpha0: float = 1.0

    def __post_init__(self):
        if self.tag not in STATISTIC_TAGS:
            raise ValueError(f"unknown statistic {self.tag!r}; expected one of {STATISTIC_TAGS}")
        if not 0 < self.alpha0 <= 1:
            raise ValueError(f"alpha0 must lie in (0, 1], got {self.alpha0}")
        if self.alpha0 != 1.0 and self.tag not in ("hc2004", "hc2008"):
            raise ValueError("alpha0 only applies to the HC statistics")

    @classmethod
    def coerce(cls, kind, alpha0: float | None = None) -> "StatisticKind":
        if isinstance(kind, cls):
            return kind if alpha0 is None else cls(kind.tag, alpha0)
        return cls(str(kind), 1.0 if alpha0 is None else alpha0)

    @property
    def small_rejects(self) -> bool:
        return self.tag in SMALL_REJECTS


@dataclass(frozen=True)
class NullModel:
    """A fully specified continuous null distribution.

    ``kind`` is ``"standard-normal"``, ``"uniform"`` or ``"user-table"``.  A
    user table is a strictly increasing grid of ``x`` values with
    nondecreasing CDF values in [0, 1], interpolated linearly.
    """

    kind: str = "standard-normal"
    x: tuple = ()
    cdf_values: tuple = ()

    def __post_init__(self):
        if self.kind not in ("standard-normal", "uniform", "user-table"):
            raise ValueError(f"unknown null model {self.kind!r}")
        if self.kind == "user-table":
            x = np.asarray(self.x, dtype=float)
            F = np.asarray(self.cdf_values, dtype=float)
            if x.ndim != 1 or x.size < 2 or x.shape != F.shape:
                raise ValueError("user table needs at least two (x, F(x)) rows")
            if np.any(np.diff(x) <= 0):
                raise ValueError("user table x values must be strictly increasing")
            if np.any(np.diff(F) < 0) or F[0] < 0 or F[-1] > 1:
                raise ValueError("user table CDF values must be nondecreasing within [0, 1]")

    @classmethod
    def from_table(cls, x, cdf_values) -> "NullModel":
        return cls("user-table", tuple(map(float, x)), tuple(map(float, cdf_values)))

    def cdf(self, values):
        values = np.asarray(values, dtype=float)
        if self.kind == "standard-normal":
            return np.asarray(normal_cdf(values))
        if self.kind == "uniform":
            return np.clip(values, 0.0, 1.0)
        x = np.asarray(self.x)
        if np.any((values < x[0]) | (values > x[-1])):
            bad = values[(values < x[0]) | (values > x[-1])][0]
            raise ValueError(f"value {bad!r} outside the user table range [{x[0]}, {x[-1]}]")
        return np.interp(values, x, np.asarray(self.cdf_values))

    def quantile(self, probs):
        probs = np.asarray(probs, dtype=float)
        if self.kind == "standard-normal":
            return np.asarray(normal_quantile(probs))
        if self.kind == "uniform":
            return probs.copy()
        F = np.asarray(self.cdf_values)
        if np.any(np.diff(F) <= 0):
            raise ValueError("user table CDF must be strictly increasing to invert it")
        return np.interp(probs, F, np.asarray(self.x))


@dataclass(frozen=True)
class SortedUniformSample:
    values: np.ndarray
    ties: bool = False

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.ndim != 1 or v.size == 0:
            raise ValueError("sample must be a nonempty 1-d sequence")
        if np.any(~((v >= 0) & (v <= 1))):
            raise ValueError("transformed values must lie in [0, 1]")
        if np.any(np.diff(v) < 0):
            raise ValueError("sample values must be sorted")
        object.__setattr__(self, "values", v)

    @property
    def n(self) -> int:
        return self.values.size

    @classmethod
    def from_uniforms(cls, u: Sequence[float]) -> "SortedUniformSample":
        v = np.sort(np.asarray(u, dtype=float))
        return cls(v, ties=bool(np.any(np.diff(v) == 0)))

    def reflect(self) -> "SortedUniformSample":
        """The sample ``1 - u`` (sorted again)."""
        return SortedUniformSample(1.0 - self.values[::-1], self.ties)


@dataclass(frozen=True)
class OrderPValues:
    p: np.ndarray = field(repr=False)
    # 1 - p, computed directly when built from a sample
    upper: np.ndarray | None = field(default=None, repr=False)

    @property
    def n(self) -> int:
        return self.p.size


class MnStatistics(NamedTuple):
    mn_plus: float
    mn_minus: float
    mn: float
    argmin_plus: int
    argmin_minus: int


class KsStatistics(NamedTuple):
    k_plus: float
    k_minus: float
    k: float


def transform(raw, model: NullModel | None = None) -> SortedUniformSample:
    """Probability integral transform ``u = F(x)`` followed by sorting.

    Repeated values are allowed but flagged, with a :class:`TieWarning`.
    """
    model = NullModel() if model is None else model
    raw = np.asarray(raw, dtype=float).ravel()
    if raw.size == 0:
        raise ValueError("no observations")
    if not np.all(np.isfinite(raw)):
        raise ValueError("observations must be finite")
    u = np.sort(model.cdf(raw))
    ties = bool(np.any(np.diff(u) == 0))
    if ties:
        warnings.warn("tied transformed values; the null distribution assumes continuity",
                      TieWarning, stacklevel=2)
    return SortedUniformSample(u, ties=ties)


# -- vectorized kernels: last axis holds a sorted sample -----------------------

def _index(n):
    return np.arange(1, n + 1, dtype=float)


def order_pvalue_values(u):
    u = np.asarray(u, dtype=float)
    n = u.shape[-1]
    i = _index(n)
    return sc.betainc(i, n - i + 1, u)


def mn_plus_values(u):
    return order_pvalue_values(u).min(axis=-1)


def upper_pvalue_values(u):
    """``1 - p_(i)`` evaluated as the reflected lower tail, free of cancellation."""
    u = np.asarray(u, dtype=float)
    n = u.shape[-1]
    i = _index(n)
    return sc.betainc(n - i + 1, i, 1.0 - u)


def mn_minus_values(u):
    return upper_pvalue_values(u).min(axis=-1)


def mn_values(u):
    return np.minimum(mn_plus_values(u), mn_minus_values(u))


def ks_plus_values(u):
    u = np.asarray(u, dtype=float)
    n = u.shape[-1]
    return math.sqrt(n) * np.max(_index(n) / n - u, axis=-1)


def ks_minus_values(u):
    u = np.asarray(u, dtype=float)
    n = u.shape[-1]
    return math.sqrt(n) * np.max(u - (_index(n) - 1) / n, axis=-1)


def ks_values(u):
    return np.maximum(ks_plus_values(u), ks_minus_values(u))


def _hc_range(n, alpha0):
    m = int(math.floor(alpha0 * n + 1e-12))
    if m < 1:
        raise ValueError(f"alpha0={alpha0} leaves no indices for n={n}")
    return m


def _weighted_ratio(num, den):
    """num / sqrt(den) where zero denominators give +inf (num > 0) or are skipped."""
    with np.errstate(divide="ignore", invalid="ignore"):
        r = num / np.sqrt(den)
    r = np.where(den > 0, r, np.where(num > 0, np.inf, -np.inf))
    return r


def hc_values(u, variant="hc2004", alpha0=1.0):
    u = np.asarray(u, dtype=float)
    n = u.shape[-1]
    m = _hc_range(n, alpha0)
    i = _index(n)[:m]
    if variant == "hc2008":
        # i = n has a zero denominator and is excluded
        m = min(m, n - 1)
        if m < 1:
            raise ValueError("HC2008 needs at least one index below n")
        i = i[:m]
        d = i / n
    elif variant == "hc2004":
        d = u[..., :m]
    else:
        raise ValueError(f"unknown HC variant {variant!r}")
    num = i / n - u[..., :m]
    r = _weighted_ratio(num, d * (1.0 - d))
    return math.sqrt(n) * np.max(r, axis=-1)


def ad_values(u):
    u = np.asarray(u, dtype=float)
    if np.any((u <= 0) | (u >= 1)):
        raise ValueError("Anderson-Darling statistic needs all values strictly inside (0, 1)")
    n = u.shape[-1]
    w = 2 * _index(n) - 1
    s = np.sum(w * (np.log(u) + np.log1p(-u[..., ::-1])), axis=-1)
    return -n - s / n


def adsup_values(u):
    u = np.asarray(u, dtype=float)
    n = u.shape[-1]
    i = _index(n)
    den = u * (1.0 - u)
    upper = _weighted_ratio(np.abs(i / n - u), den)
    lower = _weighted_ratio(np.abs(u - (i - 1) / n), den)
    return math.sqrt(n) * np.maximum(upper.max(axis=-1), lower.max(axis=-1))


# -- sample-level API ---------------------------------------------------------

def order_pvalues(s: SortedUniformSample) -> OrderPValues:
    """Per-index p-values ``P[Beta(i, n-i+1) < u_(i)]``."""
    p = np.clip(order_pvalue_values(s.values), 0.0, 1.0)
    p = np.where(s.values == 0, 0.0, np.where(s.values == 1, 1.0, p))
    q = np.clip(upper_pvalue_values(s.values), 0.0, 1.0)
    q = np.where(s.values == 0, 1.0, np.where(s.values == 1, 0.0, q))
    return OrderPValues(p, q)


def mn_statistics(p: OrderPValues) -> MnStatistics:
    q = 1.0 - np.asarray(p.p) if p.upper is None else np.asarray(p.upper)
    p = np.asarray(p.p)
    ip, im = int(np.argmin(p)), int(np.argmin(q))
    mp, mm = float(p[ip]), float(q[im])
    # indices are 1-based like the order statistics they refer to
    return MnStatistics(mp, mm, min(mp, mm), ip + 1, im + 1)


def ks_statistics(s: SortedUniformSample) -> KsStatistics:
    kp = float(ks_plus_values(s.values))
    km = float(ks_minus_values(s.values))
    return KsStatistics(kp, km, max(kp, km))


def hc_statistic(s: SortedUniformSample, variant: str = "hc2004", alpha0: float = 1.0) -> float:
    """Higher Criticism, maximized over ``1 <= i <= floor(alpha0 * n)``.

    Returns ``inf`` when an HC2004 denominator vanishes under a positive
    numerator (``u_(i) = 0``).
    """
    if not 0 < alpha0 <= 1:
        raise ValueError("alpha0 must lie in (0, 1]")
    return float(hc_values(s.values, variant, alpha0))


def ad_statistic(s: SortedUniformSample) -> float:
    return float(ad_values(s.values))


def adsup_statistic(s: SortedUniformSample) -> float:
    return float(adsup_values(s.values))


def compute_statistic(s: SortedUniformSample, kind) -> float:
    kind = StatisticKind.coerce(kind)
    tag = kind.tag
    if tag.startswith("mn"):
        return getattr(mn_statistics(order_pvalues(s)), tag)
    if tag.startswith("ks"):
        ks = ks_statistics(s)
        return {"ks_plus": ks.k_plus, "ks_minus": ks.k_minus, "ks": ks.k}[tag]
    if tag in ("hc2004", "hc2008"):
        return hc_statistic(s, tag, kind.alpha0)
    if tag == "ad":
        return ad_statistic(s)
    return adsup_statistic(s)
