"""Exact one-sided p-values for supremum-type goodness-of-fit statistics.

Every one-sided statistic considered here rejects when some order statistic
falls below a per-index limit, so its null distribution reduces to the
non-crossing probability

    P[L_i <= U_(i) for all i] = n! * f_n(1),   f_0 = 1,  f_d(t) = int_{L_d}^t f_{d-1},

for sorted uniforms ``U_(1) <= ... <= U_(n)``.  The iterated integral is
evaluated with polynomials kept in a basis of translated monomials
``(x - L_j)^k``, which keeps the constant term of each step independent of
the previous constant term.  Coefficients are renormalized by a power of two
after every step and ``n!`` enters only through its logarithm, so the whole
computation is O(n^2) time and O(n) memory.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Literal

import numpy as np
from scipy import optimize

from .special import inv_reg_inc_beta
from .stats import StatisticKind

__all__ = [
    "PrecisionError",
    "BoundaryVector",
    "PolynomialState",
    "TranslatedPolynomial",
    "PValueResult",
    "EXTENDED_PRECISION",
    "boundary_for",
    "monotonize",
    "crossing_probability",
    "crossing_probability_naive",
    "one_sided_pvalue",
    "two_sided_pvalue",
    "two_sided_bounds",
    "asymptotic_cdf",
    "asymptotic_scale",
    "scaled_threshold",
    "eicker_threshold",
    "eicker_limit_cdf",
    "find_threshold",
]

# numpy's long double is the x87 80-bit format on x86 Linux; on platforms
# where it is a plain double we fall back to compensated summation.
EXTENDED_PRECISION = np.finfo(np.longdouble).nmant > np.finfo(np.float64).nmant

ONE_SIDED_TAGS = ("mn_plus", "mn_minus", "ks_plus", "ks_minus", "hc2004", "hc2008")
# minus-oriented statistics share the null law of their plus counterparts
_REFLECTED = {"mn_minus": "mn_plus", "ks_minus": "ks_plus"}
_SELF_CHECK_TOL = 1e-9


class PrecisionError(ArithmeticError):
    """The recursion produced a value that fails its sanity checks."""


@dataclass(frozen=True)
class BoundaryVector:
    limits: np.ndarray
    monotonized: bool = False

    def __post_init__(self):
        L = np.asarray(self.limits, dtype=float)
        if L.ndim != 1 or L.size == 0:
            raise ValueError("boundary must be a nonempty 1-d sequence")
        if np.any(~((L >= 0) & (L <= 1))):
            raise ValueError("boundary limits must lie in [0, 1]")
        object.__setattr__(self, "limits", L)

    @property
    def n(self) -> int:
        return self.limits.size


@dataclass(frozen=True)
class PolynomialState:
    """Snapshot of ``f_d(x) = c_0 + sum_k c_k (x + t_k)^k`` times ``2**log2_scale``.

    ``coeffs[k]`` multiplies ``(x + shifts[k-1])**k``; the true polynomial is
    the stored one divided by ``2**log2_scale``.
    """

    degree: int
    coeffs: np.ndarray
    shifts: np.ndarray
    log2_scale: int

    @property
    def log_scale(self) -> float:
        return self.log2_scale * math.log(2.0)


class TranslatedPolynomial:
    """Running state of the iterated integral ``f_d``.

    Internally coefficients are stored by translation origin ``j`` (the term
    ``c (x - L_j)^(d-j+1)``), which makes each integration step a single
    in-place division plus one new entry.
    """

    def __init__(self, capacity: int, *, rescale: bool = True, dtype=np.longdouble):
        self.dtype = np.dtype(dtype)
        self.rescale = rescale
        self.degree = 0
        self.log2_scale = 0
        self._const = self.dtype.type(1)
        self._coef = np.zeros(capacity, dtype=self.dtype)
        self._origin = np.zeros(capacity, dtype=self.dtype)
        self._inv = 1 / np.arange(1, capacity + 1, dtype=self.dtype)
        self._powers = np.arange(capacity, 0, -1).astype(self.dtype)
        self._compensated = self.dtype.itemsize <= 8

    def _sum(self, terms):
        if self._compensated:
            return self.dtype.type(math.fsum(terms.tolist()))
        return terms.sum()

    def _translated_powers(self, x, m):
        # (x - L_j)^(k_j) for the first m origins, with k_j = degree - j + 1
        cap = self._powers.size
        k = self._powers[cap - self.degree: cap - self.degree + m]
        with np.errstate(divide="ignore"):
            return np.exp(k * np.log(x - self._origin[:m]))

    def step(self, lower) -> None:
        """Replace ``f_d`` by ``t -> int_lower^t f_d``."""
        d = self.degree + 1
        m = d - 1
        lower = self.dtype.type(lower)
        if m:
            self._coef[:m] *= self._inv[m:0:-1]
        self._coef[m] = self._const
        self._origin[m] = lower
        self.degree = d
        if m:
            # new constant term makes f_d vanish at its own lower limit
            self._const = -self._sum(self._coef[:m] * self._translated_powers(lower, m))
        else:
            self._const = self.dtype.type(0)
        if self.rescale:
            peak = max(abs(self._const), np.abs(self._coef[:d]).max())
            if peak > 0:
                e = int(np.frexp(peak)[1])
                self._coef[:d] = np.ldexp(self._coef[:d], -e)
                self._const = np.ldexp(self._const, -e)
                self.log2_scale -= e

    def scaled_value(self, x):
        """Stored polynomial at ``x``; divide by ``2**log2_scale`` for f_d(x)."""
        d = self.degree
        if d == 0:
            return self._const
        x = self.dtype.type(x)
        return self._const + self._sum(self._coef[:d] * self._translated_powers(x, d))

    @property
    def state(self) -> PolynomialState:
        d = self.degree
        coeffs = np.concatenate([[self._const], self._coef[:d][::-1]]).astype(self.dtype)
        return PolynomialState(d, coeffs, -self._origin[:d][::-1].copy(), self.log2_scale)


@dataclass(frozen=True)
class PValueResult:
    """Two-sided M_n p-value: rigorous bounds plus the asymptotic point estimate."""

    exact_one_sided: float | None
    two_sided_lower: float
    two_sided_upper: float
    two_sided_asymptotic: float
    method: Literal["exact", "bounds", "asymptotic"] = "bounds"


# -- boundaries ---------------------------------------------------------------

def _hc2004_limits(n, c):
    a = np.arange(1, n + 1) / n
    s = c / math.sqrt(n)
    root = np.sqrt(s * s + 4 * a * (1 - a))
    if s >= 0:
        # smaller root of (a - u)^2 = s^2 u (1 - u), written to avoid cancellation
        return 2 * a * a / (2 * a + s * s + s * root)
    return (2 * a + s * s - s * root) / (2 * (1 + s * s))


def boundary_for(kind, n: int, c: float, alpha0: float | None = None) -> BoundaryVector:
    """Lower limits ``L_i(c)`` with ``{stat does not reject at c} = {L_i <= U_(i) for all i}``.

    ``mn_plus``: Beta(i, n-i+1) quantiles at level c.  ``ks_plus``:
    ``i/n - c/sqrt(n)``.  ``hc2008``: ``i/n - c sqrt(i (n-i)) / n^1.5``.
    ``hc2004``: the root of ``sqrt(n)(i/n - u) / sqrt(u(1-u)) = c``.  HC
    indices beyond ``floor(alpha0 n)`` (and ``i = n`` for HC2008) are
    unconstrained.
    """
    kind = StatisticKind.coerce(kind, alpha0)
    tag = kind.tag
    if n < 1:
        raise ValueError("n must be positive")
    c = float(c)
    if not math.isfinite(c):
        raise ValueError("threshold must be finite")
    i = np.arange(1, n + 1)
    if tag == "mn_plus":
        if not 0 <= c <= 1:
            raise ValueError(f"M_n+ thresholds lie in [0, 1], got {c}")
        L = np.asarray(inv_reg_inc_beta(c, i, n - i + 1), dtype=float).reshape(n)
    elif tag == "ks_plus":
        if c < 0:
            raise ValueError(f"KS+ thresholds must be nonnegative, got {c}")
        L = i / n - c / math.sqrt(n)
    elif tag == "hc2008":
        L = i / n - c * np.sqrt(i * (n - i)) / n ** 1.5
        L[-1] = 0.0
    elif tag == "hc2004":
        L = _hc2004_limits(n, c)
    else:
        raise ValueError(f"no direct boundary for {tag!r}; use its reflected counterpart")
    if tag in ("hc2004", "hc2008"):
        m = int(math.floor(kind.alpha0 * n + 1e-12))
        L[m:] = 0.0
    return BoundaryVector(np.clip(L, 0.0, 1.0))


def monotonize(b: BoundaryVector) -> BoundaryVector:
    """Prefix maximum; leaves the non-crossing event unchanged since U_(i) is sorted."""
    if b.monotonized:
        return b
    return BoundaryVector(np.maximum.accumulate(b.limits), monotonized=True)


# -- the recursion ------------------------------------------------------------

def _as_boundary(b) -> BoundaryVector:
    return b if isinstance(b, BoundaryVector) else BoundaryVector(np.asarray(b, dtype=float))


def crossing_probability(b, *, rescale: bool = True, precision: str = "extended") -> float:
    """``P[L_i <= U_(i) <= 1 for all i]`` for n sorted uniforms.

    Parameters
    ----------
    b : BoundaryVector or sequence of float
        Lower limits in [0, 1]; monotonized internally.
    rescale : bool
        Renormalize coefficients by powers of two after every step.  Without
        it the coefficients underflow in double precision near n = 180.
    precision : {"extended", "double"}
        "extended" uses numpy's long double (80-bit on x86); "double" uses
        float64 with exactly rounded summation of each step.

    Raises
    ------
    PrecisionError
        If the result is not finite or falls outside [0, 1] by more than a
        rounding-level tolerance.
    """
    b = monotonize(_as_boundary(b))
    L = b.limits
    n = b.n
    if L[-1] >= 1.0:
        return 0.0
    if L[-1] <= 0.0:
        return 1.0
    if precision == "extended":
        dtype = np.longdouble
    elif precision == "double":
        dtype = np.float64
    else:
        raise ValueError(f"unknown precision {precision!r}")

    poly = TranslatedPolynomial(n, rescale=rescale, dtype=dtype)
    for lower in L:
        poly.step(lower)
    f1 = poly.scaled_value(1)
    if not np.isfinite(f1):
        raise PrecisionError(f"non-finite polynomial value at n={n}")
    if f1 == 0:
        return 0.0
    dt = np.dtype(dtype).type
    log_nfact = np.sum(np.log(np.arange(1, n + 1, dtype=dtype)))
    log_p = log_nfact + np.log(abs(f1)) - poly.log2_scale * np.log(dt(2))
    p = math.copysign(float(np.exp(log_p)), float(f1))
    if not math.isfinite(p) or not -_SELF_CHECK_TOL <= p <= 1 + _SELF_CHECK_TOL:
        raise PrecisionError(f"crossing probability {p!r} outside [0, 1] at n={n}")
    return min(max(p, 0.0), 1.0)


def crossing_probability_naive(b, *, dtype=np.longdouble) -> float:
    """Same quantity through the standard monomial basis.

    Kept for comparison only: its constant term accumulates the errors of
    every earlier coefficient and the result degrades beyond n of a few
    hundred even in extended precision.
    """
    L = monotonize(_as_boundary(b)).limits.astype(dtype)
    n = L.size
    coef = np.zeros(n + 1, dtype=dtype)
    coef[0] = 1
    inv = 1 / np.arange(1, n + 1, dtype=dtype)
    for d in range(1, n + 1):
        coef[1:d + 1] = coef[:d] * inv[:d]
        powers = np.cumprod(np.full(d, L[d - 1], dtype=dtype))
        coef[0] = -np.dot(coef[1:d + 1], powers)
    log_nfact = np.sum(np.log(np.arange(1, n + 1, dtype=dtype)))
    return float(np.exp(log_nfact) * coef.sum())


# -- p-values -----------------------------------------------------------------

def _plus_kind(kind, alpha0=None) -> StatisticKind:
    kind = StatisticKind.coerce(kind, alpha0)
    if kind.tag not in ONE_SIDED_TAGS:
        raise ValueError(f"{kind.tag!r} is not a one-sided statistic")
    tag = _REFLECTED.get(kind.tag, kind.tag)
    return StatisticKind(tag, kind.alpha0)


def one_sided_pvalue(kind, n: int, c: float, alpha0: float | None = None, **engine_kw) -> float:
    """Null probability that the statistic is at least as extreme as ``c``.

    For M_n+ / M_n- that is ``P[M < c]``; for KS+/KS-/HC it is ``P[stat >= c]``.
    """
    kind = _plus_kind(kind, alpha0)
    c = float(c)
    if kind.tag == "mn_plus":
        if c <= 0:
            return 0.0
        if c >= 1:
            return 1.0
    elif kind.tag == "ks_plus" and c <= 0:
        return 1.0
    b = boundary_for(kind, n, c)
    p = 1.0 - crossing_probability(b, **engine_kw)
    return min(max(p, 0.0), 1.0)


def two_sided_bounds(q: float) -> tuple[float, float]:
    """Bounds on ``P[M_n <= c]`` from the one-sided ``q = P[M_n+ <= c]``."""
    q = min(max(float(q), 0.0), 1.0)
    return 2 * q - q * q, min(2 * q, 1.0)


def two_sided_pvalue(n: int, c: float, **engine_kw) -> PValueResult:
    """Bounds and asymptotic estimate of ``P[M_n <= c]`` under the null."""
    if not 0 <= c <= 1:
        raise ValueError(f"M_n values lie in [0, 1], got {c}")
    q = one_sided_pvalue("mn_plus", n, c, **engine_kw)
    lower, upper = two_sided_bounds(q)
    method = "exact" if lower == upper else "bounds"
    return PValueResult(q, lower, upper, lower, method)


# -- asymptotics ----------------------------------------------------------------

def asymptotic_scale(n: int) -> float:
    """``2 log n log log n``, the normalization of M_n in the limit law."""
    if n <= math.e:
        raise ValueError("log log n is undefined for n <= e")
    ln = math.log(n)
    return 2 * ln * math.log(ln)


def scaled_threshold(c: float, n: int) -> float:
    """Map a raw M_n threshold to the scaled argument ``x = c * 2 log n log log n``."""
    return c * asymptotic_scale(n)


def asymptotic_cdf(x: float, sided: str = "one") -> float:
    """Limit of ``P[M < x / (2 log n log log n)]``: ``1 - e^-x`` or ``1 - e^-2x``."""
    if not x > 0:
        raise ValueError("x must be positive")
    if sided == "one":
        return -math.expm1(-x)
    if sided == "two":
        return -math.expm1(-2 * x)
    raise ValueError("sided must be 'one' or 'two'")


def eicker_threshold(n: int, t: float) -> float:
    """Centering-plus-scale threshold for the supremum of the standardized empirical process."""
    if n < 16:
        raise ValueError("need n >= 16 so that log log log n is defined")
    lln = math.log(math.log(n))
    r = math.sqrt(2 * lln)
    return r + math.log(lln) / (2 * r) + t / r


def eicker_limit_cdf(t: float) -> float:
    """Limiting ``P[sup < eicker_threshold(n, t)]``."""
    return math.exp(-math.exp(-t) / math.sqrt(math.pi))


# -- thresholds -----------------------------------------------------------------

def find_threshold(kind, n: int, alpha: float, alpha0: float | None = None,
                   *, tol: float = 1e-8, **engine_kw) -> float:
    """Critical value ``c`` whose null rejection probability equals ``alpha``.

    One-sided kinds use the exact engine.  For the two-sided ``mn`` the level
    is matched through the asymptotic point estimate ``2q - q^2`` and the
    result is therefore approximate; the rigorous bounds
    :func:`two_sided_bounds` quantify the gap.
    """
    if not 0 < alpha < 1:
        raise ValueError("alpha must lie in (0, 1)")
    kind = StatisticKind.coerce(kind, alpha0)
    if kind.tag == "mn":
        target = 1.0 - math.sqrt(1.0 - alpha)
        kind = StatisticKind("mn_plus")
    else:
        target = alpha
        kind = _plus_kind(kind)

    if kind.tag == "mn_plus":
        lo, hi = 0.0, 1.0
    else:
        lo, hi = 0.0, math.sqrt(n)

    def excess(c):
        return one_sided_pvalue(kind, n, c, **engine_kw) - target

    f_lo, f_hi = excess(lo), excess(hi)
    if kind.tag in ("hc2004", "hc2008"):
        # HC is unbounded, and small-n thresholds can exceed sqrt(n)
        for _ in range(60):
            if f_hi <= 0:
                break
            lo, f_lo = hi, f_hi
            hi *= 2
            f_hi = excess(hi)
    if f_lo * f_hi > 0:
        raise ValueError(f"level {alpha} is not bracketed by thresholds in [{lo}, {hi}] for n={n}")
    c = optimize.brentq(excess, lo, hi, xtol=1e-300, rtol=4 * np.finfo(float).eps, maxiter=200)
    if abs(excess(c)) > tol:
        raise PrecisionError(f"threshold search for {kind.tag} at n={n} missed the level")
    return c
