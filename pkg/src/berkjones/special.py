"""Special functions used throughout the package.

Thin, validated wrappers around the Cephes kernels shipped with
``scipy.special``: the regularized incomplete Beta function and its
inverse (with a safeguarded Newton polish), Beta moments, and the standard
normal CDF / quantile.  All functions broadcast over numpy arrays.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import special as sc

__all__ = [
    "BetaParams",
    "BetaMoments",
    "reg_inc_beta",
    "inv_reg_inc_beta",
    "beta_logpdf",
    "beta_moments",
    "order_statistic_moments",
    "normal_cdf",
    "normal_quantile",
]

INV_TOL = 1e-13
INV_MAX_ITER = 200


@dataclass(frozen=True)
class BetaParams:
    alpha: float
    beta: float

    def __post_init__(self):
        if not (self.alpha > 0 and self.beta > 0):
            raise ValueError(f"Beta shapes must be positive, got ({self.alpha}, {self.beta})")


@dataclass(frozen=True)
class BetaMoments:
    mean: float
    variance: float


def _check_shapes(a, b):
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if np.any(~(a > 0)) or np.any(~(b > 0)):
        raise ValueError("Beta shape parameters must be positive")
    return a, b


def _check_unit(x, name):
    x = np.asarray(x, dtype=float)
    if np.any(~((x >= 0) & (x <= 1))):
        raise ValueError(f"{name} must lie in [0, 1]")
    return x


def _scalar_or_array(out):
    return out.item() if out.ndim == 0 else out


def reg_inc_beta(x, a, b):
    """Regularized incomplete Beta function ``I_x(a, b)``.

    Exactly 0 at ``x == 0`` and exactly 1 at ``x == 1``.
    """
    x = _check_unit(x, "x")
    a, b = _check_shapes(a, b)
    # above 1/2 the reflected argument 1 - x is exact, and Cephes loses a few
    # digits near x = 1 for small shapes, so evaluate the reflected tail there
    x, a, b = np.broadcast_arrays(x, a, b)
    out = np.empty(x.shape)
    upper = x > 0.5
    out[upper] = sc.betaincc(b[upper], a[upper], 1 - x[upper])
    out[~upper] = sc.betainc(a[~upper], b[~upper], x[~upper])
    out = np.where(x == 0, 0.0, np.where(x == 1, 1.0, out))
    return _scalar_or_array(np.clip(out, 0.0, 1.0))


def beta_logpdf(x, a, b):
    x = np.asarray(x, dtype=float)
    a, b = _check_shapes(a, b)
    with np.errstate(divide="ignore", invalid="ignore"):
        return sc.xlogy(a - 1, x) + sc.xlog1py(b - 1, -x) - sc.betaln(a, b)


def inv_reg_inc_beta(q, a, b):
    """Inverse of :func:`reg_inc_beta` in its first argument.

    Returns ``x`` with ``I_x(a, b) = q``.  The Cephes estimate is polished by
    Newton steps that are kept inside a shrinking bisection bracket, so the
    iteration cannot leave ``[0, 1]`` even where the density is steep.
    """
    q = _check_unit(q, "q")
    a, b = _check_shapes(a, b)
    q, a, b = np.broadcast_arrays(q, a, b)
    shape = q.shape
    q, a, b = (np.atleast_1d(v).ravel() for v in (q, a, b))
    x = np.asarray(sc.betaincinv(a, b, q), dtype=float).copy()

    lo = np.zeros_like(x)
    hi = np.ones_like(x)
    active = (q > 0) & (q < 1)
    for _ in range(INV_MAX_ITER):
        if not active.any():
            break
        xa, qa, aa, ba = x[active], q[active], a[active], b[active]
        err = sc.betainc(aa, ba, xa) - qa
        done = np.abs(err) <= INV_TOL
        # tighten the bracket around the root
        lo_a = np.where(err < 0, xa, lo[active])
        hi_a = np.where(err > 0, xa, hi[active])
        dens = np.exp(beta_logpdf(xa, aa, ba))
        with np.errstate(divide="ignore", invalid="ignore"):
            step = xa - err / dens
        bad = ~np.isfinite(step) | (step <= lo_a) | (step >= hi_a)
        step = np.where(bad, 0.5 * (lo_a + hi_a), step)
        # once the bracket is at machine resolution there is nothing left to do
        stuck = (hi_a - lo_a) <= 4 * np.spacing(np.maximum(xa, 1e-300))
        new_x = np.where(done | stuck, xa, step)
        x[active] = new_x
        lo[active] = lo_a
        hi[active] = hi_a
        idx = np.flatnonzero(active)
        active[idx[done | stuck]] = False

    # the last iterate may sit a few ulps off; keep the best of it and the bracket ends
    inner = (q > 0) & (q < 1)
    if inner.any():
        cand = np.stack([x[inner], lo[inner], hi[inner]])
        resid = np.abs(reg_inc_beta(cand, a[inner], b[inner]) - q[inner])
        x[inner] = cand[np.argmin(resid, axis=0), np.arange(cand.shape[1])]

    x = np.where(q == 0, 0.0, np.where(q == 1, 1.0, x))
    return _scalar_or_array(np.clip(x, 0.0, 1.0).reshape(shape))


def beta_moments(a, b) -> BetaMoments:
    a, b = float(a), float(b)
    _check_shapes(a, b)
    s = a + b
    return BetaMoments(mean=a / s, variance=a * b / (s * s * (s + 1)))


def order_statistic_moments(i: int, n: int) -> BetaMoments:
    """Mean and variance of the i-th of n uniform order statistics."""
    if not 1 <= i <= n:
        raise ValueError(f"need 1 <= i <= n, got i={i}, n={n}")
    return beta_moments(i, n - i + 1)


def normal_cdf(z):
    return _scalar_or_array(np.asarray(sc.ndtr(np.asarray(z, dtype=float))))


def normal_quantile(q):
    q = np.asarray(q, dtype=float)
    if np.any(~((q > 0) & (q < 1))):
        raise ValueError("normal quantile needs q strictly inside (0, 1)")
    return _scalar_or_array(np.asarray(sc.ndtri(q)))
