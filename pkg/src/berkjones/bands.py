"""Simultaneous confidence bands for Q-Q plots derived from M_n.

A sample satisfies ``M_n > c`` exactly when every transformed order
statistic lies strictly between the ``c`` and ``1 - c`` quantiles of its
Beta(i, n-i+1) law, so a level-alpha threshold for M_n gives bands for the
whole Q-Q plot at once.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass

import numpy as np

from .engine import find_threshold, one_sided_pvalue, two_sided_bounds
from .special import inv_reg_inc_beta
from .stats import NullModel, SortedUniformSample

__all__ = ["BandTable", "confidence_bands", "inside_bands"]

CSV_COLUMNS = ("i", "expected", "b_i", "B_i", "x_lower", "x_upper")


@dataclass(frozen=True)
class BandTable:
    n: int
    alpha: float
    c_alpha: float
    index: np.ndarray
    expected: np.ndarray
    x_lower: np.ndarray
    x_upper: np.ndarray
    u_lower: np.ndarray
    u_upper: np.ndarray
    # rigorous range of the null probability of leaving the bands
    level_bounds: tuple[float, float] = (float("nan"), float("nan"))
    approximate: bool = True

    @property
    def rows(self):
        return list(zip(self.index.tolist(), self.expected.tolist(), self.x_lower.tolist(),
                        self.x_upper.tolist(), self.u_lower.tolist(), self.u_upper.tolist()))

    def to_csv(self, fh=None) -> str | None:
        """Write ``i, expected, b_i, B_i, x_lower, x_upper`` with 12 significant digits."""
        out = io.StringIO() if fh is None else fh
        w = csv.writer(out, lineterminator="\n")
        w.writerow(CSV_COLUMNS)
        for i in range(self.n):
            w.writerow([int(self.index[i])] + [format(float(v), ".12g") for v in (
                self.expected[i], self.u_lower[i], self.u_upper[i],
                self.x_lower[i], self.x_upper[i])])
        return out.getvalue() if fh is None else None


def confidence_bands(n: int, alpha: float, model: NullModel | None = None,
                     c_alpha: float | None = None) -> BandTable:
    """Level-``alpha`` Q-Q bands for ``n`` observations under ``model``.

    ``c_alpha`` defaults to the two-sided M_n threshold from
    :func:`~berkjones.engine.find_threshold`, which matches ``alpha`` through
    the asymptotic estimate ``2q - q^2``; ``level_bounds`` records the exact
    interval that the true non-coverage probability is known to lie in.
    """
    if n < 1:
        raise ValueError("n must be positive")
    if not 0 < alpha < 1:
        raise ValueError("alpha must lie in (0, 1)")
    model = NullModel() if model is None else model
    approximate = c_alpha is None
    if c_alpha is None:
        c_alpha = find_threshold("mn", n, alpha)
    q = one_sided_pvalue("mn_plus", n, c_alpha)
    i = np.arange(1, n + 1)
    lo = np.asarray(inv_reg_inc_beta(c_alpha, i, n - i + 1), dtype=float).reshape(n)
    hi = np.asarray(inv_reg_inc_beta(1 - c_alpha, i, n - i + 1), dtype=float).reshape(n)
    with np.errstate(divide="ignore", invalid="ignore"):
        expected = model.quantile(i / (n + 1))
        x_lo = _safe_quantile(model, lo)
        x_hi = _safe_quantile(model, hi)
    return BandTable(n, alpha, c_alpha, i, expected, x_lo, x_hi, lo, hi,
                     two_sided_bounds(q), approximate)


def _safe_quantile(model, u):
    # the normal quantile is infinite at the endpoints; the bands never touch them
    # for c_alpha > 0, but guard anyway
    out = np.full(u.shape, np.nan)
    inner = (u > 0) & (u < 1)
    out[inner] = model.quantile(u[inner])
    if model.kind == "standard-normal":
        out[u <= 0] = -np.inf
        out[u >= 1] = np.inf
    else:
        out[~inner] = model.quantile(u[~inner])
    return out


def inside_bands(sample: SortedUniformSample | np.ndarray, table: BandTable):
    """True where every order statistic lies strictly inside the u-bands.

    Accepts a single sample or an array of samples along the last axis.
    """
    u = sample.values if isinstance(sample, SortedUniformSample) else np.asarray(sample)
    return np.all((u > table.u_lower) & (u < table.u_upper), axis=-1)
