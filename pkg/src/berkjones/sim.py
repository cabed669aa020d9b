"""Monte-Carlo power studies: Gaussian shift/scale alternatives, rare-weak
mixtures, ROC curves and winner maps over the (mu, epsilon) plane.

Every test is reduced to a score where larger means stronger evidence
against the standard normal null.  One-sided tests (``mn_plus``,
``ks_plus``, ``hc2004``, ``hc2008``, ``sum``, ``max``) look for an excess of
large observations, so their uniforms are ``1 - Phi(x)``; the two-sided tests
use ``Phi(x)``.

Random streams are derived from ``SeedSequence(seed, spawn_key=...)`` with a
fixed key per purpose and per grid cell, so results do not depend on how the
work is split between processes.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Sequence

import numpy as np
from scipy import special as sc

from . import stats
from .engine import find_threshold

__all__ = [
    "MixtureSpec",
    "GaussianAlternative",
    "SweepGrid",
    "PowerResult",
    "WinnerCell",
    "TESTS",
    "sample_mixture",
    "lr_statistic",
    "test_scores",
    "rejection_threshold",
    "power_estimate",
    "power_curve",
    "roc_curve",
    "tpr_at",
    "winner_map",
    "label_winner",
    "detection_boundary",
    "first_order_tail_probability",
    "hc_first_index_deviation",
    "consistency_threshold",
]

BATCH = 2000
NULL_KEY = 0
ALT_KEY = 1


# -- alternatives ---------------------------------------------------------------

@dataclass(frozen=True)
class MixtureSpec:
    """``(1 - epsilon) N(0, 1) + epsilon N(mu, 1)`` with ``n`` observations."""

    epsilon: float
    mu: float
    n: int

    def __post_init__(self):
        if not 0 <= self.epsilon <= 1:
            raise ValueError("epsilon must lie in [0, 1]")
        if self.n < 1:
            raise ValueError("n must be positive")

    @classmethod
    def from_scaling(cls, n: int, beta: float, r: float) -> "MixtureSpec":
        """``epsilon = n^-beta``, ``mu = sqrt(2 r log n)``."""
        return cls(n ** -beta, math.sqrt(2 * r * math.log(n)), n)

    def sample(self, rng: np.random.Generator, size: int | None = None) -> np.ndarray:
        shape = (self.n,) if size is None else (size, self.n)
        x = rng.standard_normal(shape)
        if self.epsilon > 0:
            x += self.mu * (rng.random(shape) < self.epsilon)
        return x


@dataclass(frozen=True)
class GaussianAlternative:
    """``N(mu, sigma^2)`` observations."""

    mu: float = 0.0
    sigma: float = 1.0
    n: int = 100

    def sample(self, rng: np.random.Generator, size: int | None = None) -> np.ndarray:
        shape = (self.n,) if size is None else (size, self.n)
        return self.mu + self.sigma * rng.standard_normal(shape)


def sample_mixture(spec: MixtureSpec, seed=None) -> np.ndarray:
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    return spec.sample(rng)


def lr_statistic(x, spec: MixtureSpec):
    """Log-likelihood ratio of the known mixture against N(0, 1), summed over the last axis."""
    if not 0 < spec.epsilon < 1:
        raise ValueError("the likelihood ratio needs 0 < epsilon < 1")
    x = np.asarray(x, dtype=float)
    z = spec.mu * x - 0.5 * spec.mu ** 2
    return np.logaddexp(math.log1p(-spec.epsilon), math.log(spec.epsilon) + z).sum(axis=-1)


# -- tests ----------------------------------------------------------------------

def _upper_uniforms(x):
    # 1 - Phi(x), sorted: small values flag large observations
    return np.sort(sc.ndtr(-x), axis=-1)


def _uniforms(x):
    return np.sort(sc.ndtr(x), axis=-1)


@dataclass(frozen=True)
class _Test:
    score: Callable
    calibration: str  # "exact", "analytic" or "mc"
    kind: str | None = None


TESTS: dict[str, _Test] = {
    "mn": _Test(lambda x, s: -stats.mn_values(_uniforms(x)), "mc"),
    "ks": _Test(lambda x, s: stats.ks_values(_uniforms(x)), "mc"),
    "ad": _Test(lambda x, s: stats.ad_values(np.clip(_uniforms(x), 1e-300, 1 - 1e-16)), "mc"),
    "ad_sup": _Test(lambda x, s: stats.adsup_values(_uniforms(x)), "mc"),
    "mn_plus": _Test(lambda x, s: -stats.mn_plus_values(_upper_uniforms(x)), "exact", "mn_plus"),
    "ks_plus": _Test(lambda x, s: stats.ks_plus_values(_upper_uniforms(x)), "exact", "ks_plus"),
    "hc2004": _Test(lambda x, s: stats.hc_values(_upper_uniforms(x), "hc2004"), "exact", "hc2004"),
    "hc2008": _Test(lambda x, s: stats.hc_values(_upper_uniforms(x), "hc2008"), "exact", "hc2008"),
    "sum": _Test(lambda x, s: x.sum(axis=-1), "analytic"),
    "max": _Test(lambda x, s: x.max(axis=-1), "analytic"),
    "lr": _Test(lambda x, s: lr_statistic(x, s), "mc"),
}

TEST_LABELS = {"sum": "sum", "max": "max", "mn_plus": "M_n+", "hc2004": "HC2004",
               "hc2008": "HC2008", "mn": "M_n", "ks": "KS", "ad": "AD", "ad_sup": "AD_sup",
               "ks_plus": "KS+", "lr": "LR"}


def _get_test(name) -> _Test:
    try:
        return TESTS[name]
    except KeyError:
        raise ValueError(f"unknown test {name!r}; expected one of {sorted(TESTS)}") from None


def test_scores(name: str, x, spec=None):
    """Scores of test ``name`` for each sample along the last axis of ``x``."""
    return _get_test(name).score(np.asarray(x, dtype=float), spec)


def _rng(seed, *key) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=tuple(key)))


def _scores_many(names, sampler, reps, rng, spec):
    out = {name: np.empty(reps) for name in names}
    for start in range(0, reps, BATCH):
        stop = min(start + BATCH, reps)
        x = sampler.sample(rng, stop - start)
        for name in names:
            out[name][start:stop] = test_scores(name, x, spec)
    return out


@lru_cache(maxsize=256)
def _exact_threshold(kind: str, n: int, alpha: float) -> float:
    c = find_threshold(kind, n, alpha)
    return -c if kind.startswith("mn") else c


def _analytic_threshold(name, n, alpha):
    if name == "sum":
        return math.sqrt(n) * float(sc.ndtri(1 - alpha))
    return float(sc.ndtri((1 - alpha) ** (1.0 / n)))


def _mc_threshold(null_scores, alpha):
    # smallest value exceeded by at most a fraction alpha of null scores
    s = np.sort(null_scores)
    k = int(math.ceil((1 - alpha) * s.size)) - 1
    return float(s[min(max(k, 0), s.size - 1)])


def rejection_threshold(name: str, n: int, alpha: float, *, null_scores=None) -> float:
    """Score threshold; the test rejects when ``score > threshold``."""
    t = _get_test(name)
    if t.calibration == "exact":
        c = _exact_threshold(t.kind, n, alpha)
        # M_n+ rejects at M < c; HC/KS reject at stat >= c
        return c if t.kind.startswith("mn") else np.nextafter(c, -np.inf)
    if t.calibration == "analytic":
        return _analytic_threshold(name, n, alpha)
    if null_scores is None:
        raise ValueError(f"test {name!r} needs null Monte-Carlo scores for calibration")
    return _mc_threshold(null_scores, alpha)


def calibrate(names: Sequence[str], n: int, alpha: float, null_reps: int, seed,
              spec=None) -> dict[str, float]:
    """Thresholds for several tests sharing one null sample."""
    mc = [name for name in names if _get_test(name).calibration == "mc"]
    null = {}
    if mc:
        null = _scores_many(mc, GaussianAlternative(0.0, 1.0, n), null_reps,
                            _rng(seed, NULL_KEY), spec)
    return {name: rejection_threshold(name, n, alpha, null_scores=null.get(name))
            for name in names}


# -- power ------------------------------------------------------------------------

@dataclass(frozen=True)
class PowerResult:
    test: str
    power: float
    se: float
    reps: int
    threshold: float
    param: float | None = None

    @property
    def misdetection(self) -> float:
        return 1.0 - self.power


def _power_results(names, thresholds, alt, reps, rng, param=None):
    scores = _scores_many(names, alt, reps, rng, alt)
    out = {}
    for name in names:
        p = float(np.mean(scores[name] > thresholds[name]))
        out[name] = PowerResult(name, p, math.sqrt(p * (1 - p) / reps), reps,
                                thresholds[name], param)
    return out


def _check_reps(reps, minimum):
    if reps < minimum:
        raise ValueError(f"need at least {minimum} replicates, got {reps}")


def power_estimate(test: str, alternative, alpha: float, reps: int, seed,
                   null_reps: int | None = None) -> PowerResult:
    """Rejection frequency of ``test`` under ``alternative`` at level ``alpha``.

    Thresholds come from the exact engine (one-sided Berk-Jones, KS+ and HC),
    closed forms (sum, max) or ``null_reps >= 10 * reps`` null replicates.
    """
    _check_reps(reps, 100)
    null_reps = 10 * reps if null_reps is None else max(null_reps, 10 * reps)
    thr = calibrate([test], alternative.n, alpha, null_reps, seed, alternative)
    return _power_results([test], thr, alternative, reps, _rng(seed, ALT_KEY, 0))[test]


def power_curve(tests: Sequence[str], alternatives: Sequence, params: Sequence[float],
                alpha: float, reps: int, seed, null_reps: int | None = None):
    """Power of several tests over a family of alternatives sharing ``n``.

    All tests see the same simulated data at each parameter value.  Returns a
    list of :class:`PowerResult`, ordered by parameter then test.
    """
    _check_reps(reps, 100)
    n = alternatives[0].n
    if any(a.n != n for a in alternatives):
        raise ValueError("all alternatives must share the same n")
    null_reps = 10 * reps if null_reps is None else max(null_reps, 10 * reps)
    spec = alternatives[0] if isinstance(alternatives[0], MixtureSpec) else None
    if "lr" in tests and len({(a.epsilon, a.mu) for a in alternatives}) > 1:
        raise ValueError("the likelihood ratio is calibrated for a single mixture")
    thr = calibrate(tests, n, alpha, null_reps, seed, spec)
    results = []
    for idx, (alt, param) in enumerate(zip(alternatives, params)):
        res = _power_results(tests, thr, alt, reps, _rng(seed, ALT_KEY, idx), param)
        results.extend(res[name] for name in tests)
    return results


# -- ROC --------------------------------------------------------------------------

def _roc(null_scores, alt_scores):
    null_scores = np.asarray(null_scores, dtype=float)
    alt_scores = np.asarray(alt_scores, dtype=float)
    levels = np.unique(np.concatenate([null_scores, alt_scores]))[::-1]
    null_sorted = np.sort(null_scores)
    alt_sorted = np.sort(alt_scores)
    fpr = 1.0 - np.searchsorted(null_sorted, levels, side="left") / null_sorted.size
    tpr = 1.0 - np.searchsorted(alt_sorted, levels, side="left") / alt_sorted.size
    fpr = np.concatenate([[0.0], fpr, [1.0]])
    tpr = np.concatenate([[0.0], tpr, [1.0]])
    return fpr, tpr


def roc_curve(tests: Sequence[str], spec, reps: int, seed) -> dict[str, tuple[np.ndarray, np.ndarray]]:
    """Empirical ROC curves from ``reps`` null and ``reps`` alternative samples.

    Each curve is a staircase of (false positive rate, true positive rate)
    points running from (0, 0) to (1, 1).
    """
    _check_reps(reps, 1000)
    null = _scores_many(tests, GaussianAlternative(0.0, 1.0, spec.n), reps,
                        _rng(seed, NULL_KEY), spec)
    alt = _scores_many(tests, spec, reps, _rng(seed, ALT_KEY, 0), spec)
    return {name: _roc(null[name], alt[name]) for name in tests}


def tpr_at(fpr, tpr, level: float) -> float:
    """Largest true positive rate reachable with false positive rate <= level."""
    fpr = np.asarray(fpr)
    ok = fpr <= level + 1e-12
    return float(np.max(np.asarray(tpr)[ok]))


# -- winner maps --------------------------------------------------------------------

@dataclass(frozen=True)
class SweepGrid:
    eps: tuple
    mu: tuple
    reps: int = 2000
    alpha: float = 0.05
    seed: int = 0

    def __post_init__(self):
        if self.reps < 1:
            raise ValueError("reps must be positive")
        if not 0 < self.alpha < 1:
            raise ValueError("alpha must lie in (0, 1)")

    @classmethod
    def from_scaling(cls, n: int, betas, rs, **kw) -> "SweepGrid":
        return cls(tuple(float(n ** -b) for b in betas),
                   tuple(math.sqrt(2 * r * math.log(n)) for r in rs), **kw)

    def cells(self):
        return [(e, m) for e in self.eps for m in self.mu]


@dataclass(frozen=True)
class WinnerCell:
    epsilon: float
    mu: float
    results: dict = field(repr=False)
    winner: str | None
    ratio: float
    strong: bool
    band_flag: bool

    @property
    def misdetection(self) -> dict[str, float]:
        return {k: r.misdetection for k, r in self.results.items()}


def label_winner(misdetection: dict[str, float], clear: float = 1.1, strong: float = 1.5):
    """``(winner, ratio, strong, band_flag)`` from per-test misdetection rates.

    A test wins when every other test misses at least ``clear`` times as often.
    """
    names = sorted(misdetection, key=lambda k: misdetection[k])
    best, second = names[0], names[1]
    m1, m2 = misdetection[best], misdetection[second]
    if m1 == 0:
        ratio = math.inf if m2 > 0 else 1.0
    else:
        ratio = m2 / m1
    winner = best if ratio > clear else None
    band = 0.001 <= m1 <= 0.8
    return winner, ratio, bool(winner is not None and ratio > strong), band


def _winner_cell(args):
    idx, eps, mu, n, tests, thresholds, reps, seed = args
    spec = MixtureSpec(eps, mu, n)
    res = _power_results(tests, thresholds, spec, reps, _rng(seed, ALT_KEY, idx))
    winner, ratio, strong, band = label_winner({k: r.misdetection for k, r in res.items()})
    return WinnerCell(eps, mu, res, winner, ratio, strong, band)


def winner_map(grid: SweepGrid, n: int, tests: Sequence[str] = ("sum", "max", "hc2004", "mn_plus"),
               workers: int = 1) -> list[WinnerCell]:
    """Misdetection rates and winner labels over a (mu, epsilon) grid.

    Cells are independent and seeded by their position in ``grid.cells()``;
    the output order is that same order whatever the worker count.
    """
    if "lr" in tests:
        raise ValueError("the likelihood ratio differs per cell and is not part of winner maps")
    thresholds = calibrate(tests, n, grid.alpha, 10 * grid.reps, grid.seed)
    jobs = [(i, e, m, n, tuple(tests), thresholds, grid.reps, grid.seed)
            for i, (e, m) in enumerate(grid.cells())]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as ex:
            return list(ex.map(_winner_cell, jobs))
    return [_winner_cell(j) for j in jobs]


# -- closed-form helpers -------------------------------------------------------------

def detection_boundary(beta: float) -> float:
    """Minimal detectable ``r`` for the rare-weak Gaussian mixture at sparsity ``beta``."""
    if not 0.5 < beta < 1:
        raise ValueError("beta must lie in (0.5, 1)")
    if beta <= 0.75:
        return beta - 0.5
    return (1 - math.sqrt(1 - beta)) ** 2


def first_order_tail_probability(n: int, c: float) -> float:
    """``P[U_(1) < 1 / (c n log log n)]`` under the null, i.e. ``1 - (1 - x)^n``."""
    x = 1.0 / (c * n * math.log(math.log(n)))
    return -math.expm1(n * math.log1p(-x))


def hc_first_index_deviation(n: int, c: float, exact: bool = False) -> float:
    """HC term at the first index when ``u_(1) = 1 / (c n log log n)``.

    The default returns its leading-order size ``sqrt(c log log n)``; with
    ``exact=True`` the HC2004 term itself is evaluated.
    """
    lln = math.log(math.log(n))
    if not exact:
        return math.sqrt(c * lln)
    u = 1.0 / (c * n * lln)
    return math.sqrt(n) * (1.0 / n - u) / math.sqrt(u * (1 - u))


def consistency_threshold(n: int, eps: float) -> float:
    """``1 / (log n (log log n)^(1 + eps))``: a level-free M_n cutoff that
    separates null and detectable sparse mixtures as n grows.  Not calibrated
    for any finite n."""
    ln = math.log(n)
    return 1.0 / (ln * math.log(ln) ** (1 + eps))
