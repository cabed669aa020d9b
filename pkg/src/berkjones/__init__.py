"""Exact Berk-Jones goodness-of-fit statistics and O(n^2) one-sided p-values."""

from .engine import (
    BoundaryVector,
    PrecisionError,
    PValueResult,
    boundary_for,
    crossing_probability,
    find_threshold,
    one_sided_pvalue,
    two_sided_pvalue,
)
from .stats import (
    NullModel,
    SortedUniformSample,
    StatisticKind,
    mn_statistics,
    order_pvalues,
    transform,
)

__version__ = "0.1.0"
