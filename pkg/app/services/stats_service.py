"""
Nonparametric statistics service.

Kruskal-Wallis H test over ordinal (e.g. Likert) responses, tie-corrected,
with asymptotic chi-square p-values.
"""

import logging
from collections.abc import Sequence

import numpy as np
from scipy import special, stats

from app.core.exceptions import ValidationError
from app.models.stats import KWResult

logger = logging.getLogger(__name__)


def rank_with_ties(values: Sequence[float]) -> list[float]:
    """Ranks 1..N; tied values share the mean of the ranks they span."""
    if len(values) == 0:
        raise ValidationError("values", list(values), "must not be empty")
    return stats.rankdata(np.asarray(values, dtype=float), method="average").tolist()


def chi_square_sf(x: float, df: int) -> float:
    """
    Upper-tail probability of the chi-square distribution.

    Computed as the regularized upper incomplete gamma function Q(df/2, x/2).

    Raises:
        ValidationError: If x is negative or df is not a positive integer
    """
    if x < 0:
        raise ValidationError("x", x, "must be >= 0")
    if df < 1:
        raise ValidationError("df", df, "must be a positive integer")
    return float(min(1.0, max(0.0, special.gammaincc(df / 2.0, x / 2.0))))


def kruskal_wallis(groups: Sequence[Sequence[float]]) -> KWResult:
    """
    Kruskal-Wallis H test.

    H = [12 / (N(N+1)) * sum(n_i * mean_rank_i^2) - 3(N+1)] / [1 - sum(t^3 - t) / (N^3 - N)]

    The tie correction is always applied. When every observation is identical
    the correction denominator vanishes and H is 0.

    Raises:
        ValidationError: With fewer than two groups, an empty group, or N < 3
    """
    if len(groups) < 2:
        raise ValidationError("groups", len(groups), "at least two groups are required")
    if any(len(g) == 0 for g in groups):
        raise ValidationError("groups", [len(g) for g in groups], "groups must not be empty")
    sizes = np.array([len(g) for g in groups])
    total = int(sizes.sum())
    if total < 3:
        raise ValidationError("groups", total, "at least three observations are required")

    pooled = np.concatenate([np.asarray(g, dtype=float) for g in groups])
    ranks = stats.rankdata(pooled)
    bounds = np.cumsum(sizes)[:-1]
    mean_ranks = np.array([r.mean() for r in np.split(ranks, bounds)])

    correction = stats.tiecorrect(ranks)
    if correction == 0:
        h = 0.0
    else:
        raw = 12.0 / (total * (total + 1)) * float(np.sum(sizes * mean_ranks**2)) - 3 * (
            total + 1
        )
        h = max(0.0, raw / correction)
    df = len(groups) - 1
    result = KWResult(
        h=h,
        df=df,
        p=chi_square_sf(h, df),
        n=tuple(int(s) for s in sizes),
        mean_ranks=tuple(float(r) for r in mean_ranks),
    )
    logger.debug(f"Kruskal-Wallis over {len(groups)} groups: H={result.h:.4f} p={result.p:.4g}")
    return result
