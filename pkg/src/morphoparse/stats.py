"""Significance tests for model comparisons.

Two tests are provided, both two-sided: the Wilcoxon signed-rank test for
paired score sequences (per-fold or per-repeat metrics) and the pooled
two-proportion Z-test for accuracy-style scores on a fixed test set.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import product


class StatsError(ValueError):
    pass


@dataclass
class PairedSample:
    scores_a: list[float]
    scores_b: list[float]

    def __post_init__(self):
        if len(self.scores_a) != len(self.scores_b):
            raise StatsError("paired samples must have equal length")
        if len(self.scores_a) < 1:
            raise StatsError("paired samples must be non-empty")

    def differences(self) -> list[float]:
        return [a - b for a, b in zip(self.scores_a, self.scores_b)]


@dataclass
class TestResult:
    statistic: float
    p_value: float
    reject_at: float

    @property
    def reject(self) -> bool:
        return self.p_value < self.reject_at


def normal_cdf(x: float) -> float:
    """Standard normal CDF through the C library's erfc; the double
    rounding keeps the absolute error well under 1e-15."""
    return 0.5 * math.erfc(-x / math.sqrt(2.0))


def _average_ranks(values: list[float]) -> list[float]:
    """Ranks starting at 1; tied values share the average of their ranks."""
    order = sorted(range(len(values)), key=lambda i: values[i])
    ranks = [0.0] * len(values)
    i = 0
    while i < len(order):
        j = i
        while j + 1 < len(order) and values[order[j + 1]] == values[order[i]]:
            j += 1
        avg = (i + j) / 2 + 1
        for k in range(i, j + 1):
            ranks[order[k]] = avg
        i = j + 1
    return ranks


EXACT_LIMIT = 12


def wilcoxon_signed_rank(sample: PairedSample, alpha: float = 0.01,
                         mode: str = "auto") -> TestResult:
    """Two-sided Wilcoxon signed-rank test.

    Zero differences are dropped; tied absolute differences get average
    ranks.  The reported statistic is the signed rank sum (positive minus
    negative rank mass), so swapping the samples negates it.  The p-value
    comes from full enumeration of the 2^n sign assignments for n <= 12
    and from the normal approximation with continuity correction
    otherwise.
    """
    diffs = [d for d in sample.differences() if d != 0.0]
    n = len(diffs)
    if n == 0:
        return TestResult(statistic=0.0, p_value=1.0, reject_at=alpha)
    ranks = _average_ranks([abs(d) for d in diffs])
    w_plus = sum(r for d, r in zip(diffs, ranks) if d > 0)
    w_minus = sum(r for d, r in zip(diffs, ranks) if d < 0)
    statistic = w_plus - w_minus

    if mode not in ("auto", "exact", "asymptotic"):
        raise StatsError(f"unknown mode {mode!r}")
    exact = mode == "exact" or (mode == "auto" and n <= EXACT_LIMIT)
    if not exact and n < 5:
        raise StatsError("asymptotic mode needs at least 5 nonzero differences")

    if exact:
        observed = abs(statistic)
        hits = 0
        for signs in product((1.0, -1.0), repeat=n):
            t = sum(s * r for s, r in zip(signs, ranks))
            if abs(t) >= observed:
                hits += 1
        p = hits / (1 << n)
    else:
        mu = n * (n + 1) / 4.0
        var = n * (n + 1) * (2 * n + 1) / 24.0
        # tie correction over groups of equal absolute difference
        groups: dict[float, int] = {}
        for d in diffs:
            groups[abs(d)] = groups.get(abs(d), 0) + 1
        var -= sum(t ** 3 - t for t in groups.values()) / 48.0
        if var <= 0:
            return TestResult(statistic=statistic, p_value=1.0, reject_at=alpha)
        dev = w_plus - mu
        cc = 0.5 * (1 if dev > 0 else -1 if dev < 0 else 0)
        z = (dev - cc) / math.sqrt(var)
        p = 2.0 * (1.0 - normal_cdf(abs(z)))
        p = min(1.0, max(0.0, p))
    return TestResult(statistic=statistic, p_value=p, reject_at=alpha)


def two_proportion_ztest(x1: int, n1: int, x2: int, n2: int,
                         alpha: float = 0.01) -> TestResult:
    """Pooled two-proportion Z-test of the null that both proportions are
    equal; two-sided."""
    for x, n in ((x1, n1), (x2, n2)):
        if n < 1:
            raise StatsError("sample sizes must be at least 1")
        if not 0 <= x <= n:
            raise StatsError(f"successes {x} out of range 0..{n}")
    p1, p2 = x1 / n1, x2 / n2
    pooled = (x1 + x2) / (n1 + n2)
    if pooled in (0.0, 1.0):
        if p1 != p2:
            raise StatsError("degenerate pooled proportion with unequal rates")
        return TestResult(statistic=0.0, p_value=1.0, reject_at=alpha)
    se = math.sqrt(pooled * (1.0 - pooled) * (1.0 / n1 + 1.0 / n2))
    z = (p1 - p2) / se
    p = 2.0 * (1.0 - normal_cdf(abs(z)))
    return TestResult(statistic=z, p_value=min(1.0, max(0.0, p)), reject_at=alpha)
