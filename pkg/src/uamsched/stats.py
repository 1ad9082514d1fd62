"""Paired comparison statistics for per-scenario profit deltas."""

from __future__ import annotations

import math
from dataclasses import dataclass

from scipy import stats as _sps


@dataclass(frozen=True)
class TTestResult:
    t: float
    p: float
    dof: int
    mean: float
    std: float
    degenerate: bool = False


def paired_t_test(deltas: list[float]) -> TTestResult:
    """Two-sided paired t-test on per-scenario differences.

    The null hypothesis is zero mean difference. Zero-variance inputs are
    flagged degenerate (t and p are NaN) rather than divided through.
    """
    n = len(deltas)
    if n < 2:
        raise ValueError("need at least two paired differences")
    mean = sum(deltas) / n
    var = sum((d - mean) ** 2 for d in deltas) / (n - 1)
    std = math.sqrt(var)
    if std == 0.0:
        return TTestResult(t=math.nan, p=math.nan, dof=n - 1,
                           mean=mean, std=0.0, degenerate=True)
    t = mean / (std / math.sqrt(n))
    p = 2.0 * float(_sps.t.sf(abs(t), n - 1))
    return TTestResult(t=t, p=p, dof=n - 1, mean=mean, std=std)


def mean_std(values: list[float]) -> tuple[float, float]:
    """Sample mean and (n-1) standard deviation; std is 0 for n < 2."""
    n = len(values)
    if n == 0:
        return 0.0, 0.0
    mean = sum(values) / n
    if n < 2:
        return mean, 0.0
    var = sum((v - mean) ** 2 for v in values) / (n - 1)
    return mean, math.sqrt(var)
