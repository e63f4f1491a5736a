"""Paired t-test and bootstrap averaging over matched samples.

The t survival function is computed here via the regularized incomplete beta
function (continued-fraction evaluation) so the whole harness runs without a
statistics dependency; the test suite cross-checks it against an independent
reference implementation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from ..errors import DegenerateVariance, LengthMismatch


@dataclass(frozen=True)
class TTestResult:
    statistic: float
    pvalue: float
    df: int


@dataclass(frozen=True)
class BootstrapResult:
    mean_statistic: float
    mean_pvalue: float
    iterations: int
    sample_size: int


def _betacf(a: float, b: float, x: float) -> float:
    """Continued fraction for the incomplete beta function (Lentz's method)."""
    max_iter = 300
    eps = 3e-16
    fpmin = 1e-300
    qab = a + b
    qap = a + 1.0
    qam = a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    if abs(d) < fpmin:
        d = fpmin
    d = 1.0 / d
    h = d
    for m in range(1, max_iter + 1):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        if abs(d) < fpmin:
            d = fpmin
        c = 1.0 + aa / c
        if abs(c) < fpmin:
            c = fpmin
        d = 1.0 / d
        h *= d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        if abs(d) < fpmin:
            d = fpmin
        c = 1.0 + aa / c
        if abs(c) < fpmin:
            c = fpmin
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < eps:
            return h
    raise RuntimeError("incomplete beta continued fraction did not converge")


def regularized_incomplete_beta(a: float, b: float, x: float) -> float:
    """I_x(a, b) for a, b > 0 and x in [0, 1]."""
    if not 0.0 <= x <= 1.0:
        raise ValueError("x must lie in [0, 1]")
    if x == 0.0 or x == 1.0:
        return x
    ln_front = (
        math.lgamma(a + b) - math.lgamma(a) - math.lgamma(b)
        + a * math.log(x) + b * math.log1p(-x)
    )
    front = math.exp(ln_front)
    # Use the continued fraction on whichever side converges fast.
    if x < (a + 1.0) / (a + b + 2.0):
        return front * _betacf(a, b, x) / a
    return 1.0 - front * _betacf(b, a, 1.0 - x) / b


def t_sf(t: float, df: int) -> float:
    """Survival function P(T > t) of Student's t with ``df`` degrees of freedom."""
    if df < 1:
        raise ValueError("degrees of freedom must be >= 1")
    x = df / (df + t * t)
    tail = 0.5 * regularized_incomplete_beta(df / 2.0, 0.5, x)
    return tail if t >= 0 else 1.0 - tail


def paired_t_test(a: Sequence[float], b: Sequence[float]) -> TTestResult:
    """Two-sided paired t-test on matched samples.

    Raises LengthMismatch when the samples are not matched and
    DegenerateVariance when every difference is identical.
    """
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape or a.ndim != 1:
        raise LengthMismatch(f"samples must be matched 1-d lists, got {a.shape} and {b.shape}")
    n = a.size
    if n < 2:
        raise LengthMismatch("need at least two matched pairs")
    d = a - b
    sd = float(d.std(ddof=1))
    if sd == 0.0:
        raise DegenerateVariance("all paired differences are identical")
    t = float(d.mean()) / (sd / math.sqrt(n))
    p = 2.0 * t_sf(abs(t), n - 1)
    return TTestResult(statistic=t, pvalue=min(p, 1.0), df=n - 1)


def bootstrap_t(
    a: Sequence[float],
    b: Sequence[float],
    fraction: float = 0.8,
    iterations: int = 1000,
    seed: int | None = None,
) -> BootstrapResult:
    """Average t and p over repeated subsample t-tests.

    Each iteration draws ``floor(fraction * n)`` matched index pairs without
    replacement (indices kept in order so a full-fraction draw reproduces the
    plain test bit for bit) and runs the paired t-test; the statistics and
    p-values are averaged over iterations. Per-iteration generators are
    spawned from the seed, so results are reproducible and iterations are
    independent.
    """
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape or a.ndim != 1:
        raise LengthMismatch(f"samples must be matched 1-d lists, got {a.shape} and {b.shape}")
    if iterations < 1:
        raise ValueError("iterations must be >= 1")
    if not 0.0 < fraction <= 1.0:
        raise ValueError("fraction must lie in (0, 1]")
    n = a.size
    m = int(math.floor(fraction * n))
    if m < 2:
        raise LengthMismatch(f"subsample of {m} pairs is too small for a t-test")
    streams = np.random.SeedSequence(seed).spawn(iterations)
    t_values = np.empty(iterations)
    p_values = np.empty(iterations)
    for i, stream in enumerate(streams):
        rng = np.random.default_rng(stream)
        idx = np.sort(rng.choice(n, size=m, replace=False))
        result = paired_t_test(a[idx], b[idx])
        t_values[i] = result.statistic
        p_values[i] = result.pvalue
    return BootstrapResult(
        mean_statistic=float(t_values.mean()),
        mean_pvalue=float(p_values.mean()),
        iterations=iterations,
        sample_size=m,
    )
