"""Paired t-test with a self-contained Student-t tail probability.

The two-tailed p-value is the regularized incomplete beta
I_x(df/2, 1/2) at x = df / (df + t^2), evaluated with the Lentz continued
fraction to absolute tolerance 1e-15, so the package carries no statistics
dependency on its decision path.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "TTestResult",
    "paired_ttest",
    "regularized_incomplete_beta",
    "student_t_two_tailed_p",
]

_CF_TOL = 1e-15
_CF_MAX_ITER = 500
_CF_TINY = 1e-300


@dataclass(frozen=True)
class TTestResult:
    """t statistic, degrees of freedom, and the two-tailed p-value.

    ``degenerate`` marks the zero-variance-differences case, where the
    statistic is infinite and p is reported as exactly 0.
    """

    t: float
    df: int
    p: float
    degenerate: bool = False

    def to_dict(self) -> dict:
        return {"t": self.t, "df": self.df, "p": self.p, "degenerate": self.degenerate}


def _beta_continued_fraction(a: float, b: float, x: float) -> float:
    """Lentz evaluation of the incomplete beta continued fraction."""
    qab = a + b
    qap = a + 1.0
    qam = a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    if abs(d) < _CF_TINY:
        d = _CF_TINY
    d = 1.0 / d
    h = d
    for m in range(1, _CF_MAX_ITER + 1):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        if abs(d) < _CF_TINY:
            d = _CF_TINY
        c = 1.0 + aa / c
        if abs(c) < _CF_TINY:
            c = _CF_TINY
        d = 1.0 / d
        h *= d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        if abs(d) < _CF_TINY:
            d = _CF_TINY
        c = 1.0 + aa / c
        if abs(c) < _CF_TINY:
            c = _CF_TINY
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < _CF_TOL:
            return h
    raise RuntimeError("incomplete beta continued fraction did not converge")


def regularized_incomplete_beta(a: float, b: float, x: float) -> float:
    """I_x(a, b) for a, b > 0 and x in [0, 1]."""
    if a <= 0 or b <= 0:
        raise ValueError("shape parameters must be positive")
    if x < 0 or x > 1:
        raise ValueError("x must lie in [0, 1]")
    if x == 0.0:
        return 0.0
    if x == 1.0:
        return 1.0
    ln_front = (
        math.lgamma(a + b)
        - math.lgamma(a)
        - math.lgamma(b)
        + a * math.log(x)
        + b * math.log1p(-x)
    )
    front = math.exp(ln_front)
    # the continued fraction converges fast only below the distribution mean
    if x < (a + 1.0) / (a + b + 2.0):
        return front * _beta_continued_fraction(a, b, x) / a
    return 1.0 - front * _beta_continued_fraction(b, a, 1.0 - x) / b


def student_t_two_tailed_p(t: float, df: int) -> float:
    """P(|T| >= |t|) for a Student-t variable with df degrees of freedom."""
    if df < 1:
        raise ValueError("degrees of freedom must be >= 1")
    if not math.isfinite(t):
        return 0.0
    x = df / (df + t * t)
    return regularized_incomplete_beta(df / 2.0, 0.5, x)


def paired_ttest(a, b) -> TTestResult:
    """Two-tailed paired t-test of two equal-length measurement lists.

    The statistic is mean(d) / (sd(d) / sqrt(n)) over the differences
    d = a - b with the sample (n-1) standard deviation. Identical inputs
    give t = 0, p = 1; zero-variance differences with a nonzero mean give
    an infinite statistic, p = 0, and the ``degenerate`` flag.
    """
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape or a.ndim != 1:
        raise ValueError("inputs must be equal-length 1-D sequences")
    n = a.size
    if n < 2:
        raise ValueError("paired t-test needs at least two pairs")
    d = a - b
    mean = d.mean()
    sd = d.std(ddof=1)
    df = n - 1
    if sd == 0.0:
        if mean == 0.0:
            return TTestResult(t=0.0, df=df, p=1.0)
        return TTestResult(t=math.copysign(math.inf, mean), df=df, p=0.0, degenerate=True)
    t = float(mean / (sd / math.sqrt(n)))
    return TTestResult(t=t, df=df, p=student_t_two_tailed_p(t, df))
