"""t-tests, Student-t tail probabilities and Bonferroni correction."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

CF_TOL = 1e-12
CF_MAX_ITER = 300
_TINY = 1e-300


class DegenerateSampleError(ValueError):
    """The sample has zero variance, so the t statistic is undefined."""


@dataclass(frozen=True)
class TestResult:
    kind: str  # "one_sample" | "paired"
    t_stat: float
    df: int
    p_value: float
    n: int
    mean_effect: float

    __test__ = False  # keep pytest from collecting this class


@dataclass(frozen=True)
class CorrectionPlan:
    alpha: float
    m: int

    def __post_init__(self):
        if not 0.0 < self.alpha < 1.0:
            raise ValueError(f"alpha must be in (0, 1), got {self.alpha}")
        if self.m < 1:
            raise ValueError(f"hypothesis count must be >= 1, got {self.m}")

    @property
    def adjusted_alpha(self) -> float:
        return self.alpha / self.m

    @property
    def fwer_uncorrected(self) -> float:
        """Chance of at least one false rejection across m independent tests at alpha."""
        return 1.0 - (1.0 - self.alpha) ** self.m


def _betacf(a: float, b: float, x: float) -> float:
    # modified Lentz evaluation of the incomplete beta continued fraction
    qab, qap, qam = a + b, a + 1.0, a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    if abs(d) < _TINY:
        d = _TINY
    d = 1.0 / d
    h = d
    for m in range(1, CF_MAX_ITER + 1):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        if abs(d) < _TINY:
            d = _TINY
        c = 1.0 + aa / c
        if abs(c) < _TINY:
            c = _TINY
        d = 1.0 / d
        h *= d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        if abs(d) < _TINY:
            d = _TINY
        c = 1.0 + aa / c
        if abs(c) < _TINY:
            c = _TINY
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < CF_TOL:
            return h
    raise ArithmeticError(f"incomplete beta continued fraction did not converge (a={a}, b={b}, x={x})")


def betainc(a: float, b: float, x: float) -> float:
    """Regularized incomplete beta function I_x(a, b)."""
    if not 0.0 <= x <= 1.0:
        raise ValueError(f"x must be in [0, 1], got {x}")
    if x == 0.0 or x == 1.0:
        return x
    log_front = (
        math.lgamma(a + b) - math.lgamma(a) - math.lgamma(b) + a * math.log(x) + b * math.log1p(-x)
    )
    front = math.exp(log_front)
    if x < (a + 1.0) / (a + b + 2.0):
        return front * _betacf(a, b, x) / a
    return 1.0 - front * _betacf(b, a, 1.0 - x) / b


def t_two_tailed_p(t: float, df: int) -> float:
    if df < 1:
        raise ValueError(f"df must be >= 1, got {df}")
    if t == 0.0:
        return 1.0
    x = df / (df + t * t)
    return min(1.0, max(0.0, betainc(df / 2.0, 0.5, x)))


def _mean_sd(xs: Sequence[float]) -> tuple[float, float]:
    n = len(xs)
    mean = math.fsum(xs) / n
    ss = math.fsum((x - mean) ** 2 for x in xs)
    return mean, math.sqrt(ss / (n - 1))


def one_sample_ttest(xs: Sequence[float], mu0: float = 0.0) -> TestResult:
    return _one_sample(xs, mu0, "one_sample")


def _one_sample(xs: Sequence[float], mu0: float, kind: str) -> TestResult:
    n = len(xs)
    if n < 2:
        raise ValueError(f"t-test needs at least 2 observations, got {n}")
    mean, sd = _mean_sd(xs)
    if sd == 0.0:
        raise DegenerateSampleError("degenerate sample (zero variance)")
    t = (mean - mu0) / (sd / math.sqrt(n))
    return TestResult(kind, t, n - 1, t_two_tailed_p(t, n - 1), n, mean - mu0)


def paired_ttest(xs: Sequence[float], ys: Sequence[float]) -> TestResult:
    """Two-tailed paired test on ``xs - ys``; callers supply matched ordering."""
    if len(xs) != len(ys):
        raise ValueError(f"length mismatch: {len(xs)} vs {len(ys)}")
    return _one_sample([x - y for x, y in zip(xs, ys)], 0.0, "paired")


def bonferroni(alpha: float, m: int) -> CorrectionPlan:
    return CorrectionPlan(alpha, m)


def verdict(p: float, plan: CorrectionPlan) -> tuple[bool, bool]:
    """(raw_significant, corrected_significant); rejection uses ``p <= threshold``."""
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"p must be in [0, 1], got {p}")
    return p <= plan.alpha, p <= plan.adjusted_alpha
