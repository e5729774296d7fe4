"""Accuracy, one-sample t-test against chance, and Student-t numerics.

The t CDF is evaluated through the regularized incomplete beta function
I_x(a, b) with x = df / (df + t^2), a = df/2, b = 1/2, using a modified
Lentz continued fraction.  No external stats library is involved, so the
test can itself be verified against an independent quadrature oracle.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateSample, EmptyInput, LengthMismatch

_LENTZ_TINY = 1e-300
_LENTZ_EPS = 1e-14
_LENTZ_MAX_ITER = 200


@dataclass(frozen=True)
class TestResult:
    n: int
    mean_accuracy: float
    chance: float
    t_statistic: float
    df: int
    p_value: float
    alpha_adjusted: float
    significant: bool
    two_sided: bool = False


def accuracy(predicted, actual) -> float:
    """Proportion of positions where the two label lists agree."""
    predicted = np.asarray(predicted)
    actual = np.asarray(actual)
    if predicted.shape != actual.shape:
        raise LengthMismatch(
            f"length {predicted.shape} vs {actual.shape}")
    if predicted.size == 0:
        raise EmptyInput("cannot score an empty prediction list")
    return float(np.mean(predicted == actual))


def _beta_cf(a: float, b: float, x: float) -> float:
    """Continued fraction for I_x(a,b), modified Lentz algorithm."""
    qab = a + b
    qap = a + 1.0
    qam = a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    if abs(d) < _LENTZ_TINY:
        d = _LENTZ_TINY
    d = 1.0 / d
    h = d
    for m in range(1, _LENTZ_MAX_ITER + 1):
        m2 = 2 * m
        # even step
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        if abs(d) < _LENTZ_TINY:
            d = _LENTZ_TINY
        c = 1.0 + aa / c
        if abs(c) < _LENTZ_TINY:
            c = _LENTZ_TINY
        d = 1.0 / d
        h *= d * c
        # odd step
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        if abs(d) < _LENTZ_TINY:
            d = _LENTZ_TINY
        c = 1.0 + aa / c
        if abs(c) < _LENTZ_TINY:
            c = _LENTZ_TINY
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < _LENTZ_EPS:
            break
    return h


def regularized_incomplete_beta(a: float, b: float, x: float) -> float:
    """I_x(a, b) for a, b > 0 and x in [0, 1]."""
    if x <= 0.0:
        return 0.0
    if x >= 1.0:
        return 1.0
    log_front = (math.lgamma(a + b) - math.lgamma(a) - math.lgamma(b)
                 + a * math.log(x) + b * math.log1p(-x))
    front = math.exp(log_front)
    # Use the symmetry transform where the continued fraction converges fast.
    if x < (a + 1.0) / (a + b + 2.0):
        return front * _beta_cf(a, b, x) / a
    return 1.0 - front * _beta_cf(b, a, 1.0 - x) / b


def t_cdf(t: float, df: int) -> float:
    """Student-t cumulative distribution function."""
    if df < 1:
        raise DegenerateSample(f"df must be >= 1, got {df}")
    if t == 0.0:
        return 0.5
    x = df / (df + t * t)
    tail = 0.5 * regularized_incomplete_beta(df / 2.0, 0.5, x)
    return 1.0 - tail if t > 0 else tail


def t_sf(t: float, df: int) -> float:
    """Upper tail P(T > t); computed directly to avoid cancellation."""
    if df < 1:
        raise DegenerateSample(f"df must be >= 1, got {df}")
    if t == 0.0:
        return 0.5
    x = df / (df + t * t)
    tail = 0.5 * regularized_incomplete_beta(df / 2.0, 0.5, x)
    return tail if t > 0 else 1.0 - tail


def _clamp_open_unit(p: float) -> float:
    tiny = math.ulp(0.0)
    return min(max(p, tiny), 1.0 - 1e-16)


def one_sample_ttest_greater(values, mu0: float) -> tuple[float, int, float]:
    """One-sided t-test of H1: mean(values) > mu0.

    Returns (t, df, p).  Raises DegenerateSample for n < 2 or zero sample
    variance: a t statistic is undefined there.
    """
    values = np.asarray(values, dtype=np.float64)
    n = values.size
    if n < 2:
        raise DegenerateSample(f"need at least 2 values, got {n}")
    s = float(values.std(ddof=1))
    if s == 0.0:
        raise DegenerateSample("zero sample standard deviation")
    t = (float(values.mean()) - mu0) / (s / math.sqrt(n))
    p = _clamp_open_unit(t_sf(t, n - 1))
    return t, n - 1, p


def one_sample_ttest_two_sided(values, mu0: float) -> tuple[float, int, float]:
    t, df, _ = one_sample_ttest_greater(values, mu0)
    p = _clamp_open_unit(2.0 * t_sf(abs(t), df))
    return t, df, p


def bonferroni(alpha: float, m: int) -> float:
    if not 0.0 < alpha < 1.0:
        raise DegenerateSample(f"alpha must be in (0,1), got {alpha}")
    if m < 1:
        raise DegenerateSample(f"m must be >= 1, got {m}")
    return alpha / m


def test_against_chance(values, chance: float, alpha_adjusted: float,
                        two_sided: bool = False) -> TestResult:
    """Full TestResult for a collection of fold accuracies.

    Unlike the raw t-test, a zero-variance sample is not an error here: a
    classifier scoring identically on every fold is a legitimate audit
    outcome (e.g. 100% accuracy under a maximal leak), treated as
    infinitely strong evidence in the direction of its mean.
    """
    values = np.asarray(values, dtype=np.float64)
    try:
        if two_sided:
            t, df, p = one_sample_ttest_two_sided(values, chance)
        else:
            t, df, p = one_sample_ttest_greater(values, chance)
    except DegenerateSample:
        if values.size < 2:
            raise
        mean = float(values.mean())
        df = int(values.size) - 1
        if mean == chance:
            t, p = 0.0, _clamp_open_unit(0.5 if not two_sided else 1.0)
        else:
            t = math.inf if mean > chance else -math.inf
            p = _clamp_open_unit(0.0 if (two_sided or mean > chance) else 1.0)
    return TestResult(
        n=int(values.size),
        mean_accuracy=float(values.mean()),
        chance=float(chance),
        t_statistic=t,
        df=df,
        p_value=p,
        alpha_adjusted=float(alpha_adjusted),
        significant=bool(p < alpha_adjusted),
        two_sided=two_sided)
