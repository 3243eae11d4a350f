"""Kruskal-Wallis H-test, D'Agostino-Pearson K^2 normality test and the
chi-square survival function both rely on.

Everything is pure Python over ``math``; samples are small (tens of values).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

from .errors import DegenerateInputError, SampleSizeError, ValidationError

__all__ = [
    "TestResult",
    "gammaincc",
    "chi2_sf",
    "midranks",
    "kruskal_wallis",
    "dagostino_pearson",
    "SIGNIFICANCE_LEVEL",
]

SIGNIFICANCE_LEVEL = 0.05

_EPS = 1e-12
_MAX_ITER = 10_000
_TINY = 1e-300


@dataclass(frozen=True)
class TestResult:
    statistic: float
    p_value: float
    df: float
    method: str
    details: dict = field(default_factory=dict)

    def significant(self, alpha: float = SIGNIFICANCE_LEVEL) -> bool:
        return self.p_value < alpha


def _lower_series(a: float, x: float) -> float:
    """Regularized lower incomplete gamma P(a, x) by its power series."""
    term = 1.0 / a
    total = term
    ap = a
    for _ in range(_MAX_ITER):
        ap += 1.0
        term *= x / ap
        total += term
        if abs(term) < abs(total) * _EPS:
            break
    else:
        raise ArithmeticError(f"incomplete gamma series did not converge (a={a}, x={x})")
    return total * math.exp(-x + a * math.log(x) - math.lgamma(a))


def _upper_fraction(a: float, x: float) -> float:
    """Regularized upper incomplete gamma Q(a, x), modified Lentz continued fraction."""
    b = x + 1.0 - a
    c = 1.0 / _TINY
    d = 1.0 / b
    h = d
    for i in range(1, _MAX_ITER):
        an = -i * (i - a)
        b += 2.0
        d = an * d + b
        if abs(d) < _TINY:
            d = _TINY
        c = b + an / c
        if abs(c) < _TINY:
            c = _TINY
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < _EPS:
            break
    else:
        raise ArithmeticError(f"incomplete gamma fraction did not converge (a={a}, x={x})")
    return math.exp(-x + a * math.log(x) - math.lgamma(a)) * h


def gammaincc(a: float, x: float) -> float:
    """Regularized upper incomplete gamma function Q(a, x)."""
    if not a > 0:
        raise ValidationError(f"gamma shape must be positive, got {a}")
    if not x >= 0:
        raise ValidationError(f"gamma argument must be >= 0, got {x}")
    if x == 0:
        return 1.0
    if math.isinf(x):
        return 0.0
    if x < a + 1.0:
        return min(1.0, max(0.0, 1.0 - _lower_series(a, x)))
    return min(1.0, max(0.0, _upper_fraction(a, x)))


def chi2_sf(x: float, df: float) -> float:
    """Upper-tail probability of a chi-square variable with ``df`` degrees of freedom."""
    if not df > 0:
        raise ValidationError(f"degrees of freedom must be positive, got {df}")
    if not x >= 0:
        raise ValidationError(f"chi-square statistic must be >= 0, got {x}")
    if df == 2:
        return math.exp(-x / 2.0)
    return gammaincc(df / 2.0, x / 2.0)


def midranks(values: Sequence[float]):
    """Ranks 1..N with ties sharing their average rank.

    Returns ``(ranks, tie_sizes)`` where ``tie_sizes`` lists the size of every
    group of equal values longer than one.
    """
    order = sorted(range(len(values)), key=lambda i: values[i])
    ranks = [0.0] * len(values)
    ties = []
    i = 0
    while i < len(order):
        j = i
        while j + 1 < len(order) and values[order[j + 1]] == values[order[i]]:
            j += 1
        avg = (i + j) / 2.0 + 1.0
        for k in range(i, j + 1):
            ranks[order[k]] = avg
        if j > i:
            ties.append(j - i + 1)
        i = j + 1
    return ranks, ties


def _as_floats(sample, what):
    try:
        vals = [float(v) for v in sample]
    except (TypeError, ValueError) as exc:
        raise ValidationError(f"{what}: non-numeric value ({exc})") from None
    if any(not math.isfinite(v) for v in vals):
        raise ValidationError(f"{what}: non-finite value")
    return vals


def kruskal_wallis(groups: Sequence[Sequence[float]]) -> TestResult:
    """Kruskal-Wallis H-test with mid-ranks and the standard tie correction.

    When every observation is equal the correction factor is zero; the
    result is then H = 0, p = 1.
    """
    if len(groups) < 2:
        raise ValidationError(f"Kruskal-Wallis needs at least 2 groups, got {len(groups)}")
    samples = [_as_floats(g, f"group {i}") for i, g in enumerate(groups)]
    for i, g in enumerate(samples):
        if not g:
            raise ValidationError(f"group {i} is empty")
    sizes = [len(g) for g in samples]
    n = sum(sizes)
    if n < 3:
        raise ValidationError(f"Kruskal-Wallis needs at least 3 observations, got {n}")

    pooled = [v for g in samples for v in g]
    ranks, ties = midranks(pooled)
    k = len(samples)
    details = {"n": n, "group_sizes": sizes, "tie_corrected": True}

    correction = 1.0 - sum(t**3 - t for t in ties) / float(n**3 - n)
    if correction <= 0.0:
        return TestResult(0.0, 1.0, float(k - 1), "kruskal-wallis", {**details, "tie_factor": 0.0})

    grand = (n + 1) / 2.0
    h = 0.0
    start = 0
    for size in sizes:
        mean_rank = sum(ranks[start : start + size]) / size
        h += size * (mean_rank - grand) ** 2
        start += size
    h *= 12.0 / (n * (n + 1))
    h /= correction
    h = max(h, 0.0)
    details["tie_factor"] = correction
    return TestResult(h, chi2_sf(h, k - 1), float(k - 1), "kruskal-wallis", details)


def _skew_z(b1: float, n: int) -> float:
    y = b1 * math.sqrt(((n + 1) * (n + 3)) / (6.0 * (n - 2)))
    beta2 = 3.0 * (n * n + 27 * n - 70) * (n + 1) * (n + 3) / ((n - 2.0) * (n + 5) * (n + 7) * (n + 9))
    w2 = -1.0 + math.sqrt(2 * (beta2 - 1))
    delta = 1.0 / math.sqrt(0.5 * math.log(w2))
    alpha = math.sqrt(2.0 / (w2 - 1))
    if y == 0:
        return 0.0
    return delta * math.log(y / alpha + math.sqrt((y / alpha) ** 2 + 1))


def _kurtosis_z(b2: float, n: int) -> float:
    mean = 3.0 * (n - 1) / (n + 1)
    var = 24.0 * n * (n - 2) * (n - 3) / ((n + 1.0) ** 2 * (n + 3) * (n + 5))
    x = (b2 - mean) / math.sqrt(var)
    sqrt_beta1 = (
        6.0 * (n * n - 5 * n + 2) / ((n + 7) * (n + 9)) * math.sqrt(6.0 * (n + 3) * (n + 5) / (n * (n - 2) * (n - 3)))
    )
    a = 6.0 + 8.0 / sqrt_beta1 * (2.0 / sqrt_beta1 + math.sqrt(1 + 4.0 / sqrt_beta1**2))
    term1 = 1 - 2 / (9.0 * a)
    denom = 1 + x * math.sqrt(2 / (a - 4.0))
    if denom == 0:
        raise DegenerateInputError("kurtosis transform is undefined for this sample")
    term2 = math.copysign(((1 - 2.0 / a) / abs(denom)) ** (1 / 3.0), denom)
    return (term1 - term2) / math.sqrt(2 / (9.0 * a))


def dagostino_pearson(sample: Sequence[float]) -> TestResult:
    """Omnibus normality test K^2 = Z(skewness)^2 + Z(kurtosis)^2.

    Uses the biased (moment) skewness and Pearson kurtosis, transformed to
    approximate standard normals; p is the chi-square(2) upper tail.
    """
    vals = _as_floats(sample, "sample")
    n = len(vals)
    if n < 20:
        raise SampleSizeError(f"D'Agostino-Pearson test needs n >= 20, got {n}")
    mean = math.fsum(vals) / n
    dev = [v - mean for v in vals]
    m2 = math.fsum(d * d for d in dev) / n
    if m2 == 0 or m2 <= (abs(mean) * 1e-14) ** 2:
        raise DegenerateInputError("sample has zero variance")
    m3 = math.fsum(d**3 for d in dev) / n
    m4 = math.fsum(d**4 for d in dev) / n
    b1 = m3 / m2**1.5
    b2 = m4 / m2**2
    zs = _skew_z(b1, n)
    zk = _kurtosis_z(b2, n)
    k2 = zs * zs + zk * zk
    return TestResult(
        k2,
        chi2_sf(k2, 2),
        2.0,
        "dagostino-pearson",
        {"n": n, "skewness": b1, "kurtosis": b2, "z_skewness": zs, "z_kurtosis": zk},
    )
