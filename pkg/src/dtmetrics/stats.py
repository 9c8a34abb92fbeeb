"""Pearson correlation with significance, Welch t tests, and the pairwise driver.

Significance comes from the Student t distribution evaluated through the
regularized incomplete beta function, computed here directly (Lentz's
continued fraction) so the package needs no statistics dependency at
runtime. p-values are two-tailed throughout.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Mapping, Sequence

log = logging.getLogger(__name__)

_CF_EPS = 1e-12
_CF_MAX_ITER = 300
_CF_FPMIN = 1e-300


def _betacf(a: float, b: float, x: float) -> float:
    """Continued fraction for the incomplete beta function (Lentz's method)."""
    qab = a + b
    qap = a + 1.0
    qam = a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    if abs(d) < _CF_FPMIN:
        d = _CF_FPMIN
    d = 1.0 / d
    h = d
    for m in range(1, _CF_MAX_ITER + 1):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        if abs(d) < _CF_FPMIN:
            d = _CF_FPMIN
        c = 1.0 + aa / c
        if abs(c) < _CF_FPMIN:
            c = _CF_FPMIN
        d = 1.0 / d
        h *= d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        if abs(d) < _CF_FPMIN:
            d = _CF_FPMIN
        c = 1.0 + aa / c
        if abs(c) < _CF_FPMIN:
            c = _CF_FPMIN
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < _CF_EPS:
            return h
    log.warning("incomplete beta continued fraction did not converge (a=%g b=%g x=%g)", a, b, x)
    return h


def reg_inc_beta(a: float, b: float, x: float) -> float:
    """Regularized incomplete beta function I_x(a, b)."""
    if a <= 0 or b <= 0:
        raise ValueError("a and b must be positive")
    if x <= 0.0:
        return 0.0
    if x >= 1.0:
        return 1.0
    ln_front = (
        math.lgamma(a + b) - math.lgamma(a) - math.lgamma(b)
        + a * math.log(x) + b * math.log1p(-x)
    )
    front = math.exp(ln_front)
    if x < (a + 1.0) / (a + b + 2.0):
        return front * _betacf(a, b, x) / a
    return 1.0 - front * _betacf(b, a, 1.0 - x) / b


def t_cdf(t: float, df: float) -> float:
    """CDF of the Student t distribution with df degrees of freedom."""
    if df <= 0:
        raise ValueError("df must be positive")
    if t == 0.0:
        return 0.5
    if math.isinf(t):
        return 1.0 if t > 0 else 0.0
    x = df / (df + t * t)
    tail = reg_inc_beta(df / 2.0, 0.5, x)
    return 1.0 - 0.5 * tail if t > 0 else 0.5 * tail


def two_tailed_p(t: float, df: float) -> float:
    """Two-tailed tail mass of the t distribution: P(|T| >= |t|)."""
    if df <= 0:
        raise ValueError("df must be positive")
    if t == 0.0:
        return 1.0
    if math.isinf(t):
        return 0.0
    return reg_inc_beta(df / 2.0, 0.5, df / (df + t * t))


def correlation_p(r: float, n: int) -> float:
    """Two-tailed p of a Pearson r observed over n points (df = n - 2)."""
    if n < 3:
        raise ValueError("need n >= 3 for a correlation p-value")
    if abs(r) >= 1.0:
        return 0.0
    df = n - 2
    t = r * math.sqrt(df / (1.0 - r * r))
    return two_tailed_p(t, df)


@dataclass(frozen=True)
class PairedSeries:
    label_x: str
    label_y: str
    xs: Sequence[float]
    ys: Sequence[float]

    def __post_init__(self):
        if len(self.xs) != len(self.ys):
            raise ValueError("paired series must have equal length")
        if len(self.xs) < 3:
            raise ValueError("paired series needs n >= 3")
        for v in (*self.xs, *self.ys):
            if not math.isfinite(v):
                raise ValueError("paired series contains non-finite values")

    @property
    def n(self) -> int:
        return len(self.xs)


@dataclass(frozen=True)
class CorrelationResult:
    r: float
    t_stat: float
    p_two_tailed: float
    n: int


def pearson(series: PairedSeries) -> CorrelationResult:
    """Pearson's r with a two-tailed t-test p-value at n - 2 degrees of freedom."""
    n = series.n
    mx = math.fsum(series.xs) / n
    my = math.fsum(series.ys) / n
    dx = [x - mx for x in series.xs]
    dy = [y - my for y in series.ys]
    sxx = math.fsum(d * d for d in dx)
    syy = math.fsum(d * d for d in dy)
    if sxx == 0.0 or syy == 0.0:
        raise ValueError("degenerate series: zero variance")
    sxy = math.fsum(a * b for a, b in zip(dx, dy))
    r = sxy / math.sqrt(sxx * syy)
    r = max(-1.0, min(1.0, r))
    df = n - 2
    if 1.0 - r * r <= 0.0:
        t = math.inf if r > 0 else -math.inf
        return CorrelationResult(r=r, t_stat=t, p_two_tailed=0.0, n=n)
    t = r * math.sqrt(df / (1.0 - r * r))
    return CorrelationResult(r=r, t_stat=t, p_two_tailed=two_tailed_p(t, df), n=n)


def welch_t(a: Sequence[float], b: Sequence[float]) -> tuple[float, float, float]:
    """Welch's unequal-variance t test; returns (t, df, two-tailed p).

    df follows the Welch-Satterthwaite approximation. Two identical constant
    groups are degenerate and raise.
    """
    na, nb = len(a), len(b)
    if na < 2 or nb < 2:
        raise ValueError("each group needs at least 2 values")
    ma = math.fsum(a) / na
    mb = math.fsum(b) / nb
    va = math.fsum((x - ma) ** 2 for x in a) / (na - 1)
    vb = math.fsum((x - mb) ** 2 for x in b) / (nb - 1)
    se2 = va / na + vb / nb
    if se2 == 0.0:
        if ma == mb:
            raise ValueError("degenerate: both groups constant and equal")
        t = math.inf if ma > mb else -math.inf
        return t, float(na + nb - 2), 0.0
    t = (ma - mb) / math.sqrt(se2)
    df = se2 * se2 / (
        (va / na) ** 2 / (na - 1) + (vb / nb) ** 2 / (nb - 1)
    )
    return t, df, two_tailed_p(t, df)


def pairwise_table(
    x_columns: Mapping[str, Mapping[str, float]],
    y_columns: Mapping[str, Mapping[str, float]],
    min_n: int = 3,
) -> list[tuple[str, str, CorrelationResult]]:
    """Pearson result for every (x column, y column) pair, joined on shared ids.

    Pairs whose join has fewer than min_n rows, or a constant column, are
    skipped with a warning. Output is independent of input row order.
    """
    out = []
    for xl, xcol in x_columns.items():
        for yl, ycol in y_columns.items():
            ids = sorted(set(xcol) & set(ycol))
            if len(ids) < min_n:
                log.warning("pair (%s, %s): join has %d rows; skipped", xl, yl, len(ids))
                continue
            series = PairedSeries(xl, yl, [xcol[i] for i in ids], [ycol[i] for i in ids])
            try:
                result = pearson(series)
            except ValueError as exc:
                log.warning("pair (%s, %s): %s; skipped", xl, yl, exc)
                continue
            out.append((xl, yl, result))
    return out
