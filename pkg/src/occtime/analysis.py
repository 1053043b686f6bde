"""Special functions, reference laws on [0, 1] and test statistics."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from scipy import special

from .combinatorics import rising_factorial


def erf(x):
    """Error function; accepts scalars or arrays."""
    if np.ndim(x) == 0:
        return math.erf(float(x))
    return special.erf(np.asarray(x, dtype=float))


def log_gamma(x: float) -> float:
    if x <= 0:
        raise ValueError(f"log_gamma requires a positive argument, got {x}")
    return math.lgamma(x)


def beta(a: float, b: float) -> float:
    """Euler beta function ``Gamma(a) Gamma(b) / Gamma(a + b)``."""
    if a <= 0 or b <= 0:
        raise ValueError(f"beta requires positive arguments, got ({a}, {b})")
    return math.exp(log_gamma(a) + log_gamma(b) - log_gamma(a + b))


@dataclass(frozen=True)
class GeneralizedArcsine:
    """Beta(c, 1 - c) law on (0, 1); ``c = 1/2`` is the arcsine law."""

    c: float

    def __post_init__(self):
        if not 0 < self.c < 1:
            raise ValueError(f"c must lie in (0, 1), got {self.c}")

    def pdf(self, x):
        c = self.c
        x = np.asarray(x, dtype=float)
        return x ** (c - 1) * (1 - x) ** (-c) * math.sin(math.pi * c) / math.pi

    def cdf(self, x):
        return generalized_arcsine_cdf(self.c, x)

    def moment(self, m: int) -> float:
        return generalized_arcsine_moment(self.c, m)

    def moments(self, m_max: int) -> "MomentSequence":
        return MomentSequence([self.moment(m) for m in range(1, m_max + 1)])


@dataclass
class MomentSequence:
    """Moments ``values[m - 1] = E[X^m]`` for ``m = 1..M``."""

    values: list

    def __getitem__(self, m: int):
        if m < 1:
            raise IndexError("moment orders start at 1")
        return self.values[m - 1]

    def __len__(self):
        return len(self.values)

    @classmethod
    def uniform(cls, m_max: int) -> "MomentSequence":
        return cls([1.0 / (m + 1) for m in range(1, m_max + 1)])


def generalized_arcsine_moment(c: float, m: int) -> float:
    """``E[X^m] = rising(c, m) / m!`` for ``X ~ Beta(c, 1 - c)``."""
    if m < 0:
        raise ValueError("m must be nonnegative")
    return rising_factorial(c, m) / math.factorial(m)


def _check_unit(x):
    arr = np.asarray(x, dtype=float)
    if np.any((arr < 0) | (arr > 1)) or np.any(np.isnan(arr)):
        raise ValueError("argument must lie in [0, 1]")
    return arr


def arcsine_cdf(x):
    """``(2 / pi) arcsin(sqrt(x))`` on [0, 1]."""
    arr = _check_unit(x)
    out = 2.0 / math.pi * np.arcsin(np.sqrt(arr))
    return float(out) if np.ndim(x) == 0 else out


def generalized_arcsine_cdf(c: float, x):
    """CDF of Beta(c, 1 - c) via the regularized incomplete beta function."""
    if not 0 < c < 1:
        raise ValueError(f"c must lie in (0, 1), got {c}")
    arr = _check_unit(x)
    out = special.betainc(c, 1.0 - c, arr)
    return float(out) if np.ndim(x) == 0 else out


def uniform_cdf(x):
    arr = np.clip(np.asarray(x, dtype=float), 0.0, 1.0)
    return float(arr) if np.ndim(x) == 0 else arr


def ks_statistic(sample: Sequence[float], cdf: Callable) -> float:
    """Kolmogorov-Smirnov distance between the empirical CDF of ``sample`` and ``cdf``.

    ``sample`` is sorted here if it is not already. Both one-sided envelopes
    are taken, ``D = max(D+, D-)``.
    """
    x = np.sort(np.asarray(sample, dtype=float))
    n = len(x)
    if n == 0:
        raise ValueError("empty sample")
    f = np.asarray(cdf(x), dtype=float)
    i = np.arange(1, n + 1)
    d_plus = np.max(i / n - f)
    d_minus = np.max(f - (i - 1) / n)
    return float(max(d_plus, d_minus))


def ks_pvalue(statistic: float, n: int) -> float:
    """Asymptotic Kolmogorov p-value ``Q(sqrt(n) D)``."""
    return float(special.kolmogorov(math.sqrt(n) * statistic))


def z_score(estimate, stderr, reference):
    """``(estimate - reference) / stderr``.

    A zero standard error gives 0 when the estimate hits the reference
    exactly and a signed infinity otherwise. Array inputs broadcast.
    """
    est = np.asarray(estimate, dtype=float)
    se = np.asarray(stderr, dtype=float)
    ref = np.asarray(reference, dtype=float)
    if np.any(se < 0):
        raise ValueError("stderr must be nonnegative")
    diff = est - ref
    with np.errstate(divide="ignore", invalid="ignore"):
        z = np.where(se > 0, diff / np.where(se > 0, se, 1.0), np.where(diff == 0, 0.0, np.sign(diff) * np.inf))
    return float(z) if z.ndim == 0 else z
