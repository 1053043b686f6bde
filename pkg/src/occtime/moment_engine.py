"""Exact moment formulas for occupation times of Lévy processes.

The ``m``-th moment of ``A_t = int_0^t 1{X_s > 0} ds`` is a sum over set
partitions of ``{1..m}`` of integrated iterated convolutions of
``u^{|B|-1} p(u)``, where ``p(u) = P(X_u > 0)`` is the positivity function.
The summand depends only on block sizes, so the default path sums over
block profiles; the naive sum over all set partitions is kept for
cross-checking.

Convolutions are discretized with the composite trapezoid rule on a uniform
grid and computed directly in O(n^2).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Sequence

import numpy as np

from . import analysis
from .combinatorics import (
    DEFAULT_PARTITION_CAP,
    PartitionCapError,
    block_profiles,
    enumerate_set_partitions,
    rising_factorial,
)

NAIVE_PARTITION_CAP = 8
MAX_GRID_INTERVALS = 2**14


@dataclass(frozen=True)
class TimeGrid:
    """Uniform grid ``0 = t_0 < ... < t_n = t_end``."""

    t_end: float
    n: int

    def __post_init__(self):
        if not self.t_end > 0:
            raise ValueError("t_end must be positive")
        if self.n < 2:
            raise ValueError("a grid needs at least 2 intervals")

    @property
    def h(self) -> float:
        return self.t_end / self.n

    @property
    def times(self) -> np.ndarray:
        return np.linspace(0.0, self.t_end, self.n + 1)


@dataclass(frozen=True)
class SampledFunction:
    grid: TimeGrid
    values: np.ndarray

    def __post_init__(self):
        if len(self.values) != self.grid.n + 1:
            raise ValueError("values do not match the grid")


# --------------------------------------------------------------------------
# positivity functions


class PositivityFunction:
    """``t -> P(X_t > 0)``; subclasses implement :meth:`__call__` on arrays."""

    def __call__(self, t):
        raise NotImplementedError

    def on_grid(self, grid: TimeGrid) -> np.ndarray:
        vals = np.asarray(self(grid.times), dtype=float)
        if vals.shape != (grid.n + 1,):
            vals = np.broadcast_to(vals, (grid.n + 1,)).astype(float)
        if np.any(vals < 0) or np.any(vals > 1) or np.any(np.isnan(vals)):
            raise ValueError("positivity values must lie in [0, 1]")
        return vals


@dataclass(frozen=True)
class Constant(PositivityFunction):
    c: float

    def __post_init__(self):
        if not 0 <= self.c <= 1:
            raise ValueError("c must lie in [0, 1]")

    def __call__(self, t):
        return np.full(np.shape(t), float(self.c)) if np.ndim(t) else float(self.c)


@dataclass(frozen=True)
class ErfDrift(PositivityFunction):
    """``erf(sqrt(t / (4 mu)))``: 1/2-stable subordinator with drift ``-mu``."""

    mu: float

    def __post_init__(self):
        if not self.mu > 0:
            raise ValueError("mu must be positive")

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        out = analysis.erf(np.sqrt(np.maximum(t, 0.0) / (4.0 * self.mu)))
        return float(out) if np.ndim(out) == 0 else out


@dataclass(frozen=True)
class Tabulated(PositivityFunction):
    """Positivity given on a strictly increasing time table starting at 0.

    Linearly interpolated in between. Jumps in the table reduce the
    quadrature to first order in the grid spacing.
    """

    times: tuple
    values: tuple

    def __post_init__(self):
        t = np.asarray(self.times, dtype=float)
        v = np.asarray(self.values, dtype=float)
        if t.ndim != 1 or t.shape != v.shape or len(t) < 2:
            raise ValueError("times and values must be 1-d of equal length >= 2")
        if t[0] != 0 or np.any(np.diff(t) <= 0):
            raise ValueError("table times must start at 0 and increase strictly")
        if np.any(v < 0) or np.any(v > 1):
            raise ValueError("table values must lie in [0, 1]")
        object.__setattr__(self, "times", tuple(t.tolist()))
        object.__setattr__(self, "values", tuple(v.tolist()))

    @property
    def horizon(self) -> float:
        return self.times[-1]

    def __call__(self, t):
        arr = np.asarray(t, dtype=float)
        if np.any(arr > self.horizon * (1 + 1e-12)) or np.any(arr < 0):
            raise ValueError(f"tabulated positivity covers [0, {self.horizon}] only")
        out = np.interp(arr, self.times, self.values)
        return float(out) if np.ndim(out) == 0 else out


@dataclass(frozen=True)
class Callback(PositivityFunction):
    func: Callable = field(compare=False)

    def __call__(self, t):
        arr = np.asarray(t, dtype=float)
        try:
            out = np.asarray(self.func(arr), dtype=float)
            if out.shape != arr.shape:
                raise ValueError
        except (TypeError, ValueError):
            out = np.array([float(self.func(x)) for x in arr.ravel()]).reshape(arr.shape)
        return float(out) if out.ndim == 0 else out


# --------------------------------------------------------------------------
# quadrature primitives


def monomial_convolution(exponents: Sequence[float], t: float) -> float:
    """Closed form of the convolution of ``s^{a_1-1}, ..., s^{a_k-1}`` at ``t``.

    ``prod Gamma(a_i) / Gamma(sum a_i) * t^(sum a_i - 1)``.
    """
    a = [float(x) for x in exponents]
    if not a:
        raise ValueError("need at least one exponent")
    if any(x <= 0 for x in a) or t <= 0:
        raise ValueError("exponents and t must be positive")
    total = sum(a)
    log_val = sum(math.lgamma(x) for x in a) - math.lgamma(total) + (total - 1) * math.log(t)
    return math.exp(log_val)


def _trapezoid_convolve(f: np.ndarray, g: np.ndarray, h: float) -> np.ndarray:
    n1 = len(f)
    full = np.convolve(f, g)[:n1]
    out = h * (full - 0.5 * (f * g[0] + f[0] * g))
    out[0] = 0.0
    return out


def discrete_convolution(f: SampledFunction, g: SampledFunction) -> SampledFunction:
    """Trapezoid discretization of ``(f * g)(t) = int_0^t f(t - s) g(s) ds`` at every grid time."""
    if f.grid != g.grid:
        raise ValueError("convolution operands live on different grids")
    vals = _trapezoid_convolve(np.asarray(f.values, float), np.asarray(g.values, float), f.grid.h)
    return SampledFunction(f.grid, vals)


def _trapezoid_integral(values: np.ndarray, h: float) -> float:
    return float(h * (values.sum() - 0.5 * (values[0] + values[-1])))


def numeric_monomial_convolution(exponents: Sequence[float], grid: TimeGrid) -> float:
    """k-fold trapezoid convolution of ``s^{a_i - 1}`` evaluated at ``grid.t_end``.

    Singular values at ``s = 0`` (``a_i < 1``) are not supported.
    """
    if any(a < 1 for a in exponents):
        raise ValueError("exponents below 1 make the integrand singular at 0")
    t = grid.times
    funcs = [t ** (a - 1.0) for a in exponents]
    if len(funcs) == 1:
        return float(funcs[0][-1])
    acc = funcs[0]
    for f in funcs[1:-1]:
        acc = _trapezoid_convolve(acc, f, grid.h)
    # last convolution is only needed at t_end
    prod = acc * funcs[-1][::-1]
    return float(grid.h * (prod.sum() - 0.5 * (prod[0] + prod[-1])))


# --------------------------------------------------------------------------
# moments


@dataclass(frozen=True)
class MomentResult:
    m: int
    value: float
    method: str
    grid: TimeGrid | None = None


def _check_grid(t: float, grid: TimeGrid):
    if not math.isclose(grid.t_end, t, rel_tol=1e-12):
        raise ValueError(f"grid horizon {grid.t_end} does not match t = {t}")
    if grid.n > MAX_GRID_INTERVALS:
        raise ValueError(f"grid with {grid.n} intervals exceeds the cap {MAX_GRID_INTERVALS}")


class _BlockConvolutions:
    """Memoized iterated convolutions of ``u^{k-1} p(u)`` keyed by sorted block sizes."""

    def __init__(self, p_values: np.ndarray, grid: TimeGrid):
        self.grid = grid
        self.p = p_values
        self.t = grid.times
        self._single: dict[int, np.ndarray] = {}
        self._conv: dict[tuple[int, ...], np.ndarray] = {}

    def single(self, k: int) -> np.ndarray:
        if k not in self._single:
            self._single[k] = self.t ** (k - 1) * self.p
        return self._single[k]

    def conv(self, sizes: tuple[int, ...]) -> np.ndarray:
        sizes = tuple(sorted(sizes))
        if sizes not in self._conv:
            if len(sizes) == 1:
                self._conv[sizes] = self.single(sizes[0])
            else:
                self._conv[sizes] = _trapezoid_convolve(self.conv(sizes[:-1]), self.single(sizes[-1]), self.grid.h)
        return self._conv[sizes]

    def integrated(self, sizes) -> float:
        return _trapezoid_integral(self.conv(tuple(sizes)), self.grid.h)


def occupation_moment(
    p: PositivityFunction,
    t: float,
    m: int,
    grid: TimeGrid,
    method: str = "profile_sum",
    cap: int = DEFAULT_PARTITION_CAP,
) -> MomentResult:
    """``E[A_t^m]`` from the positivity function ``p``.

    Parameters
    ----------
    method : {"profile_sum", "naive_partition_sum", "closed_form"}
        ``profile_sum`` sums weighted block profiles, ``naive_partition_sum``
        visits every set partition (``m <= 8``), ``closed_form`` is only
        available for :class:`Constant` and returns ``t^m rising(c, m) / m!``.
    """
    return occupation_moments(p, t, [m], grid, method=method, cap=cap)[0]


def occupation_moments(
    p: PositivityFunction,
    t: float,
    orders: Sequence[int],
    grid: TimeGrid,
    method: str = "profile_sum",
    cap: int = DEFAULT_PARTITION_CAP,
) -> list[MomentResult]:
    """Several moment orders sharing one convolution cache."""
    for m in orders:
        if m < 1:
            raise ValueError("moment order must be positive")
    if method == "closed_form":
        if not isinstance(p, Constant):
            raise ValueError("closed form is only available for constant positivity")
        return [
            MomentResult(m, t**m * float(rising_factorial(Fraction(p.c), m)) / math.factorial(m), method, None)
            for m in orders
        ]
    if method not in ("profile_sum", "naive_partition_sum"):
        raise ValueError(f"unknown method {method!r}")
    limit = cap if method == "profile_sum" else min(cap, NAIVE_PARTITION_CAP)
    for m in orders:
        if m > limit:
            raise PartitionCapError(f"moment order {m} exceeds the cap {limit} for {method}")
    _check_grid(t, grid)
    if isinstance(p, Tabulated) and p.horizon < t * (1 - 1e-12):
        raise ValueError(f"tabulated positivity covers [0, {p.horizon}] but t = {t}")

    cache = _BlockConvolutions(p.on_grid(grid), grid)
    results = []
    for m in orders:
        if method == "profile_sum":
            value = sum(prof.weight * cache.integrated(prof.sizes) for prof in block_profiles(m))
        else:
            value = 0.0
            for part in enumerate_set_partitions(m, cap=NAIVE_PARTITION_CAP):
                # the discrete trapezoid convolution is not associative when p(0) != 0,
                # so blocks go in the same size order as the profile path
                blocks = [cache.single(k) for k in sorted(len(b) for b in part.blocks)]
                acc = blocks[0]
                for f in blocks[1:]:
                    acc = _trapezoid_convolve(acc, f, grid.h)
                value += _trapezoid_integral(acc, grid.h)
        results.append(MomentResult(m, float(value), method, grid))
    return results


def occupation_second_moment_direct(p: PositivityFunction, t: float, grid: TimeGrid) -> float:
    """``int_0^t s p_s ds + int_0^t int_0^s p_u p_{s-u} du ds`` by explicit double quadrature."""
    _check_grid(t, grid)
    h = grid.h
    s = grid.times
    pv = p.on_grid(grid)
    first = _trapezoid_integral(s * pv, h)
    inner = np.zeros(grid.n + 1)
    for j in range(1, grid.n + 1):
        prod = pv[: j + 1] * pv[j::-1]
        inner[j] = h * (prod.sum() - 0.5 * (prod[0] + prod[-1]))
    return first + _trapezoid_integral(inner, h)


# --------------------------------------------------------------------------
# random-walk persistence


def _is_exact(values) -> bool:
    return all(isinstance(x, (Fraction, int)) for x in values)


def survival_probability_partition(m: int, p: Sequence, naive: bool = False):
    """Persistence ``P(S_1 >= 0, ..., S_m >= 0)`` of a random walk.

    ``p[k - 1] = P(S_k >= 0)``. Evaluates
    ``(1/m!) sum_rho prod_B (|B| - 1)! p_{|B|}``; exact for rational input.
    """
    if m < 1:
        raise ValueError("m must be positive")
    if len(p) < m:
        raise ValueError(f"need p_1..p_{m}, got {len(p)} values")
    vals = [Fraction(x) if isinstance(x, int) else x for x in p[:m]]
    if any(not 0 <= x <= 1 for x in vals):
        raise ValueError("probabilities must lie in [0, 1]")
    total = vals[0] * 0
    if naive:
        for part in enumerate_set_partitions(m):
            term = vals[0] * 0 + 1
            for b in part.blocks:
                term = term * math.factorial(len(b) - 1) * vals[len(b) - 1]
            total = total + term
    else:
        for prof in block_profiles(m):
            term = vals[0] * 0 + prof.weight
            for k in prof.sizes:
                term = term * math.factorial(k - 1) * vals[k - 1]
            total = total + term
    if _is_exact(vals):
        return Fraction(total) / math.factorial(m)
    return total / math.factorial(m)


def spitzer_series(p: Sequence, order: int) -> list:
    """Coefficients ``e_0..e_order`` of ``exp(sum_k p_k x^k / k)``.

    Uses ``n e_n = sum_{k=1}^n p_k e_{n-k}``, which follows from
    differentiating the exponential.
    """
    vals = [Fraction(x) if isinstance(x, int) else x for x in p[:order]]
    if len(vals) < order:
        raise ValueError(f"need {order} probabilities")
    one = vals[0] * 0 + 1 if vals else 1
    e = [one]
    for n in range(1, order + 1):
        e.append(sum((vals[k - 1] * e[n - k] for k in range(1, n + 1)), one * 0) / n)
    return e


def spitzer_generating_check(p: Sequence, order: int):
    """Largest ``|[x^k] exp(sum p_j x^j / j) - survival_probability_partition(k, p)|``, ``k <= order``.

    Returns a ``Fraction`` (0 when the identity holds) for rational input.
    """
    if order < 1 or order > 12:
        raise ValueError("order must be in 1..12")
    series = spitzer_series(p, order)
    return max(abs(series[k] - survival_probability_partition(k, p)) for k in range(1, order + 1))


def poisson_sampled_laplace(q: float, m: int, persistence: float) -> float:
    """Laplace transform ``int_0^inf e^{-qt} E[A_t^m] dt = m! persistence / q^{m+1}``."""
    if q <= 0:
        raise ValueError("q must be positive")
    if m < 1:
        raise ValueError("m must be positive")
    return math.factorial(m) * persistence / q ** (m + 1)
