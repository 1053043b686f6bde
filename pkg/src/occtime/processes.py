"""Seeded samplers for the processes whose occupation times we study.

Every sampler takes ``seed`` (an int, a :class:`~occtime._rng.Seed` or a
``numpy.random.Generator``) and an optional ``paths`` count. With
``paths=None`` a single path comes back with 1-d ``values``; otherwise
``values`` has shape ``(paths, n + 1)``.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np

from ._rng import as_generator


@dataclass
class PathGrid:
    """Process values on a time grid starting at ``times[0] = 0`` with ``values[..., 0] = 0``."""

    times: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=float)
        self.values = np.asarray(self.values, dtype=float)
        if self.times.ndim != 1 or self.values.shape[-1] != len(self.times):
            raise ValueError("times and values have mismatched lengths")
        if self.times[0] != 0 or np.any(np.diff(self.times) <= 0):
            raise ValueError("times must start at 0 and increase strictly")
        if np.any(self.values[..., 0] != 0):
            raise ValueError("paths must start at 0")

    @property
    def horizon(self) -> float:
        return float(self.times[-1])

    @property
    def n_paths(self) -> int:
        return 1 if self.values.ndim == 1 else self.values.shape[0]

    def to_csv(self, path) -> None:
        """Write ``time,value`` rows (first path only for batches)."""
        vals = self.values if self.values.ndim == 1 else self.values[0]
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["time", "value"])
            for t, v in zip(self.times, vals):
                w.writerow([repr(float(t)), repr(float(v))])


@dataclass
class WalkSample:
    """Positions ``S_1..S_m`` of a walk (last axis), possibly batched."""

    steps: np.ndarray

    def persistent(self, strict: bool = True) -> np.ndarray:
        """Whether every position is positive (nonnegative when ``strict=False``)."""
        s = self.steps
        return np.all(s > 0, axis=-1) if strict else np.all(s >= 0, axis=-1)


def _grid(t: float, n: int) -> np.ndarray:
    if n < 1:
        raise ValueError("need at least one interval")
    if not t > 0:
        raise ValueError("horizon must be positive")
    return np.linspace(0.0, t, n + 1)


def _assemble(times, increments) -> PathGrid:
    values = np.zeros(increments.shape[:-1] + (increments.shape[-1] + 1,))
    np.cumsum(increments, axis=-1, out=values[..., 1:])
    return PathGrid(times, values)


def _shape(n: int, paths: int | None) -> tuple[int, ...]:
    return (n,) if paths is None else (paths, n)


def symmetric_stable_variates(alpha: float, size, rng: np.random.Generator) -> np.ndarray:
    """Standard symmetric alpha-stable variates (Chambers-Mallows-Stuck).

    Characteristic function ``exp(-|u|^alpha)``; ``alpha = 2`` gives a
    centred Gaussian of variance 2, ``alpha = 1`` the standard Cauchy law.
    """
    if not 0 < alpha <= 2:
        raise ValueError(f"alpha must lie in (0, 2], got {alpha}")
    v = rng.uniform(-math.pi / 2, math.pi / 2, size)
    w = rng.standard_exponential(size)
    if alpha == 1:
        return np.tan(v)
    return np.sin(alpha * v) / np.cos(v) ** (1 / alpha) * (np.cos((1 - alpha) * v) / w) ** ((1 - alpha) / alpha)


def stable_increments(alpha: float, durations, rng: np.random.Generator) -> np.ndarray:
    """Increments of a symmetric stable process over the given time spans."""
    durations = np.asarray(durations, dtype=float)
    if alpha == 2:
        return math.sqrt(2.0) * np.sqrt(durations) * rng.standard_normal(durations.shape)
    return durations ** (1 / alpha) * symmetric_stable_variates(alpha, durations.shape, rng)


def simulate_bm(t: float, n: int, seed=None, paths: int | None = None) -> PathGrid:
    """Standard Brownian motion on ``n`` equal steps of ``[0, t]``."""
    times = _grid(t, n)
    rng = as_generator(seed)
    inc = rng.standard_normal(_shape(n, paths))
    inc *= math.sqrt(t / n)
    return _assemble(times, inc)


def simulate_symmetric_stable(alpha: float, t: float, n: int, seed=None, paths: int | None = None) -> PathGrid:
    """Symmetric alpha-stable Lévy process, increments scaled by ``h^(1/alpha)``."""
    if not 0 < alpha <= 2:
        raise ValueError(f"alpha must lie in (0, 2], got {alpha}")
    times = _grid(t, n)
    rng = as_generator(seed)
    inc = symmetric_stable_variates(alpha, _shape(n, paths), rng)
    inc *= (t / n) ** (1 / alpha)
    return _assemble(times, inc)


def half_stable_variates(durations, rng: np.random.Generator) -> np.ndarray:
    """Increments of the 1/2-stable subordinator with Laplace exponent ``sqrt(lambda)``.

    Over a span ``h`` the increment is ``h^2 / (2 Z^2)`` with ``Z`` standard
    normal. This scale makes ``P(sigma_t > mu t) = erf(sqrt(t / (4 mu)))``.
    """
    durations = np.asarray(durations, dtype=float)
    z = rng.standard_normal(durations.shape)
    return durations**2 / (2.0 * z * z)


def simulate_half_stable_subordinator(t: float, n: int, seed=None, paths: int | None = None) -> PathGrid:
    times = _grid(t, n)
    rng = as_generator(seed)
    inc = half_stable_variates(np.full(_shape(n, paths), t / n), rng)
    return _assemble(times, inc)


def simulate_drifted_half_stable_subordinator(
    mu: float, t: float, n: int, seed=None, paths: int | None = None
) -> PathGrid:
    """``X_s = sigma_s - mu s`` for the 1/2-stable subordinator ``sigma``.

    The same seed reproduces the ``sigma`` component from
    :func:`simulate_half_stable_subordinator`.
    """
    if not mu > 0:
        raise ValueError("mu must be positive")
    sigma = simulate_half_stable_subordinator(t, n, seed, paths)
    return PathGrid(sigma.times, sigma.values - mu * sigma.times)


def make_bridge(path: PathGrid) -> PathGrid:
    """Pathwise bridge ``X_t - t X_1``; the path must end at time 1."""
    if not math.isclose(path.horizon, 1.0, rel_tol=0, abs_tol=1e-12):
        raise ValueError(f"bridge needs horizon 1, got {path.horizon}; rescale first")
    vals = path.values - path.times * path.values[..., -1:]
    vals[..., -1] = 0.0
    return PathGrid(path.times, vals)


def simulate_bridge(t: float, n: int, seed=None, paths: int | None = None, alpha: float = 2.0) -> PathGrid:
    """Lévy bridge on ``[0, 1]`` from Brownian motion (``alpha=2``) or a symmetric stable process."""
    if alpha == 2:
        base = simulate_bm(1.0, n, seed, paths)
    else:
        base = simulate_symmetric_stable(alpha, 1.0, n, seed, paths)
    return make_bridge(base)


def laplace_walk(m: int, seed=None, size: int | None = None) -> WalkSample:
    """Brownian motion read off at the arrival times of a unit Poisson process.

    ``S_k = sum_{i <= k} sqrt(E_i) N_i`` with independent standard exponential
    ``E_i`` and standard normal ``N_i``.
    """
    if m < 1:
        raise ValueError("m must be positive")
    rng = as_generator(seed)
    shape = _shape(m, size)
    steps = np.sqrt(rng.standard_exponential(shape)) * rng.standard_normal(shape)
    return WalkSample(np.cumsum(steps, axis=-1))


def stable_walk_at_poisson_times(alpha: float, m: int, seed=None, size: int | None = None) -> WalkSample:
    """Symmetric stable process at unit-rate Poisson arrival times."""
    rng = as_generator(seed)
    shape = _shape(m, size)
    gaps = rng.standard_exponential(shape)
    return WalkSample(np.cumsum(stable_increments(alpha, gaps, rng), axis=-1))


def gaussian_walk(m: int, seed=None, size: int | None = None) -> WalkSample:
    rng = as_generator(seed)
    return WalkSample(np.cumsum(rng.standard_normal(_shape(m, size)), axis=-1))


def exchangeable_bridge_increments(m: int, seed=None, size: int | None = None) -> np.ndarray:
    """Centred Gaussians ``G_i - mean(G)`` forming an exchangeable bridge.

    The last increment is reset to minus the running sum of the others so
    that the sequential partial sum ``S_m`` is exactly 0.
    """
    if m < 2:
        raise ValueError("a bridge needs m >= 2 increments")
    rng = as_generator(seed)
    g = rng.standard_normal(_shape(m, size))
    xi = g - g.mean(axis=-1, keepdims=True)
    xi[..., -1] = -np.cumsum(xi[..., :-1], axis=-1)[..., -1]
    return xi


def count_positive_shifts(increments: np.ndarray) -> np.ndarray:
    """For each cyclic shift of the increments, test ``S_1..S_{m-1} > 0``; return how many pass."""
    xi = np.asarray(increments, dtype=float)
    m = xi.shape[-1]
    counts = np.zeros(xi.shape[:-1], dtype=np.int64)
    for j in range(m):
        partial = np.cumsum(np.roll(xi, -j, axis=-1), axis=-1)[..., : m - 1]
        counts += np.all(partial > 0, axis=-1)
    return counts


def occupation_time_of_path(path: PathGrid, strict: bool = True):
    """Right-endpoint Riemann sum of ``1{X > 0}`` (``>= 0`` when ``strict=False``)."""
    dt = np.diff(path.times)
    vals = path.values[..., 1:]
    ind = vals > 0 if strict else vals >= 0
    out = ind @ dt
    return float(out) if np.ndim(out) == 0 else out
