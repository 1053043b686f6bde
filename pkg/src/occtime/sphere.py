"""Geometry of the unit sphere S^{d-1} and spherical fractional Brownian motion.

Points are stored as arrays whose last axis has length ``d``. Spherical
angles follow the convention

    x_k     = cos(phi_k) prod_{j<k} sin(phi_j),   k = 1..d-2
    x_{d-1} = sin(theta) prod_j sin(phi_j)
    x_d     = cos(theta) prod_j sin(phi_j)

with ``phi_j`` in [0, pi) and ``theta`` in [0, 2 pi).
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np

from ._rng import as_generator

MAX_SFBM_POINTS = 4096


class FactorizationError(np.linalg.LinAlgError):
    def __init__(self, min_eigenvalue: float):
        self.min_eigenvalue = min_eigenvalue
        super().__init__(f"covariance could not be factorized (smallest eigenvalue {min_eigenvalue:.3e})")


@dataclass
class SphericalAngles:
    """``phis`` has shape ``(..., d - 2)``; ``degenerate`` marks points where theta was set to 0 by convention."""

    phis: np.ndarray
    theta: np.ndarray
    degenerate: np.ndarray


@dataclass(frozen=True)
class SfbmConfig:
    """Spherical fBM on S^{d-1} with Hurst index ``H``, pinned to 0 at ``origin``."""

    d: int
    H: float
    origin: tuple | None = None

    def __post_init__(self):
        if self.d < 2:
            raise ValueError("dimension must be at least 2")
        if not 0 < self.H <= 0.5:
            raise ValueError(f"spherical fBM exists only for 0 < H <= 1/2, got {self.H}")
        o = np.zeros(self.d)
        o[-1] = 1.0
        if self.origin is not None:
            o = np.asarray(self.origin, dtype=float)
            if o.shape != (self.d,) or abs(np.linalg.norm(o) - 1) > 1e-12:
                raise ValueError("origin must be a unit vector of dimension d")
            if theta_of(o) != 0:
                raise ValueError("origin must have theta = 0")
        object.__setattr__(self, "origin", tuple(o.tolist()))

    @property
    def origin_array(self) -> np.ndarray:
        return np.asarray(self.origin)


def uniform_sphere_sample(d: int, n: int, seed=None) -> np.ndarray:
    """``n`` iid uniform points on S^{d-1} as rows of an ``(n, d)`` array."""
    if d < 2 or n < 1:
        raise ValueError("need d >= 2 and n >= 1")
    rng = as_generator(seed)
    return uniform_sphere_points(rng, (n,), d)


def uniform_sphere_points(rng: np.random.Generator, shape: tuple, d: int) -> np.ndarray:
    x = rng.standard_normal(shape + (d,))
    x /= np.linalg.norm(x, axis=-1, keepdims=True)
    return x


def theta_of(x) -> np.ndarray:
    """Azimuthal angle from ``(x_{d-1}, x_d)`` in [0, 2 pi)."""
    x = np.asarray(x, dtype=float)
    th = np.arctan2(x[..., -2], x[..., -1])
    th = np.where(th < 0, th + 2 * math.pi, th)
    # arctan2 of a tiny negative angle can round up to exactly 2 pi
    th = np.where(th >= 2 * math.pi, 0.0, th)
    return th if th.ndim else float(th)


def to_spherical(x) -> SphericalAngles:
    """Angles of (possibly unnormalized) points; scale invariant."""
    x = np.asarray(x, dtype=float)
    d = x.shape[-1]
    if d < 2:
        raise ValueError("dimension must be at least 2")
    # tail[..., k] = norm of x[..., k:]
    tail = np.sqrt(np.cumsum((x * x)[..., ::-1], axis=-1)[..., ::-1])
    phis = np.empty(x.shape[:-1] + (d - 2,))
    degenerate = np.zeros(x.shape[:-1], dtype=bool)
    for k in range(d - 2):
        r = tail[..., k]
        safe = np.where(r > 0, r, 1.0)
        phi = np.arccos(np.clip(x[..., k] / safe, -1.0, 1.0))
        bad = (r == 0) | (tail[..., k + 1] == 0)
        phis[..., k] = np.where(r > 0, phi, 0.0)
        degenerate |= bad
    theta = np.asarray(theta_of(x))
    degenerate |= tail[..., d - 2] == 0
    theta = np.where(degenerate, 0.0, theta)
    return SphericalAngles(phis, theta if theta.ndim else float(theta), degenerate)


def from_spherical(angles: SphericalAngles, d: int | None = None, r=1.0) -> np.ndarray:
    phis = np.asarray(angles.phis, dtype=float)
    theta = np.asarray(angles.theta, dtype=float)
    if d is None:
        d = phis.shape[-1] + 2
    if phis.shape[-1] != d - 2:
        raise ValueError("number of phi angles must be d - 2")
    out = np.empty(theta.shape + (d,))
    sin_prod = np.ones(theta.shape)
    for k in range(d - 2):
        out[..., k] = np.cos(phis[..., k]) * sin_prod
        sin_prod = sin_prod * np.sin(phis[..., k])
    out[..., d - 2] = np.sin(theta) * sin_prod
    out[..., d - 1] = np.cos(theta) * sin_prod
    return r * out


def theta_order(points) -> np.ndarray:
    """Indices sorting points by theta, ties broken lexicographically by phi."""
    pts = np.asarray(points, dtype=float)
    ang = to_spherical(pts)
    keys = [ang.phis[:, k] for k in range(ang.phis.shape[1] - 1, -1, -1)]
    return np.lexsort(keys + [np.asarray(ang.theta)])


def geodesic(p, q):
    """Great-circle distance ``arccos(p . q)`` with the dot product clamped to [-1, 1]."""
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    if p.shape[-1] != q.shape[-1]:
        raise ValueError("points have different dimensions")
    out = np.arccos(np.clip(np.sum(p * q, axis=-1), -1.0, 1.0))
    return float(out) if np.ndim(out) == 0 else out


def sfbm_covariance(points, cfg: SfbmConfig) -> np.ndarray:
    """``c(s, t) = (d(O,s)^{2H} + d(O,t)^{2H} - d(s,t)^{2H}) / 2``.

    Works on a single ``(n, d)`` point set or a batch ``(..., n, d)``.
    """
    pts = np.asarray(points, dtype=float)
    if pts.shape[-1] != cfg.d:
        raise ValueError(f"points must have dimension {cfg.d}")
    two_h = 2.0 * cfg.H
    gram = np.clip(pts @ np.swapaxes(pts, -1, -2), -1.0, 1.0)
    pair = np.arccos(gram) ** two_h
    to_origin = np.arccos(np.clip(pts @ cfg.origin_array, -1.0, 1.0)) ** two_h
    cov = 0.5 * (to_origin[..., :, None] + to_origin[..., None, :] - pair)
    # the diagonal is d(O,s)^{2H} exactly; arccos(1) may carry rounding
    idx = np.arange(pts.shape[-2])
    cov[..., idx, idx] = to_origin
    return cov


def factorize_covariance(cov: np.ndarray, max_jitter: float = 1e-6) -> tuple[np.ndarray, float]:
    """Square-root factor ``L`` with ``L L^T ~ cov``.

    Tries Cholesky, then Cholesky with jitter ``1e-12 * trace / n`` grown
    tenfold up to ``max_jitter``, and finally clips negative eigenvalues.
    Returns the factor and the jitter used (``nan`` for the spectral fallback).
    """
    cov = np.asarray(cov, dtype=float)
    n = cov.shape[0]
    try:
        return np.linalg.cholesky(cov), 0.0
    except np.linalg.LinAlgError:
        pass
    base = max(float(np.trace(cov)) / max(n, 1), 1e-300)
    jitter = 1e-12 * base
    while jitter <= max_jitter * base:
        try:
            return np.linalg.cholesky(cov + jitter * np.eye(n)), jitter
        except np.linalg.LinAlgError:
            jitter *= 10
    w, v = np.linalg.eigh(cov)
    if w[0] < -1e-8 * max(abs(w[-1]), 1.0):
        raise FactorizationError(float(w[0]))
    return v * np.sqrt(np.clip(w, 0.0, None)), float("nan")


def sample_sfbm_at(points, cfg: SfbmConfig, seed=None, size: int | None = None) -> np.ndarray:
    """Centred Gaussian vector(s) with covariance :func:`sfbm_covariance`.

    Returns shape ``(n,)`` or ``(size, n)``.
    """
    pts = np.asarray(points, dtype=float)
    if pts.ndim != 2:
        raise ValueError("points must be an (n, d) array")
    if len(pts) > MAX_SFBM_POINTS:
        raise ValueError(f"at most {MAX_SFBM_POINTS} points supported")
    factor, _ = factorize_covariance(sfbm_covariance(pts, cfg))
    rng = as_generator(seed)
    z = rng.standard_normal((len(pts),) if size is None else (size, len(pts)))
    return z @ factor.T


def batched_sfbm_positive(points: np.ndarray, cfg: SfbmConfig, rng: np.random.Generator):
    """One field draw per point set in a batch ``(trials, m, d)``.

    Returns ``(positive, fallback, failed)``: the all-positive indicator of
    each trial that could be factorized, the number of trials that needed
    jitter or the spectral fallback, and the number of dropped trials.
    """
    cov = sfbm_covariance(points, cfg)
    trials, m, _ = cov.shape
    z = rng.standard_normal((trials, m))
    fallback = 0
    keep = np.ones(trials, dtype=bool)
    try:
        factor = np.linalg.cholesky(cov)
    except np.linalg.LinAlgError:
        factor = np.zeros_like(cov)
        for i in range(trials):
            try:
                factor[i] = np.linalg.cholesky(cov[i])
            except np.linalg.LinAlgError:
                fallback += 1
                try:
                    factor[i], _ = factorize_covariance(cov[i])
                except FactorizationError:
                    keep[i] = False
    x = np.einsum("tij,tj->ti", factor[keep], z[keep])
    return np.all(x > 0, axis=1), fallback, int(trials - keep.sum())


def export_field_csv(path, points, values) -> None:
    """Write ``x1..xd,value`` rows."""
    pts = np.asarray(points, dtype=float)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow([f"x{i + 1}" for i in range(pts.shape[1])] + ["value"])
        for row, v in zip(pts, np.asarray(values, dtype=float)):
            w.writerow([repr(float(c)) for c in row] + [repr(float(v))])
