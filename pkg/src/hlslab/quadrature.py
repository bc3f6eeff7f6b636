"""Gauss-Legendre panels and spherical means of inverse powers.

The central object is the mean over the unit sphere S^(d-1) of
(1 - kappa <e, w>)^(-nu), 0 <= kappa < 1. It is the angular part of every
kernel in the package (Riesz kernels on radial data, the trace extension
kernels and the latitude kernels on spheres). As kappa -> 1 it develops a
peak of angular width sqrt(1 - kappa), resolved here by geometrically
graded panels in the polar angle.
"""

from __future__ import annotations

import math
from functools import lru_cache

import numpy as np
from scipy.interpolate import CubicSpline

from .constants import log_sphere_area


@lru_cache(maxsize=None)
def gauss_legendre(q: int) -> tuple[np.ndarray, np.ndarray]:
    """Gauss-Legendre nodes and weights on [-1, 1]."""
    x, w = np.polynomial.legendre.leggauss(q)
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


def panel_rule(edges: np.ndarray, q: int) -> tuple[np.ndarray, np.ndarray]:
    """Composite q-point Gauss-Legendre rule on consecutive panels.

    ``edges`` has shape (..., P+1); the returned nodes and weights have
    shape (..., P*q).
    """
    x, w = gauss_legendre(q)
    a = edges[..., :-1, None]
    b = edges[..., 1:, None]
    half = 0.5 * (b - a)
    nodes = a + half * (x + 1.0)
    weights = half * w
    shape = edges.shape[:-1] + (-1,)
    return nodes.reshape(shape), weights.reshape(shape)


def graded_edges(a: float, b: float, sigma: float = 0.2, levels: int = 24,
                 uniform: int = 1) -> np.ndarray:
    """Panel edges on [a, b] refined geometrically toward the endpoint ``a``.

    Edges sit at a + (b-a) sigma^k for k = levels..1, and the outermost
    stretch [a + (b-a) sigma, b] is split into ``uniform`` equal panels.
    The innermost piece [a, a + (b-a) sigma^levels] is not covered; callers
    replace it by an asymptotic remainder. Pass b < a to grade toward the
    right endpoint of [b, a].
    """
    k = np.arange(levels, 1, -1)
    frac = np.concatenate([sigma ** k, np.linspace(sigma, 1.0, uniform + 1)])
    return a + (b - a) * frac


def _angular_norm(d: int) -> float:
    return math.exp(log_sphere_area(d - 2) - log_sphere_area(d - 1))


def spherical_power_mean(d: int, nu: float, kappa, one_minus_kappa=None,
                         q: int = 10, panels: int = 40, chunk: int = 4096):
    """Mean of (1 - kappa cos(theta))^(-nu) over S^(d-1), by direct quadrature.

    Parameters
    ----------
    d : int
        Ambient dimension of the sphere S^(d-1), d >= 1.
    nu : float
        Exponent, nu > 0.
    kappa : array_like
        Values in [0, 1).
    one_minus_kappa : array_like, optional
        1 - kappa supplied separately to avoid cancellation near kappa = 1.
    q, panels : int
        Gauss-Legendre order per panel and number of graded panels.

    Returns
    -------
    ndarray
        Spherical means, same shape as ``kappa``.
    """
    kappa = np.asarray(kappa, dtype=float)
    omk = 1.0 - kappa if one_minus_kappa is None else np.asarray(one_minus_kappa, dtype=float)
    shape = np.broadcast(kappa, omk).shape
    kappa = np.broadcast_to(kappa, shape).ravel()
    omk = np.broadcast_to(omk, shape).ravel()
    if d == 1:
        out = 0.5 * (omk ** -nu + (1.0 + kappa) ** -nu)
        return out.reshape(shape)
    norm = _angular_norm(d)
    out = np.empty(kappa.size)
    frac = np.arange(panels + 1) / panels
    for start in range(0, kappa.size, chunk):
        kap = kappa[start:start + chunk, None]
        om = omk[start:start + chunk, None]
        theta0 = np.minimum(0.25 * np.sqrt(np.maximum(om, 1e-300)), 0.5)
        edges = np.concatenate(
            [np.zeros_like(theta0), theta0 * (np.pi / theta0) ** frac], axis=1
        )
        th, wt = panel_rule(edges, q)
        base = om + 2.0 * kap * np.sin(0.5 * th) ** 2
        vals = base ** -nu
        if d > 2:
            vals = vals * np.sin(th) ** (d - 2)
        out[start:start + chunk] = norm * np.sum(wt * vals, axis=1)
    return out.reshape(shape)


class PowerMeanTable:
    """Cubic-spline table of the spherical power mean.

    The mean is a function of z = kappa^2 alone. It is tabulated against
    y = ln(1 - z), where the singular behaviour near z = 1 becomes at most
    linear growth: the table stores ln(mean) - e y with
    e = min(0, (d-1)/2 - nu), the power of (1 - z) that governs the blow-up.
    Below the table range the stored function is extended linearly.

    Parameters
    ----------
    d : int
        Ambient dimension of the averaging sphere.
    nu : float
        Exponent of the inverse power.
    y_min, step : float
        Range and spacing in y.
    """

    def __init__(self, d: int, nu: float, y_min: float = -80.0, step: float = 0.01):
        self.d = int(d)
        self.nu = float(nu)
        self.y_min = float(y_min)
        self.e = min(0.0, 0.5 * (d - 1) - nu)
        if self.d == 1:
            self._spline = None
            return
        y = np.linspace(y_min, 0.0, int(round(-y_min / step)) + 1)
        omz = np.exp(y)
        kappa = np.sqrt(-np.expm1(y))
        omk = omz / (1.0 + kappa)
        vals = spherical_power_mean(self.d, self.nu, kappa, omk)
        self._spline = CubicSpline(y, np.log(vals) - self.e * y)
        self._slope = float(self._spline(y_min, 1))
        self._edge = float(self._spline(y_min))

    def __call__(self, omz):
        """Spherical mean as a function of 1 - kappa^2."""
        omz = np.asarray(omz, dtype=float)
        if self.d == 1:
            kappa = np.sqrt(np.maximum(1.0 - omz, 0.0))
            omk = omz / (1.0 + kappa)
            return 0.5 * (omk ** -self.nu + (1.0 + kappa) ** -self.nu)
        y = np.log(omz)
        inside = y >= self.y_min
        g = np.where(
            inside,
            self._spline(np.clip(y, self.y_min, 0.0)),
            self._edge + self._slope * (y - self.y_min),
        )
        return np.exp(g + self.e * y)


@lru_cache(maxsize=32)
def power_mean_table(d: int, nu: float) -> PowerMeanTable:
    """Shared, lazily built table for (d, nu)."""
    return PowerMeanTable(d, nu)
