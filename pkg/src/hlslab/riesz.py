"""HLS bilinear forms, Riesz potentials and s-order inner products.

Radial Riesz kernel
-------------------
For radial data the kernel |x-y|^(-lam) reduces to its spherical mean
k(r, rho). In log variables t = ln r, tau = ln rho it factors as

    k(r, rho) = (r rho)^(-lam/2) Ks(tau - t),

with Ks even and depending only on the log-ratio. The double integral then
becomes a convolution in t, and the inner integral is done by product
integration: the smooth factor g r^(n - lam/2) is replaced by its local
cubic Lagrange interpolant on the grid and integrated exactly against Ks.
This yields a symmetric Toeplitz matrix of weights W, computed once per
(n, s, grid) and cached.
"""

from __future__ import annotations

import hashlib
import math
import os
from functools import lru_cache
from pathlib import Path
from typing import Optional

import numpy as np
from scipy.linalg import toeplitz

from .constants import Params, log_gamma, sphere_area
from .errors import DomainError, SingularityError, UsageError
from .funcspace import (BubbleCombo, Flavor, RadialFn, RadialGrid, ZonalSphereFn,
                        bubble_profile, default_grid)
from .quadrature import (gauss_legendre, graded_edges, panel_rule, power_mean_table,
                         spherical_power_mean)

CACHE_ENV = "HLSLAB_CACHE"
_CACHE_VERSION = 1


def riesz_const(P: Params) -> float:
    """Normalization making (-Delta)^(-s) the convolution with c |x|^(2s-n)."""
    n, s = P.n, P.s
    return math.exp(
        log_gamma((n - 2 * s) / 2) - s * math.log(4) - 0.5 * n * math.log(math.pi) - log_gamma(s)
    )


def sobolev_eigen_const(P: Params) -> float:
    """c with (-Delta)^s U = c U^(2*-1) for every centred Sobolev bubble U."""
    return math.exp(log_gamma((P.n + 2 * P.s) / 2) - log_gamma((P.n - 2 * P.s) / 2))


def angular_kernel(P: Params, r, rho):
    """Spherical mean of |r e - rho w|^(-lam) over w in S^(n-1).

    Computed by Gauss-Legendre quadrature in the polar angle on panels
    graded toward the kernel peak.
    """
    r = np.asarray(r, dtype=float)
    rho = np.asarray(rho, dtype=float)
    if np.any(r < 0) or np.any(rho < 0):
        raise DomainError("radii must be nonnegative")
    if np.any((r == 0) & (rho == 0)):
        raise DomainError("kernel undefined at r = rho = 0")
    if P.s <= 0.5 and np.any(r == rho):
        raise SingularityError("diagonal r = rho is not integrable for s <= 1/2")
    lam = P.lam
    a = r * r + rho * rho
    kappa = 2 * r * rho / a
    omk = (r - rho) ** 2 / a
    out = a ** (-0.5 * lam) * spherical_power_mean(P.n, 0.5 * lam, kappa, omk)
    return float(out) if out.ndim == 0 else out


def log_kernel(P: Params, u):
    """Even log-ratio kernel Ks(u) = (r rho)^(lam/2) k(r, rho), u = ln(rho/r)."""
    u = np.abs(np.asarray(u, dtype=float))
    lam = P.lam
    table = power_mean_table(P.n, 0.5 * lam)
    omz = np.tanh(u) ** 2
    return (2.0 * np.cosh(u)) ** (-0.5 * lam) * table(omz)


def _cardinal(y):
    """Cubic Lagrange cardinal function on the integer lattice, support [-2, 2]."""
    x = np.abs(y)
    inner = 0.5 * (x + 1) * (x - 1) * (x - 2)
    outer = -(x - 1) * (x - 2) * (x - 3) / 6.0
    return np.where(x <= 1, inner, np.where(x <= 2, outer, 0.0))


def toeplitz_weights(P: Params, N: int, h: float, far_order: int = 16,
                     near_order: int = 8, sigma: float = 0.2, levels: int = 24) -> np.ndarray:
    """Product-integration weights W_d = h int Ks(h(y+d)) Phi(y) dy, d = 0..N-1."""
    alpha = max(P.lam - (P.n - 1), 0.0)
    gx, gw = gauss_legendre(far_order)
    d = np.arange(N, dtype=float)
    W = np.zeros(N)
    for c in range(-2, 2):
        y = c + 0.5 * (gx + 1.0)
        wy = 0.5 * gw
        vals = log_kernel(P, h * (y[None, :] + d[:, None]))
        W += h * np.sum(vals * (_cardinal(y) * wy)[None, :], axis=1)
    # offsets whose cells touch the singular point y = -d; there the cell is
    # parametrized by the distance v from the singular point
    eps = sigma ** levels
    v, wv = panel_rule(graded_edges(0.0, 1.0, sigma, levels, uniform=2), near_order)
    kv = log_kernel(P, h * v)
    tail = log_kernel(P, h * eps) * eps / (1.0 - alpha)
    for k in range(min(3, N)):
        total = 0.0
        ys = -float(k)
        for c in range(-2, 2):
            lo, hi = float(c), float(c + 1)
            if ys == lo or ys == hi:
                sign = 1.0 if ys == lo else -1.0
                total += np.sum(wv * kv * _cardinal(ys + sign * v)) + _cardinal(ys) * tail
            else:
                y, w = panel_rule(np.linspace(lo, hi, 3), near_order)
                total += np.sum(w * log_kernel(P, h * (y + k)) * _cardinal(y))
        W[k] = h * total
    return W


class KernelTable:
    """Toeplitz weights of the radial Riesz kernel on one log grid.

    Parameters
    ----------
    params : Params
    grid : RadialGrid
    weights : ndarray
        First column of the symmetric Toeplitz matrix.
    """

    def __init__(self, params: Params, grid: RadialGrid, weights: np.ndarray):
        if grid.n != params.n:
            raise UsageError("grid dimension differs from params")
        self.params = params
        self.grid = grid
        self.weights = np.asarray(weights, dtype=float)
        self._matrix: Optional[np.ndarray] = None

    @property
    def matrix(self) -> np.ndarray:
        if self._matrix is None:
            self._matrix = toeplitz(self.weights)
        return self._matrix

    def apply(self, a: np.ndarray) -> np.ndarray:
        """Convolution of grid samples ``a`` with the kernel weights."""
        return self.matrix @ a

    def kernel(self, i: int, j: int) -> float:
        """Point value k(r_i, r_j) of the underlying kernel, for diagnostics."""
        r = self.grid.r
        return float((r[i] * r[j]) ** (-0.5 * self.params.lam)
                     * log_kernel(self.params, self.grid.t[j] - self.grid.t[i]))

    @staticmethod
    def cache_key(params: Params, grid: RadialGrid) -> str:
        text = repr((_CACHE_VERSION, params.n, params.s, grid.key))
        return hashlib.sha1(text.encode()).hexdigest()[:20]

    def save(self, path: Path) -> None:
        """Write header (n, s, N, t0, h) followed by the weights as doubles."""
        g = self.grid
        head = np.array([self.params.n, self.params.s, g.N, g.t[0], g.h], dtype="<f8")
        with open(path, "wb") as fh:
            fh.write(b"HLSK")
            fh.write(head.tobytes())
            fh.write(np.asarray(self.weights, dtype="<f8").tobytes())

    @classmethod
    def load(cls, path: Path, params: Params, grid: RadialGrid) -> Optional["KernelTable"]:
        raw = Path(path).read_bytes()
        if raw[:4] != b"HLSK":
            return None
        head = np.frombuffer(raw[4:44], dtype="<f8")
        expect = np.array([params.n, params.s, grid.N, grid.t[0], grid.h])
        if not np.array_equal(head, expect):
            return None
        w = np.frombuffer(raw[44:], dtype="<f8")
        if w.size != grid.N:
            return None
        return cls(params, grid, w.copy())


@lru_cache(maxsize=16)
def kernel_table(params: Params, grid: RadialGrid) -> KernelTable:
    """Build or load the kernel table for (params, grid).

    When the environment variable ``HLSLAB_CACHE`` names a directory, tables
    are read from and written to it.
    """
    cache_dir = os.environ.get(CACHE_ENV)
    path = None
    if cache_dir:
        path = Path(cache_dir) / f"kernel_{KernelTable.cache_key(params, grid)}.bin"
        if path.exists():
            table = KernelTable.load(path, params, grid)
            if table is not None:
                return table
    table = KernelTable(params, grid, toeplitz_weights(params, grid.N, grid.h))
    if path is not None:
        path.parent.mkdir(parents=True, exist_ok=True)
        table.save(path)
    return table


def _params_of(*fns: RadialFn) -> Params:
    P = fns[0].params
    if P is None:
        raise UsageError("radial function carries no params")
    for f in fns[1:]:
        if f.params != P:
            raise UsageError("radial functions have different params")
        if f.grid != fns[0].grid:
            raise UsageError("radial functions live on different grids")
    return P


def _weighted(f: RadialFn, lam: float) -> np.ndarray:
    return f.values * f.grid.r ** (f.grid.n - 0.5 * lam)


def hls_form(g1: RadialFn, g2: RadialFn) -> float:
    """Double integral of g1(x) |x-y|^(-lam) g2(y) over R^n x R^n."""
    P = _params_of(g1, g2)
    table = kernel_table(P, g1.grid)
    a1 = _weighted(g1, P.lam)
    a2 = _weighted(g2, P.lam)
    area = g1.grid.area
    return float(area * area * g1.grid.h * np.dot(a1, table.apply(a2)))


def neg_frac_norm_sq(g: RadialFn) -> float:
    """||(-Delta)^(-s/2) g||_2^2."""
    P = _params_of(g)
    return riesz_const(P) * hls_form(g, g)


def riesz_potential(g: RadialFn) -> RadialFn:
    """(-Delta)^(-s) g sampled on the grid of ``g``."""
    P = _params_of(g)
    table = kernel_table(P, g.grid)
    vals = riesz_const(P) * g.grid.area * g.grid.r ** (-0.5 * P.lam) * table.apply(_weighted(g, P.lam))
    return RadialFn(g.grid, vals, P)


def l2_inner(f: RadialFn, g: RadialFn) -> float:
    if f.grid != g.grid:
        raise UsageError("radial functions live on different grids")
    return f.grid.integrate(f.values * g.values)


def hs_cross(P: Params, b1, b2, grid: Optional[RadialGrid] = None) -> np.ndarray:
    """Matrix of <U_{b1}, U_{b2}> in the homogeneous s-order inner product.

    Uses (-Delta)^s U_b = c U_b^(2*-1), so each entry is
    c int U_{b1} U_{b2}^(2*-1) dx.
    """
    grid = grid or default_grid(P.n)
    b1 = np.atleast_1d(np.asarray(b1, dtype=float))
    b2 = np.atleast_1d(np.asarray(b2, dtype=float))
    r = grid.r
    U = bubble_profile(P, b1[:, None], Flavor.SOBOLEV, r[None, :])
    H = bubble_profile(P, b2[:, None], Flavor.HLS, r[None, :])
    return sobolev_eigen_const(P) * grid.area * (U * grid.weights) @ H.T


def hs_diag(P: Params, b, grid: Optional[RadialGrid] = None) -> np.ndarray:
    """<U_b, U_b> for each scale in ``b`` (the diagonal of :func:`hs_cross`)."""
    grid = grid or default_grid(P.n)
    b = np.atleast_1d(np.asarray(b, dtype=float))
    r = grid.r[None, :]
    U = bubble_profile(P, b[:, None], Flavor.SOBOLEV, r)
    H = bubble_profile(P, b[:, None], Flavor.HLS, r)
    return sobolev_eigen_const(P) * grid.area * np.sum(U * H * grid.weights, axis=1)


def hs_inner(F: BubbleCombo, G: BubbleCombo, grid: Optional[RadialGrid] = None) -> float:
    """Homogeneous s-order inner product of two Sobolev bubble combinations."""
    if F.flavor is not Flavor.SOBOLEV or G.flavor is not Flavor.SOBOLEV:
        raise UsageError("s-order inner products need Sobolev-flavor combos")
    if F.params != G.params:
        raise UsageError("combos have different params")
    if not F.terms or not G.terms:
        return 0.0
    M = hs_cross(F.params, F.scales, G.scales, grid)
    return float(F.coefs @ M @ G.coefs)


def _sphere_kernel_mean(P: Params, theta, delta):
    """Azimuthal mean of |xi - eta|^(-lam) for polar angles theta and theta + delta."""
    theta2 = theta + delta
    A = 2.0 - 2.0 * np.cos(theta) * np.cos(theta2)
    omz = 16.0 * (np.sin(0.5 * delta) * np.sin(theta + 0.5 * delta)) ** 2 / A ** 2
    table = power_mean_table(P.n, 0.5 * P.lam)
    return A ** (-0.5 * P.lam) * table(np.clip(omz, 1e-300, 1.0))


def sphere_potential(P: Params, g: ZonalSphereFn, theta, q: int = 10,
                     sigma: float = 0.25, levels: int = 28) -> np.ndarray:
    """int_{S^n} g(eta) |xi - eta|^(-lam) d eta at points of polar angle ``theta``.

    The latitude integral is split at the singular point and each side is
    integrated in the offset from it on geometrically graded panels.
    """
    if g.dim != P.n:
        raise UsageError("sphere dimension differs from params")
    theta = np.atleast_1d(np.asarray(theta, dtype=float))
    alpha = max(P.lam - (P.n - 1), 0.0)
    area = sphere_area(P.n - 1)
    frac_x, frac_w = panel_rule(graded_edges(0.0, 1.0, sigma, levels, uniform=4), q)
    eps = sigma ** levels
    out = np.zeros(theta.size)
    for span, sign in ((theta, -1.0), (np.pi - theta, 1.0)):
        delta = sign * span[:, None] * frac_x[None, :]
        x = theta[:, None] + delta
        vals = _sphere_kernel_mean(P, theta[:, None], delta) * g(x) * np.sin(x) ** (P.n - 1)
        out += span * np.sum(frac_w[None, :] * vals, axis=1)
        d0 = sign * span * eps
        x0 = theta + d0
        edge = _sphere_kernel_mean(P, theta, d0) * g(x0) * np.sin(x0) ** (P.n - 1)
        out += np.where(span > 0, edge * span * eps / (1.0 - alpha), 0.0)
    return area * out


def sphere_hls_form(g: ZonalSphereFn, P: Params) -> float:
    """Double integral of g(xi) |xi - eta|^(-lam) g(eta) over S^n x S^n."""
    V = sphere_potential(P, g, g.theta)
    return float(np.dot(g.weights, g.values * V))
