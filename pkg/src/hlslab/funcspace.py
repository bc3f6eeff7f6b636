"""Radial functions on log-spaced grids, bubble families and zonal sphere data.

Radial integrals use the trapezoid rule in t = ln r,

    int_0^inf phi(r) r^(n-1) dr  ~  h sum_i phi(r_i) r_i^n,

on r in [rmin, rmax]. For integrands decaying like a power at both ends
the rule converges spectrally in h; the truncation error is bounded by
the tails int_0^rmin and int_rmax^inf, which for a bubble of scale b are
of relative size (rmin/b)^n and (b/rmax)^(2n) respectively for the
critical-power integrals.
"""

from __future__ import annotations

import enum
import json
import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Optional, Sequence

import numpy as np
from scipy.interpolate import BarycentricInterpolator

from .constants import Params, sphere_area
from .errors import DomainError, UsageError
from .quadrature import gauss_legendre


class RadialGrid:
    """Log-spaced radial nodes with trapezoid weights for r^(n-1) dr.

    Parameters
    ----------
    n : int
        Dimension of the ambient space.
    rmin, rmax : float
        Truncation radii.
    N : int
        Number of nodes.
    """

    def __init__(self, n: int, rmin: float = 1e-4, rmax: float = 1e4, N: int = 2048):
        if n < 1 or N < 8 or not 0 < rmin < rmax:
            raise DomainError("need n >= 1, N >= 8 and 0 < rmin < rmax")
        self.n = int(n)
        self.rmin = float(rmin)
        self.rmax = float(rmax)
        self.N = int(N)
        self.t = np.linspace(math.log(rmin), math.log(rmax), N)
        self.h = float(self.t[1] - self.t[0])
        self.r = np.exp(self.t)
        self.weights = self.h * self.r ** self.n
        self.area = sphere_area(self.n - 1)
        for a in (self.t, self.r, self.weights):
            a.setflags(write=False)

    @property
    def key(self) -> tuple:
        return (self.n, self.rmin, self.rmax, self.N)

    def __eq__(self, other):
        return isinstance(other, RadialGrid) and self.key == other.key

    def __hash__(self):
        return hash(self.key)

    def __repr__(self):
        return f"RadialGrid(n={self.n}, rmin={self.rmin:g}, rmax={self.rmax:g}, N={self.N})"

    def integrate(self, values) -> float:
        """Integral over R^n of a radial function sampled on the nodes."""
        return float(self.area * np.dot(self.weights, values))

    def with_n(self, n: int) -> "RadialGrid":
        return RadialGrid(n, self.rmin, self.rmax, self.N)


@lru_cache(maxsize=16)
def default_grid(n: int, N: int = 2048) -> RadialGrid:
    return RadialGrid(n, N=N)


@dataclass(frozen=True, eq=False)
class RadialFn:
    """A radial function on ``grid``, optionally tagged with its ``params``."""

    grid: RadialGrid
    values: np.ndarray
    params: Optional[Params] = None

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.shape != (self.grid.N,):
            raise UsageError("values do not match the grid size")
        if not np.all(np.isfinite(v)):
            raise DomainError("radial function values must be finite")
        if self.params is not None and self.params.n != self.grid.n:
            raise UsageError("params dimension differs from grid dimension")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    def _like(self, values) -> "RadialFn":
        return RadialFn(self.grid, values, self.params)

    def _check(self, other: "RadialFn"):
        if self.grid != other.grid:
            raise UsageError("radial functions live on different grids")

    def __add__(self, other):
        self._check(other)
        return self._like(self.values + other.values)

    def __sub__(self, other):
        self._check(other)
        return self._like(self.values - other.values)

    def __mul__(self, c):
        return self._like(float(c) * self.values)

    __rmul__ = __mul__

    def __neg__(self):
        return self._like(-self.values)

    def lp_norm(self, p: float) -> float:
        return lp_norm(self, p)

    def to_csv(self) -> str:
        lines = ["r,value"]
        lines += [f"{r:.17g},{v:.17g}" for r, v in zip(self.grid.r, self.values)]
        return "\n".join(lines) + "\n"

    def to_json(self) -> str:
        doc = {
            "schema": 1,
            "n": self.grid.n,
            "s": None if self.params is None else self.params.s,
            "r": self.grid.r.tolist(),
            "value": self.values.tolist(),
        }
        return json.dumps(doc)


def lp_norm(f: RadialFn, p: float) -> float:
    """L^p norm over R^n of a radial function."""
    if not p >= 1:
        raise DomainError(f"need p >= 1, got {p}")
    total = f.grid.area * np.dot(f.grid.weights, np.abs(f.values) ** p)
    return float(total ** (1.0 / p))


def split_parts(f: RadialFn) -> tuple[RadialFn, RadialFn]:
    """Positive and negative parts, f = f_plus - f_minus with disjoint supports."""
    v = f.values
    return f._like(np.where(v > 0, v, 0.0)), f._like(np.where(v < 0, -v, 0.0))


class Flavor(enum.Enum):
    SOBOLEV = "sobolev"
    HLS = "hls"


def bubble_exponent(P: Params, flavor: Flavor) -> float:
    """(n-2s)/2 for Sobolev bubbles, (n+2s)/2 for HLS bubbles."""
    sign = -1.0 if flavor is Flavor.SOBOLEV else 1.0
    return 0.5 * (P.n + sign * 2.0 * P.s)


def bubble_profile(P: Params, b: float, flavor: Flavor, r) -> np.ndarray:
    """(2b / (b^2 + r^2))^e with e from :func:`bubble_exponent`."""
    r = np.asarray(r, dtype=float)
    return (2.0 * b / (b * b + r * r)) ** bubble_exponent(P, flavor)


@dataclass(frozen=True)
class BubbleCombo:
    """Finite sum of centred bubbles, sum_i c_i B_{b_i}."""

    params: Params
    flavor: Flavor
    terms: tuple = field(default_factory=tuple)

    def __post_init__(self):
        terms = tuple((float(c), float(b)) for c, b in self.terms)
        bs = [b for _, b in terms]
        if any(b <= 0 for b in bs):
            raise DomainError("bubble scales must be positive")
        if len(set(bs)) != len(bs):
            raise DomainError("bubble scales must be distinct")
        object.__setattr__(self, "terms", terms)

    @property
    def coefs(self) -> np.ndarray:
        return np.array([c for c, _ in self.terms])

    @property
    def scales(self) -> np.ndarray:
        return np.array([b for _, b in self.terms])

    def __call__(self, r) -> np.ndarray:
        r = np.asarray(r, dtype=float)
        out = np.zeros_like(r)
        for c, b in self.terms:
            out = out + c * bubble_profile(self.params, b, self.flavor, r)
        return out

    def sample(self, grid: Optional[RadialGrid] = None) -> RadialFn:
        grid = grid or default_grid(self.params.n)
        return RadialFn(grid, self(grid.r), self.params)

    def scaled(self, c: float) -> "BubbleCombo":
        return BubbleCombo(self.params, self.flavor, [(c * a, b) for a, b in self.terms])

    def plus(self, other: "BubbleCombo") -> "BubbleCombo":
        """Sum of two combos, merging terms with equal scales."""
        if other.params != self.params or other.flavor is not self.flavor:
            raise UsageError("combos have different params or flavor")
        merged: dict = {}
        for c, b in self.terms + other.terms:
            merged[b] = merged.get(b, 0.0) + c
        return BubbleCombo(self.params, self.flavor, [(c, b) for b, c in merged.items()])


def make_bubble(P: Params, b: float, c: float = 1.0, flavor: Flavor = Flavor.SOBOLEV) -> BubbleCombo:
    """Single centred bubble c (2b/(b^2+r^2))^e."""
    if not b > 0:
        raise DomainError(f"bubble scale must be positive, got {b}")
    return BubbleCombo(P, flavor, [(c, b)])


def combo(P: Params, terms: Sequence, flavor: Flavor = Flavor.SOBOLEV) -> BubbleCombo:
    return BubbleCombo(P, flavor, terms)


class ZonalSphereFn:
    """Function on S^d depending only on the polar angle theta.

    Integration uses Gauss-Legendre nodes in theta on (0, pi) with weights
    |S^(d-1)| sin^(d-1)(theta). Off-node values come from ``func`` when it
    is given and otherwise from barycentric interpolation of the samples.

    Parameters
    ----------
    dim : int
        Sphere dimension d >= 1.
    values : array_like or callable
        Samples at the nodes or a vectorized function of theta.
    M : int
        Number of latitude nodes.
    """

    def __init__(self, dim: int, values, M: int = 512):
        if dim < 1:
            raise DomainError("sphere dimension must be >= 1")
        self.dim = int(dim)
        x, w = gauss_legendre(M)
        self.theta = 0.5 * np.pi * (x + 1.0)
        self.weights = 0.5 * np.pi * w * sphere_area(dim - 1) * np.sin(self.theta) ** (dim - 1)
        if callable(values):
            self.func: Optional[Callable] = values
            self.values = np.asarray(values(self.theta), dtype=float) * np.ones(M)
        else:
            self.func = None
            self.values = np.asarray(values, dtype=float)
            if self.values.shape != (M,):
                raise UsageError("values do not match the number of nodes")
        self._interp = None

    @classmethod
    def constant(cls, dim: int, c: float = 1.0, M: int = 512) -> "ZonalSphereFn":
        return cls(dim, lambda th: np.full_like(np.asarray(th, dtype=float), c), M)

    @property
    def M(self) -> int:
        return self.theta.size

    def __call__(self, theta) -> np.ndarray:
        theta = np.asarray(theta, dtype=float)
        if self.func is not None:
            return np.asarray(self.func(theta), dtype=float) * np.ones_like(theta)
        if self._interp is None:
            self._interp = BarycentricInterpolator(self.theta, self.values)
        return self._interp(theta)

    def scaled(self, c: float) -> "ZonalSphereFn":
        f = self.func
        if f is not None:
            return ZonalSphereFn(self.dim, lambda th: c * f(th), self.M)
        return ZonalSphereFn(self.dim, c * self.values, self.M)

    def integrate(self, values=None) -> float:
        v = self.values if values is None else values
        return float(np.dot(self.weights, v))

    def lp_norm(self, p: float) -> float:
        if not p >= 1:
            raise DomainError(f"need p >= 1, got {p}")
        return self.integrate(np.abs(self.values) ** p) ** (1.0 / p)


def stereographic_transfer(g: ZonalSphereFn, p: float, grid: Optional[RadialGrid] = None) -> RadialFn:
    """Pull a zonal function on S^n back to R^n, preserving the L^p norm.

    The point x with |x| = r corresponds to polar angle 2 arctan(r), and
    the conformal factor is (2/(1+r^2))^(n/p).
    """
    if not p > 1:
        raise DomainError(f"need p > 1, got {p}")
    grid = grid or default_grid(g.dim)
    if grid.n != g.dim:
        raise UsageError("grid dimension differs from sphere dimension")
    r = grid.r
    vals = (2.0 / (1.0 + r * r)) ** (g.dim / p) * g(2.0 * np.arctan(r))
    return RadialFn(grid, vals)
