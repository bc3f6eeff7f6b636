"""Planar competing symmetries and polarization flows on a cell grid.

Everything here lives on a square [-L, L]^2 split into N x N cells with
N even, so the origin is a cell corner and the cell centres sit at
half-integer multiples of the cell width. Reflections across cell
boundary lines and across diagonals through cell corners map the grid
onto itself, which makes polarization an exact permutation of values.
"""

from __future__ import annotations

import io
import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import NamedTuple, Optional

import numpy as np
from scipy import integrate, ndimage
from scipy.optimize import minimize

from .constants import Params, sphere_area
from .errors import DomainError, UsageError
from .stability import _best_amplitude


@dataclass(frozen=True, eq=False)
class GridFn2D:
    """Cell-centred values on [-L, L]^2 with N x N cells."""

    values: np.ndarray
    L: float = 12.0
    params: Params = Params(2, 0.5)

    def __post_init__(self):
        v = np.array(self.values, dtype=float)
        if v.ndim != 2 or v.shape[0] != v.shape[1] or v.shape[0] % 2:
            raise UsageError("values must be a square array with an even side")
        if not np.all(np.isfinite(v)):
            raise DomainError("grid values must be finite")
        if self.params.n != 2:
            raise UsageError("planar grid functions need n = 2")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @property
    def N(self) -> int:
        return self.values.shape[0]

    @property
    def h(self) -> float:
        return 2.0 * self.L / self.N

    @property
    def p(self) -> float:
        return self.params.hls_exp

    def centres(self) -> tuple[np.ndarray, np.ndarray]:
        return grid_centres(self.N, self.L)

    def like(self, values) -> "GridFn2D":
        return GridFn2D(values, self.L, self.params)

    def same_grid(self, other: "GridFn2D"):
        if self.N != other.N or self.L != other.L or self.params != other.params:
            raise UsageError("grid functions live on different grids")

    def lp_norm(self, p: Optional[float] = None) -> float:
        p = self.p if p is None else p
        return float((self.h ** 2 * np.sum(np.abs(self.values) ** p)) ** (1.0 / p))

    def __sub__(self, other):
        self.same_grid(other)
        return self.like(self.values - other.values)

    def __add__(self, other):
        self.same_grid(other)
        return self.like(self.values + other.values)

    def __mul__(self, c):
        return self.like(float(c) * self.values)

    __rmul__ = __mul__

    @classmethod
    def from_function(cls, func, N: int = 128, L: float = 12.0, s: float = 0.5) -> "GridFn2D":
        x, y = grid_centres(N, L)
        return cls(func(x, y), L, Params(2, s))


@lru_cache(maxsize=8)
def grid_centres(N: int, L: float) -> tuple[np.ndarray, np.ndarray]:
    h = 2.0 * L / N
    c = -L + h * (np.arange(N) + 0.5)
    x, y = np.meshgrid(c, c, indexing="ij")
    x.setflags(write=False)
    y.setflags(write=False)
    return x, y


def planar_bubble(params: Params, N: int, L: float, a=(0.0, 0.0), b: float = 1.0,
                  c: float = 1.0) -> GridFn2D:
    """c (2b / (b^2 + |x-a|^2))^((n+2s)/2) sampled at cell centres."""
    x, y = grid_centres(N, L)
    e = 0.5 * (params.n + 2 * params.s)
    r2 = (x - a[0]) ** 2 + (y - a[1]) ** 2
    return GridFn2D(c * (2.0 * b / (b * b + r2)) ** e, L, params)


# ------------------------------------------------------------- HLS form

def self_cell_mean(h: float, lam: float) -> float:
    """Mean of |z|^(-lam) over a square of side h centred at 0, lam < 2.

    Over the square [-a, a]^2 the integral is
    8 a^(2-lam)/(2-lam) int_0^(pi/4) cos(t)^(lam-2) dt.
    """
    if not lam < 2:
        raise DomainError("self-cell integral diverges for lam >= 2")
    a = 0.5 * h
    ang, _ = integrate.quad(lambda t: math.cos(t) ** (lam - 2), 0.0, math.pi / 4, epsabs=0, epsrel=1e-13)
    return 8 * a ** (2 - lam) / (2 - lam) * ang / (h * h)


@lru_cache(maxsize=8)
def _kernel_fft(N: int, L: float, lam: float) -> np.ndarray:
    h = 2.0 * L / N
    k = np.fft.fftfreq(2 * N, 1.0 / (2 * N))
    dx, dy = np.meshgrid(k, k, indexing="ij")
    d2 = (dx * dx + dy * dy) * h * h
    with np.errstate(divide="ignore"):
        ker = d2 ** (-0.5 * lam)
    ker[0, 0] = self_cell_mean(h, lam)
    out = np.fft.rfft2(ker)
    out.setflags(write=False)
    return out


def hls2d(f: GridFn2D, g: GridFn2D) -> float:
    """Cell-pair sum of f(x) |x-y|^(-lam) g(y) dx dy on the grid.

    The diagonal uses the exact mean of |z|^(-lam) over a cell; the
    convolution is evaluated with zero-padded FFTs.
    """
    f.same_grid(g)
    N = f.N
    kf = _kernel_fft(N, f.L, f.params.lam)
    conv = np.fft.irfft2(np.fft.rfft2(g.values, s=(2 * N, 2 * N)) * kf, s=(2 * N, 2 * N))[:N, :N]
    return float(f.h ** 4 * np.sum(f.values * conv))


# ---------------------------------------------------------- rearrangement

def _require_nonnegative(f: GridFn2D):
    if np.any(f.values < 0):
        raise DomainError("input must be nonnegative")


@lru_cache(maxsize=8)
def _radial_order(N: int) -> np.ndarray:
    """Cell indices sorted by distance from the origin, ties by index."""
    i = 2 * np.arange(N) + 1 - N
    d2 = (i[:, None] ** 2 + i[None, :] ** 2).ravel()
    order = np.argsort(d2, kind="stable")
    order.setflags(write=False)
    return order


def decreasing_rearrangement(f: GridFn2D) -> GridFn2D:
    """Values sorted decreasingly and placed on cells by distance from the origin."""
    _require_nonnegative(f)
    vals = np.sort(f.values.ravel(), kind="stable")[::-1]
    out = np.empty(f.N * f.N)
    out[_radial_order(f.N)] = vals
    return f.like(out.reshape(f.N, f.N))


class HalfPlane(NamedTuple):
    """Reflection line with integer offset ``m`` and favored side.

    ``kind`` selects the line: "x" is x = m h/2, "y" is y = m h/2, "d" is
    y - x = m h and "a" is x + y = m h, with h the cell width. Each of these
    maps cell centres to cell centres. The favored side is the one holding
    the origin; for m = 0, ``origin_side`` = +1 favors the side where the
    signed coordinate is negative and -1 the other one.
    """

    kind: str
    m: int
    origin_side: int = 1


def _reflect_index(N: int, H: HalfPlane):
    i, j = np.meshgrid(np.arange(N), np.arange(N), indexing="ij")
    c = N // 2
    u, v = i - c, j - c  # cell (u, v) has centre ((u + 1/2) h, (v + 1/2) h)
    m = H.m
    if H.kind == "x":
        ri, rj, side = m - 1 - u, v, 2 * u + 1 - m
    elif H.kind == "y":
        ri, rj, side = u, m - 1 - v, 2 * v + 1 - m
    elif H.kind == "d":
        ri, rj, side = v - m, u + m, v - u - m
    elif H.kind == "a":
        ri, rj, side = m - 1 - v, m - 1 - u, u + v + 1 - m
    else:
        raise UsageError(f"unknown reflection kind {H.kind!r}")
    return ri + c, rj + c, side


def polarize(f: GridFn2D, H: HalfPlane) -> GridFn2D:
    """Two-point rearrangement across the reflection line of ``H``.

    Each pair {x, sigma x} receives the larger value on the favored side
    and the smaller on the other. Cells on the line, and cells whose mirror
    image falls outside the grid, keep their values, so the value multiset
    is preserved exactly.
    """
    _require_nonnegative(f)
    N = f.N
    if not abs(H.m) <= N:
        raise UsageError("reflection line lies outside the grid")
    ri, rj, side = _reflect_index(N, H)
    inside = (ri >= 0) & (ri < N) & (rj >= 0) & (rj < N)
    v = f.values
    mirror = v.copy()
    mirror[inside] = v[ri[inside], rj[inside]]
    # the origin has signed coordinate -m
    if H.m == 0:
        favored = side < 0 if H.origin_side > 0 else side > 0
    else:
        favored = (side < 0) if H.m > 0 else (side > 0)
    unfavored = (side != 0) & ~favored
    out = np.where(favored, np.maximum(v, mirror), np.where(unfavored, np.minimum(v, mirror), v))
    return f.like(out)


def random_halfplane(rng: np.random.Generator, spread: int) -> HalfPlane:
    """Random origin-favoring reflection with offset 1 <= |m| <= spread.

    Lines through the origin are left out: they only permute cells at equal
    distance from the origin and would keep reshuffling ties.
    """
    kind = ("x", "y", "d", "a")[rng.integers(4)]
    m = int(rng.integers(1, spread + 1)) * (1 if rng.random() < 0.5 else -1)
    return HalfPlane(kind, m)


# -------------------------------------------------------------- conformal

def conformal_U(f: GridFn2D, p: Optional[float] = None, report: bool = False,
                tail: bool = True, order: int = 3):
    """(Uf)(x) = (2/|x-e|^2)^(n/p) f(psi(x)) with e = (0, 1).

    f(psi(x)) with psi(x) = (2 x_1, |x|^2 - 1) / |x - e|^2 is interpolated
    from the cell values by a spline of the given ``order`` (1: bilinear).
    Points psi(x) beyond the outermost cell centres take the value
    A |psi|^(-2n/p), with A fitted on the ring of cells at distance about L
    from the origin (``tail=False`` uses zero instead).
    The map sends a small disc around e to the exterior of the box, so
    without the extension each application drops that part of the mass.
    With ``report`` the relative change of the L^p norm is returned too.
    """
    p = f.p if p is None else p
    if not p > 1:
        raise DomainError("need p > 1")
    x, y = f.centres()
    d2 = x * x + (y - 1.0) ** 2
    px = 2.0 * x / d2
    py = (x * x + y * y - 1.0) / d2
    decay = 2.0 * f.params.n / p
    vals = _interpolate(f, px, py, order)
    if tail:
        r = np.hypot(x, y)
        ring = (r >= f.L - f.h) & (r < f.L)
        amp = float(np.mean(f.values[ring] * r[ring] ** decay))
        edge = f.L - 0.5 * f.h
        outside = (np.abs(px) > edge) | (np.abs(py) > edge)
        rho2 = np.maximum(px * px + py * py, 1e-300)
        vals = np.where(outside, amp * rho2 ** (-0.5 * decay), vals)
    vals = (2.0 / d2) ** (f.params.n / p) * vals
    out = f.like(vals)
    if report:
        n0 = f.lp_norm(p)
        return out, (out.lp_norm(p) - n0) / n0 if n0 > 0 else 0.0
    return out


def _interpolate(f: GridFn2D, px, py, order: int):
    """Spline interpolation of cell-centre values, zero beyond the grid.

    Order 1 is bilinear; order 3 is a cubic spline, clipped at zero so
    that nonnegative inputs stay nonnegative.
    """
    gx = (px + f.L) / f.h - 0.5
    gy = (py + f.L) / f.h - 0.5
    out = ndimage.map_coordinates(f.values, [gx, gy], order=order, mode="constant", cval=0.0)
    return np.maximum(out, 0.0) if order > 1 and np.all(f.values >= 0) else out


def limit_profile(f0: GridFn2D) -> GridFn2D:
    """||f0||_p |S^n|^(-1/p) (2/(1+|x|^2))^(n/p)."""
    p = f0.p
    x, y = f0.centres()
    amp = f0.lp_norm() * sphere_area(2) ** (-1.0 / p)
    return f0.like(amp * (2.0 / (1.0 + x * x + y * y)) ** (2.0 / p))


# ------------------------------------------------------ manifold distance

class Fit2D(NamedTuple):
    d: float
    a: tuple
    b: float
    c: float
    converged: bool


class _BubbleFit:
    """Cost ||f - c H_{a,b}||_p^p and its gradient in (a1, a2, ln b, c)."""

    def __init__(self, f: GridFn2D):
        x, y = f.centres()
        self.x, self.y = x.ravel(), y.ravel()
        self.v = f.values.ravel()
        self.p = f.p
        self.e = 0.5 * (f.params.n + 2 * f.params.s)
        self.w = f.h ** 2
        ref = planar_bubble(f.params, f.N, f.L).lp_norm()
        self.bound = 2.05 * f.lp_norm() / ref

    def profile(self, a1, a2, logb):
        b = math.exp(logb)
        q = b * b + (self.x - a1) ** 2 + (self.y - a2) ** 2
        return (2.0 * b / q) ** self.e, q, b

    def best_c(self, theta):
        H = self.profile(*theta[:3])[0]
        c, val = _best_amplitude(self.v, H[None, :], np.full(H.size, self.w), self.p,
                                 self.bound, rtol=1e-12)
        return float(c[0]), float(val[0])

    def value_grad(self, z):
        a1, a2, logb, c = z
        H, q, b = self.profile(a1, a2, logb)
        res = self.v - c * H
        g = np.abs(res) ** (self.p - 1) * np.sign(res)
        val = self.w * np.sum(np.abs(res) * np.abs(g))
        pull = -self.p * self.w * g * c * H * self.e
        grad = np.array([
            np.sum(pull * 2 * (self.x - a1) / q),
            np.sum(pull * 2 * (self.y - a2) / q),
            np.sum(pull * (1 - 2 * b * b / q)),
            -self.p * self.w * np.sum(g * H),
        ])
        return val, grad


def manifold_distance_2d(f: GridFn2D, starts: int = 3, seed: int = 0,
                         extra: tuple = ()) -> Fit2D:
    """Multi-start fit of c (2b/(b^2+|x-a|^2))^((n+2s)/2) in L^p.

    Candidate starts (moment-based, the peak cell, the origin, randomized
    ones and any ``extra`` (a1, a2, ln b) triples supplied by the caller)
    are ranked by their cost at the optimal amplitude; the best ones are
    refined jointly in (a, ln b, c) by L-BFGS with analytic gradients. The
    amplitude is re-solved exactly at the end, so the result is an upper
    bound on the distance to the bubble family.
    """
    p = f.p
    nf = f.lp_norm()
    if nf == 0:
        return Fit2D(0.0, (0.0, 0.0), 1.0, 0.0, True)
    fit = _BubbleFit(f)
    x, y = f.centres()
    mass = np.abs(f.values) ** p
    tot = mass.sum()
    cx, cy = float((x * mass).sum() / tot), float((y * mass).sum() / tot)
    spread = math.sqrt(float((((x - cx) ** 2 + (y - cy) ** 2) * mass).sum() / tot)) + 1e-3
    i, j = np.unravel_index(np.argmax(np.abs(f.values)), f.values.shape)
    rng = np.random.default_rng(seed)
    ls = math.log(spread)
    cand = [(cx, cy, ls), (cx, cy, ls - 1.0), (float(x[i, j]), float(y[i, j]), ls - 0.5), (0.0, 0.0, 0.0)]
    cand += [(cx + rng.normal() * spread, cy + rng.normal() * spread, ls + rng.normal())
             for _ in range(max(starts - 2, 0))]
    cand += [tuple(t) for t in extra]
    scored = sorted(((fit.best_c(t), t) for t in cand), key=lambda item: item[0][1])
    best_val, best_theta, ok = math.inf, None, True
    for (c0, val0), t0 in scored[:starts]:
        z0 = np.array([*t0, c0])
        res = minimize(fit.value_grad, z0, jac=True, method="L-BFGS-B",
                       options={"maxiter": 500, "ftol": 1e-15, "gtol": 1e-12})
        cand_theta, cand_val = (res.x[:3], res.fun) if res.fun < val0 else (np.array(t0), val0)
        if cand_val < best_val:
            best_val, best_theta, ok = cand_val, cand_theta, bool(res.success) or res.fun >= val0
    c, val = fit.best_c(best_theta)
    return Fit2D(val ** (1.0 / p), (float(best_theta[0]), float(best_theta[1])),
                 math.exp(best_theta[2]), c, ok)


def _theta(fit: Fit2D) -> tuple:
    return (fit.a[0], fit.a[1], math.log(fit.b))


def lipschitz_distance_check(f: GridFn2D, g: GridFn2D, slack: float = 1e-3,
                             fit_f: Optional[Fit2D] = None,
                             fit_g: Optional[Fit2D] = None) -> bool:
    """|d(f) - d(g)| <= ||f - g||_p + 2 slack for the computed distances.

    Each fit is also tried from the other's optimum, so the two upper
    bounds are compared on a common candidate set.
    """
    f.same_grid(g)
    fit_f = fit_f or manifold_distance_2d(f)
    fit_g = fit_g or manifold_distance_2d(g)
    df = min(fit_f.d, manifold_distance_2d(f, starts=1, extra=(_theta(fit_g),)).d)
    dg = min(fit_g.d, manifold_distance_2d(g, starts=1, extra=(_theta(fit_f),)).d)
    scale = max(f.lp_norm(), g.lp_norm(), 1e-300)
    return abs(df - dg) <= (f - g).lp_norm() + 2 * slack * scale


# ----------------------------------------------------------------- traces

@dataclass
class FlowTrace:
    """Per-step diagnostics of a flow, with the iterates' fitted bubbles."""

    step: list = field(default_factory=list)
    lp_norm: list = field(default_factory=list)
    hls_value: list = field(default_factory=list)
    dist_rel: list = field(default_factory=list)
    dist_to_h: list = field(default_factory=list)
    displacement: list = field(default_factory=list)
    fits: list = field(default_factory=list)
    norm_error: list = field(default_factory=list)

    def record(self, k, f: GridFn2D, target: GridFn2D, fit: Optional[Fit2D], prev=None):
        nf = f.lp_norm()
        self.step.append(k)
        self.lp_norm.append(nf)
        self.hls_value.append(hls2d(f, f))
        self.dist_to_h.append((f - target).lp_norm())
        self.fits.append(fit)
        self.dist_rel.append(math.nan if fit is None else fit.d ** 2 / nf ** 2)
        self.displacement.append(0.0 if prev is None else (f - prev).lp_norm())

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write("step,lp_norm,hls_value,dist_rel,dist_to_h\n")
        for row in zip(self.step, self.lp_norm, self.hls_value, self.dist_rel, self.dist_to_h):
            buf.write("%d,%.17g,%.17g,%.17g,%.17g\n" % row)
        return buf.getvalue()


def competing_symmetries(f0: GridFn2D, K: int = 30, distances: bool = False,
                         keep: bool = False):
    """Iterate f_k = (R U)^k f0 and record the distance to the limit bubble.

    With ``keep`` the iterates are returned as well.
    """
    _require_nonnegative(f0)
    if not np.any(f0.values > 0):
        raise DomainError("competing symmetries need a nonzero input")
    h = limit_profile(f0)
    trace = FlowTrace()
    f = f0
    iterates = [f0]
    fit = manifold_distance_2d(f) if distances else None
    trace.record(0, f, h, fit)
    for k in range(1, K + 1):
        u, err = conformal_U(f, report=True)
        nxt = decreasing_rearrangement(u)
        trace.norm_error.append(err)
        if distances:
            extra = () if fit is None else (_theta(fit),)
            fit = manifold_distance_2d(nxt, starts=2, extra=extra)
        trace.record(k, nxt, h, fit, prev=f)
        f = nxt
        if keep:
            iterates.append(f)
    return (trace, iterates) if keep else trace


def discrete_flow(f0: GridFn2D, steps: int = 500, seed: int = 0, spread: Optional[int] = None,
                  distances: bool = False, keep: bool = False):
    """Randomized sequence of polarizations with origin-favoring half-planes.

    Offsets are drawn up to ``spread`` half-cells from the origin (default N/16).
    The trace distance column is measured to the decreasing rearrangement
    of ``f0``, the flow's limit.
    """
    _require_nonnegative(f0)
    rng = np.random.default_rng(seed)
    spread = f0.N // 16 if spread is None else spread
    target = decreasing_rearrangement(f0)
    trace = FlowTrace()
    f = f0
    iterates = [f0]
    fit = manifold_distance_2d(f) if distances else None
    trace.record(0, f, target, fit)
    for k in range(1, steps + 1):
        H = random_halfplane(rng, spread)
        nxt = polarize(f, H)
        if distances:
            fit = manifold_distance_2d(nxt, starts=1, extra=(_theta(fit),))
        trace.record(k, nxt, target, fit, prev=f)
        f = nxt
        if keep:
            iterates.append(f)
    return (trace, iterates) if keep else trace


def first_crossing(trace: FlowTrace, delta: float) -> Optional[int]:
    """First step whose relative squared distance is at most ``delta``."""
    for k, d in zip(trace.step, trace.dist_rel):
        if d <= delta:
            return k
    return None


# ----------------------------------------------------------------- corpus

def flow_corpus(size: int = 6, seed: int = 0, N: int = 128, L: float = 12.0,
                s: float = 0.5) -> list:
    """Seeded nonnegative planar inputs: off-centre bumps and bump pairs."""
    out = []
    x, y = grid_centres(N, L)
    for i in range(size):
        rng = np.random.default_rng([seed, 40_000 + i])
        vals = np.zeros((N, N))
        for _ in range(1 + i % 2):
            cx, cy = rng.uniform(-2.5, 2.5, size=2)
            w = rng.uniform(0.6, 1.5)
            vals += rng.uniform(0.5, 1.5) * np.exp(-((x - cx) ** 2 + (y - cy) ** 2) / (2 * w * w))
        kind = "bump" if i % 2 == 0 else "pair"
        out.append((f"flow{i:02d}_{kind}", GridFn2D(vals, L, Params(2, s))))
    return out
