"""Extensions from a hyperplane or a sphere into R^n and the trace constants.

The extension of boundary data g on R^(n-1) (or on S^(n-1)) is

    E g(x) = c int g(y) |x - y|^(-(n-s)) dy,
    c = Gamma((n-s)/2) / (2^s pi^(n/2) Gamma(s/2)),

the order-s Riesz potential of g times the surface measure. Both cases
reduce to a one-dimensional integral by averaging the kernel over the
(n-2)-sphere of directions orthogonal to the symmetry axis; that mean
comes from :class:`hlslab.quadrature.PowerMeanTable` with d = n - 1 and
exponent (n - s)/2. The remaining integral has an integrable peak where
the evaluation point meets the boundary and uses panels graded toward it.
"""

from __future__ import annotations

import io
import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
from scipy.interpolate import CubicSpline

from .constants import Params, log_gamma, sphere_area, stability_bounds, trace_constants
from .errors import DomainError, UsageError
from .funcspace import Flavor, RadialFn, ZonalSphereFn, bubble_profile, default_grid, lp_norm
from .quadrature import gauss_legendre, panel_rule, power_mean_table
from .riesz import hls_form
from .stability import StabilityReport, hls_stability


def _require_trace(P: Params):
    if P.n < 2 or not P.s > 0.5:
        raise DomainError("trace problems need n >= 2 and s > 1/2")


def extension_const(P: Params) -> float:
    """c = Gamma((n-s)/2) / (2^s pi^(n/2) Gamma(s/2))."""
    n, s = P.n, P.s
    return math.exp(log_gamma((n - s) / 2) - log_gamma(s / 2) - s * math.log(2) - 0.5 * n * math.log(math.pi))


def energy_const(P: Params) -> float:
    """Order-2s Riesz constant Gamma(n/2-s) / (4^s pi^(n/2) Gamma(s)).

    Composing two order-s extensions and integrating over R^n gives this
    constant times the boundary double integral with |y-z|^(-(n-2s)).
    """
    n, s = P.n, P.s
    return math.exp(log_gamma(n / 2 - s) - log_gamma(s) - 2 * s * math.log(2) - 0.5 * n * math.log(math.pi))


# ----------------------------------------------------------- boundary data

@dataclass(frozen=True, eq=False)
class BoundaryFn:
    """Radial data on R^(n-1) for the trace problem with parameters ``parent``.

    ``fn`` carries Params(n-1, s-1/2). Off-grid values come from ``func``
    when given and otherwise from a cubic spline in ln r (zero outside the
    grid range). ``scale`` is a characteristic radius used to place the
    extension grid.
    """

    parent: Params
    fn: RadialFn
    func: Optional[Callable] = None
    scale: float = 1.0

    def __post_init__(self):
        _require_trace(self.parent)
        bp = self.parent.boundary()
        if self.fn.grid.n != bp.n:
            raise UsageError("boundary data must live in dimension n-1")
        if self.fn.params is None:
            object.__setattr__(self, "fn", RadialFn(self.fn.grid, self.fn.values, bp))
        elif self.fn.params != bp:
            raise UsageError("boundary data must carry Params(n-1, s-1/2)")

    @property
    def params(self) -> Params:
        return self.fn.params

    def __call__(self, r) -> np.ndarray:
        r = np.asarray(r, dtype=float)
        if self.func is not None:
            return self.func(r)
        grid = self.fn.grid
        spline = CubicSpline(grid.t, self.fn.values)
        t = np.log(r)
        inside = (t >= grid.t[0]) & (t <= grid.t[-1])
        return np.where(inside, spline(np.clip(t, grid.t[0], grid.t[-1])), 0.0)

    @classmethod
    def from_function(cls, P: Params, func: Callable, scale: float = 1.0) -> "BoundaryFn":
        grid = default_grid(P.n - 1)
        return cls(P, RadialFn(grid, func(grid.r), P.boundary()), func, scale)

    def scaled(self, c: float) -> "BoundaryFn":
        f = self.func
        func = None if f is None else (lambda r: c * f(r))
        return BoundaryFn(self.parent, self.fn * c, func, self.scale)


def boundary_bubble(P: Params, b: float = 1.0, c: float = 1.0) -> BoundaryFn:
    """Boundary HLS extremal c (2b/(b^2+r^2))^((n-2+2s)/2) on R^(n-1)."""
    bp = Params(P.n - 1, P.s - 0.5) if P.n >= 2 and P.s > 0.5 else None
    if bp is None:
        raise DomainError("trace problems need n >= 2 and s > 1/2")
    return BoundaryFn.from_function(P, lambda r: c * bubble_profile(bp, b, Flavor.HLS, r), scale=b)


def _graded_side(w, length, panels):
    """Edges at w4 (length/w4)^(k/panels), w4 = min(w/4, length/2), per row."""
    k = np.arange(panels + 1) / panels
    w4 = np.minimum(w / 4.0, length / 2.0)
    return w4[:, None] * (length / w4)[:, None] ** k[None, :]


# ------------------------------------------------------------ flat problem

@dataclass(frozen=True, eq=False)
class HalfGrid2D:
    """Values of an axially symmetric function on (r', |t|) log grids.

    The function is even in t; ``energy`` integrates |v|^2 over R^n with
    trapezoid weights in ln r' and ln |t|.
    """

    n: int
    r: np.ndarray
    t: np.ndarray
    values: np.ndarray

    def energy(self) -> float:
        hr = math.log(self.r[1] / self.r[0])
        ht = math.log(self.t[1] / self.t[0])
        w = (self.r ** (self.n - 1))[:, None] * self.t[None, :] * hr * ht
        return float(2 * sphere_area(self.n - 2) * np.sum(self.values ** 2 * w))

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write("r,t,value\n")
        for i, r in enumerate(self.r):
            for k, t in enumerate(self.t):
                buf.write(f"{r:.17g},{t:.17g},{self.values[i, k]:.17g}\n")
        return buf.getvalue()


def extension_flat(g: BoundaryFn, Nr: int = 128, Nt: int = 64, q: int = 8,
                   panels: int = 24, r_span=(1e-5, 1e5), t_span=(1e-9, 1e5),
                   rho_span=(1e-7, 1e7), chunk: int = 512) -> HalfGrid2D:
    """Extension of boundary data into R^n on log grids in r' and t.

    For each (r', t) the integral over rho = |y'| uses Gauss-Legendre
    panels in ln rho: a uniform cover of width 1/2 merged with panels graded
    geometrically toward ln r' at the relative scale t/r'.
    """
    P = g.parent
    n, s = P.n, P.s
    nu = 0.5 * (n - s)
    table = power_mean_table(n - 1, nu)
    c = extension_const(P) * sphere_area(n - 2)
    b = g.scale
    r = b * np.geomspace(*r_span, Nr)
    t = b * np.geomspace(*t_span, Nt)
    lo, hi = math.log(b * rho_span[0]), math.log(b * rho_span[1])
    R, T = (a.ravel() for a in np.meshgrid(r, t, indexing="ij"))
    uniform = np.linspace(lo, hi, int((hi - lo) / 0.5) + 1)
    out = np.empty(R.size)
    for start in range(0, R.size, chunk):
        Rc, Tc = R[start:start + chunk], T[start:start + chunk]
        lr = np.log(Rc)
        w = Tc / Rc
        right = lr[:, None] + _graded_side(w, hi - lr, panels)
        left = lr[:, None] - _graded_side(w, lr - lo, panels)[:, ::-1]
        edges = np.sort(np.concatenate(
            [left, lr[:, None], right, np.broadcast_to(uniform, (Rc.size, uniform.size))], axis=1), axis=1)
        x, wt = panel_rule(edges, q)
        rho = np.exp(x)
        Rr, Tt = Rc[:, None], Tc[:, None]
        A = Rr * Rr + rho * rho + Tt * Tt
        omz = ((Rr - rho) ** 2 + Tt * Tt) * ((Rr + rho) ** 2 + Tt * Tt) / (A * A)
        kern = A ** (-nu) * table(np.clip(omz, 1e-300, 1.0))
        out[start:start + chunk] = c * np.sum(wt * g(rho) * rho ** (n - 1) * kern, axis=1)
    return HalfGrid2D(n, r, t, out.reshape(Nr, Nt))


def trace_ratio(g: BoundaryFn, **kw) -> float:
    """||E g||_2^2 over R^n divided by ||g||_{p'}^2, p' = 2(n-1)/(n-2+2s)."""
    ext = extension_flat(g, **kw)
    return ext.energy() / lp_norm(g.fn, g.params.hls_exp) ** 2


def extremal_trace_equality(P: Params, b: float = 1.0, **kw) -> float:
    """Trace ratio of the boundary HLS extremal with scale b."""
    return trace_ratio(boundary_bubble(P, b), **kw)


def trace_equivalence_check(corpus, P: Optional[Params] = None, **kw):
    """Constancy of A/B across boundary data.

    A = ||E g||^2 over R^n, B = the boundary double integral with kernel
    |y-z|^(-(n-2s)). The constant kappa is fixed from the first member;
    returns (residual, kappa, ratios) where residual is the largest
    relative deviation of A/B from kappa.
    """
    ratios = []
    for g in corpus:
        B = hls_form(g.fn, g.fn)
        if B == 0:
            raise DomainError("zero boundary data has no A/B ratio")
        ratios.append(extension_flat(g, **kw).energy() / B)
    ratios = np.array(ratios)
    kappa = ratios[0]
    return float(np.max(np.abs(ratios / kappa - 1))), float(kappa), ratios


def trace_stability_flat(g: BoundaryFn, case_id: str = "", tol: float = 1e-6) -> StabilityReport:
    """Boundary-level HLS stability report for the flat trace problem."""
    rep = hls_stability(g.fn, case_id, tol, bound=stability_bounds(g.params).hls_bound)
    rep.diagnostics["flat_bound"] = trace_constants(g.parent).flat_bound
    rep.diagnostics["boundary_params"] = (g.params.n, g.params.s)
    return rep


def boundary_corpus(P: Params, size: int = 10, seed: int = 0) -> list:
    """Seeded boundary data: bubbles, Gaussians and bubble pairs."""
    bp = P.boundary()
    out = []
    for i in range(size):
        rng = np.random.default_rng([seed, 50_000 + i])
        kind = i % 3
        if kind == 0:
            b = math.exp(rng.uniform(-0.7, 0.7))
            g = boundary_bubble(P, b, rng.uniform(0.5, 2.0))
        elif kind == 1:
            w = (0.5, 1.0, 2.0)[(i // 3) % 3]
            g = BoundaryFn.from_function(P, lambda r, w=w: np.exp(-r * r / (2 * w * w)), scale=w)
        else:
            b1 = math.exp(rng.uniform(-0.5, 0.5))
            b2 = b1 * rng.choice([2.0, 4.0])
            c2 = rng.uniform(-0.5, 0.5)
            g = BoundaryFn.from_function(
                P, lambda r, b1=b1, b2=b2, c2=c2: bubble_profile(bp, b1, Flavor.HLS, r)
                + c2 * bubble_profile(bp, b2, Flavor.HLS, r), scale=math.sqrt(b1 * b2))
        out.append((f"bnd{i:02d}", g))
    return out


def perturbed_boundary_corpus(P: Params, size: int = 20, seed: int = 0) -> list:
    """Boundary bubbles with a second bubble or a logistic cutoff in ln r."""
    bp = P.boundary()
    grid = default_grid(bp.n)
    out = []
    for i in range(size):
        rng = np.random.default_rng([seed, 60_000 + i])
        b = math.exp(rng.uniform(-1.0, 1.0))
        base = bubble_profile(bp, b, Flavor.HLS, grid.r)
        if i % 2 == 0:
            ratio = rng.choice([2.0, 4.0, 10.0])
            vals = base + rng.uniform(-0.3, 0.3) * bubble_profile(bp, ratio * b, Flavor.HLS, grid.r)
        else:
            cut = 1.0 / (1.0 + np.exp(-(grid.t - math.log(b) - rng.uniform(-1, 1)) / rng.uniform(0.2, 1.0)))
            vals = base * (1.0 - rng.choice([0.2, 0.5, 1.3]) * cut)
        out.append((f"pbnd{i:02d}", BoundaryFn(P, RadialFn(grid, vals, bp), None, b)))
    return out


# ---------------------------------------------------------- sphere problem

@dataclass(frozen=True, eq=False)
class SphereExtension:
    """Extension of zonal data on S^(n-1) on a (|x|, polar angle) grid.

    Radii are split at |x| = 1: inside R = 1/(1+e^-u), outside R = 1+e^u,
    each with trapezoid weights in u; angles use Gauss-Legendre nodes.
    """

    n: int
    R: np.ndarray
    dR: np.ndarray
    theta: np.ndarray
    wtheta: np.ndarray
    values: np.ndarray

    def energy(self) -> float:
        rad = self.dR * self.R ** (self.n - 1)
        ang = sphere_area(self.n - 2) * self.wtheta * np.sin(self.theta) ** (self.n - 2)
        return float(np.sum(self.values ** 2 * rad[:, None] * ang[None, :]))

    def radial_spread(self) -> float:
        """Largest relative variation over angles, over all radii."""
        v = self.values
        return float(np.max((v.max(axis=1) - v.min(axis=1)) / np.abs(v).max(axis=1)))

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write("r,theta,value\n")
        for i, R in enumerate(self.R):
            for k, th in enumerate(self.theta):
                buf.write(f"{R:.17g},{th:.17g},{self.values[i, k]:.17g}\n")
        return buf.getvalue()


def _sphere_radii(n_in: int, n_out: int, u_in=(-30.0, 23.0), u_out=(-23.0, 12.0)):
    ui = np.linspace(*u_in, n_in)
    hi = ui[1] - ui[0]
    Ri = 1.0 / (1.0 + np.exp(-ui))
    dRi = hi * Ri * (1.0 - Ri)
    uo = np.linspace(*u_out, n_out)
    ho = uo[1] - uo[0]
    Ro = 1.0 + np.exp(uo)
    dRo = ho * np.exp(uo)
    return np.concatenate([Ri, Ro]), np.concatenate([dRi, dRo])


def sphere_extension_values(P: Params, g: ZonalSphereFn, R, theta, q: int = 8,
                            panels: int = 24, chunk: int = 512) -> np.ndarray:
    """Extension of zonal ``g`` at points (R, theta), broadcast together."""
    _require_trace(P)
    n = P.n
    if g.dim != n - 1:
        raise UsageError("boundary sphere must be S^(n-1)")
    nu = 0.5 * (n - P.s)
    table = power_mean_table(n - 1, nu)
    c = extension_const(P) * sphere_area(n - 2)
    R, theta = np.broadcast_arrays(np.asarray(R, float), np.asarray(theta, float))
    shape = R.shape
    R, theta = R.ravel(), theta.ravel()
    uniform = np.linspace(0.0, math.pi, 33)
    out = np.empty(R.size)
    for start in range(0, R.size, chunk):
        Rc, th = R[start:start + chunk], theta[start:start + chunk]
        w = np.abs(Rc - 1.0) / np.sqrt(Rc)
        right = th[:, None] + _graded_side(w, math.pi - th, panels)
        left = th[:, None] - _graded_side(w, th, panels)[:, ::-1]
        edges = np.sort(np.concatenate(
            [left, th[:, None], right, np.broadcast_to(uniform, (Rc.size, uniform.size))], axis=1), axis=1)
        edges = np.clip(edges, 0.0, math.pi)
        a, wt = panel_rule(edges, q)
        Rr, tt = Rc[:, None], th[:, None]
        dm = (Rr - 1.0) ** 2 + 4 * Rr * np.sin(0.5 * (a - tt)) ** 2
        dp = (Rr - 1.0) ** 2 + 4 * Rr * np.sin(0.5 * (a + tt)) ** 2
        A = 0.5 * (dm + dp)
        omz = dm * dp / (A * A)
        kern = A ** (-nu) * table(np.clip(omz, 1e-300, 1.0))
        out[start:start + chunk] = c * np.sum(wt * g(a) * np.sin(a) ** (n - 2) * kern, axis=1)
    return out.reshape(shape)


def extension_sphere(P: Params, g: ZonalSphereFn, n_in: int = 160, n_out: int = 120,
                     n_theta: int = 24, **kw) -> SphereExtension:
    """Extension of zonal data on S^(n-1) into R^n."""
    R, dR = _sphere_radii(n_in, n_out)
    x, w = gauss_legendre(n_theta)
    theta = 0.5 * math.pi * (x + 1.0)
    wtheta = 0.5 * math.pi * w
    vals = sphere_extension_values(P, g, R[:, None], theta[None, :], **kw)
    return SphereExtension(P.n, R, dR, theta, wtheta, vals)


def sphere_trace_ratio(P: Params, g: ZonalSphereFn, **kw) -> float:
    """||E g||_2^2 over R^n divided by ||g||_{p'}^2 on S^(n-1)."""
    ext = extension_sphere(P, g, **kw)
    return ext.energy() / g.lp_norm(P.boundary().hls_exp) ** 2


def extremal_trace_sphere_equality(P: Params, **kw) -> float:
    """Sphere trace ratio of the constant function."""
    return sphere_trace_ratio(P, ZonalSphereFn.constant(P.n - 1), **kw)
