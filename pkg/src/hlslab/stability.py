"""Deficits, distances to the extremal families and stability ratios.

Distances are minimized over centred bubbles only (scale b and amplitude
c), so every reported distance is an upper bound on the distance to the
full family and every ``ratio >= bound`` assertion is conservative.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field
from typing import NamedTuple, Optional

import numpy as np
from scipy.optimize import minimize_scalar

from .constants import (Params, _is_integer, gen_binom, m_of_delta, sobolev_sharp_constant,
                        sphere_hls_constant, stability_bounds)
from .errors import DomainError, NearManifoldError, UsageError
from .funcspace import (BubbleCombo, Flavor, RadialFn, RadialGrid, ZonalSphereFn,
                        bubble_profile, default_grid, lp_norm, make_bubble, split_parts,
                        stereographic_transfer)
from .riesz import (hls_form, hs_cross, hs_diag, hs_inner, l2_inner, neg_frac_norm_sq, riesz_const,
                    sphere_hls_form)

NEAR_MANIFOLD = 1e-12
FD_EPS = 1e-4


@dataclass
class StabilityReport:
    """Deficit, squared distance and their ratio against a lower bound."""

    n: int
    s: float
    case_id: str
    deficit: float
    dist_sq: float
    ratio: float
    bound: float
    margin: float
    passed: bool
    bstar: float
    cstar: float
    diagnostics: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["pass"] = d.pop("passed")
        d.pop("diagnostics")
        return d

    def to_json(self) -> str:
        return json.dumps(dict(schema=1, **self.to_dict()), sort_keys=True)


class ManifoldFit(NamedTuple):
    dist_sq: float
    b: float
    c: float
    converged: bool


@dataclass
class Check:
    """Outcome of an inequality check with its worst margin."""

    ok: bool
    margin: float
    detail: dict = field(default_factory=dict)

    def __bool__(self):
        return bool(self.ok)


def _params(g: RadialFn) -> Params:
    if g.params is None:
        raise UsageError("radial function carries no params")
    return g.params


# ---------------------------------------------------------------- HLS side

def hls_deficit(g: RadialFn) -> float:
    """||g||_p^2 - S^-1 ||(-Delta)^(-s/2) g||_2^2 with p = 2n/(n+2s)."""
    P = _params(g)
    return lp_norm(g, P.hls_exp) ** 2 - neg_frac_norm_sq(g) / sobolev_sharp_constant(P)


def _best_amplitude(v, H, wts, p, bound, iters=40, rtol=1e-13):
    """Minimize sum w |v - c H|^p over c, row-wise over H.

    The derivative in c is increasing, so its root is bracketed in
    [-bound, bound] and located by the Illinois variant of regula falsi.
    """
    def slope(c):
        res = v[None, :] - c[:, None] * H
        return -np.sum(wts * np.abs(res) ** (p - 1) * np.sign(res) * H, axis=1)

    lo = np.full(H.shape[0], -bound)
    hi = np.full(H.shape[0], bound)
    f_lo, f_hi = slope(lo), slope(hi)
    side = np.zeros(H.shape[0])
    for _ in range(iters):
        denom = f_hi - f_lo
        c = np.where(denom > 0, (lo * f_hi - hi * f_lo) / np.where(denom > 0, denom, 1.0),
                     0.5 * (lo + hi))
        c = np.clip(c, lo, hi)
        f = slope(c)
        up = f > 0
        hi, lo = np.where(up, c, hi), np.where(up, lo, c)
        f_hi = np.where(up, f, np.where(side > 0, 0.5 * f_hi, f_hi))
        f_lo = np.where(up, np.where(side < 0, 0.5 * f_lo, f_lo), f)
        side = np.where(up, -1.0, 1.0)
        if np.all(hi - lo <= rtol * bound):
            break
    c = 0.5 * (lo + hi)
    cost = np.sum(wts * np.abs(v[None, :] - c[:, None] * H) ** p, axis=1)
    return c, cost


def hls_manifold_distance(g: RadialFn, b_range=(1e-3, 1e3), n_scan: int = 49) -> ManifoldFit:
    """Squared L^p distance from ``g`` to centred HLS bubbles c H_b.

    The scale is located by a log-grid scan on every fourth radial node
    and refined on the full grid by bounded Brent search in ln b. For each
    b the amplitude solves the monotone equation d/dc ||g - c H_b||_p^p = 0.
    """
    P = _params(g)
    p = P.hls_exp
    grid = g.grid
    wts = grid.area * grid.weights
    v = g.values
    norm_g = lp_norm(g, p)
    if norm_g == 0:
        return ManifoldFit(0.0, 1.0, 0.0, True)
    norm_h = lp_norm(make_bubble(P, 1.0, flavor=Flavor.HLS).sample(grid), p)
    bound = 2.05 * norm_g / norm_h

    def cost_of(logb, stride=1):
        logb = np.atleast_1d(logb)
        r = grid.r[::stride]
        H = bubble_profile(P, np.exp(logb)[:, None], Flavor.HLS, r[None, :])
        return _best_amplitude(v[::stride], H, stride * wts[::stride], p, bound)

    logs = np.linspace(math.log(b_range[0]), math.log(b_range[1]), n_scan)
    k = int(np.argmin(cost_of(logs, stride=4)[1]))
    c_k, cost_k = cost_of(logs[k])
    best = (cost_k[0], logs[k], c_k[0])
    converged = 0 < k < n_scan - 1
    if converged:
        res = minimize_scalar(lambda x: float(cost_of(x)[1][0]),
                              bounds=(logs[k - 1], logs[k + 1]),
                              method="bounded", options={"xatol": 1e-7})
        converged = bool(res.success)
        if res.fun < best[0]:
            c_ref, cost_ref = cost_of(res.x)
            best = (cost_ref[0], float(res.x), c_ref[0])
    cost, logb, c = best
    return ManifoldFit(float(cost ** (2.0 / p)), float(math.exp(logb)), float(c), converged)


def _report(P, case_id, deficit, fit, bound, scale, tol):
    if fit.dist_sq < NEAR_MANIFOLD * scale:
        raise NearManifoldError("input is within tolerance of the extremal family", deficit)
    ratio = deficit / fit.dist_sq
    return StabilityReport(
        n=P.n, s=P.s, case_id=case_id, deficit=float(deficit), dist_sq=float(fit.dist_sq),
        ratio=float(ratio), bound=float(bound), margin=float(ratio - bound),
        passed=bool(ratio >= bound - tol), bstar=fit.b, cstar=fit.c,
        diagnostics={"converged": fit.converged, "tol": tol, "scale": scale},
    )


def hls_stability(g: RadialFn, case_id: str = "", tol: float = 1e-6,
                  bound: Optional[float] = None) -> StabilityReport:
    """HLS stability ratio of ``g`` against the explicit lower bound."""
    P = _params(g)
    bound = stability_bounds(P).hls_bound if bound is None else bound
    deficit = hls_deficit(g)
    fit = hls_manifold_distance(g)
    return _report(P, case_id, deficit, fit, bound, lp_norm(g, P.hls_exp) ** 2, tol)


# ------------------------------------------------------------ Sobolev side

def _require_sobolev(F: BubbleCombo):
    if F.flavor is not Flavor.SOBOLEV:
        raise UsageError("expected a Sobolev-flavor bubble combination")


def sobolev_deficit(F: BubbleCombo, grid: Optional[RadialGrid] = None) -> float:
    """S ||(-Delta)^(s/2) F||_2^2 - ||F||_{2*}^2."""
    _require_sobolev(F)
    P = F.params
    grid = grid or default_grid(P.n)
    return sobolev_sharp_constant(P) * hs_inner(F, F, grid) - lp_norm(F.sample(grid), P.sob_exp) ** 2


def sobolev_manifold_distance(F: BubbleCombo, grid: Optional[RadialGrid] = None,
                              b_range=(1e-3, 1e3), n_scan: int = 121) -> ManifoldFit:
    """Squared s-order distance from ``F`` to centred bubbles c U_b.

    For fixed b the optimal amplitude is the orthogonal projection, so the
    distance is ||F||^2 - <F, U_b>^2 / <U_b, U_b>, maximized over b.
    """
    _require_sobolev(F)
    P = F.params
    grid = grid or default_grid(P.n)
    total = hs_inner(F, F, grid)

    def proj(logb):
        b = np.exp(np.atleast_1d(logb))
        ip = F.coefs @ hs_cross(P, F.scales, b, grid)
        self_ip = hs_diag(P, b, grid)
        return ip / self_ip, ip * ip / self_ip

    logs = np.linspace(math.log(b_range[0]), math.log(b_range[1]), n_scan)
    _, pr_scan = proj(logs)
    k = int(np.argmax(pr_scan))
    logb, pr = logs[k], pr_scan[k]
    converged = 0 < k < n_scan - 1
    if converged:
        res = minimize_scalar(lambda x: -float(proj(x)[1][0]),
                              bracket=(logs[k - 1], logs[k], logs[k + 1]),
                              method="golden", tol=1e-10)
        converged = bool(res.success)
        if -res.fun > pr:
            logb, pr = float(res.x), -res.fun
    c = float(proj(logb)[0][0])
    return ManifoldFit(float(max(total - pr, 0.0)), float(math.exp(logb)), c, converged)


def sobolev_stability(F: BubbleCombo, case_id: str = "", tol: float = 1e-6,
                      grid: Optional[RadialGrid] = None) -> StabilityReport:
    """Sobolev stability ratio of ``F`` against the explicit lower bound."""
    P = F.params
    grid = grid or default_grid(P.n)
    bounds = stability_bounds(P)
    deficit = sobolev_deficit(F, grid)
    fit = sobolev_manifold_distance(F, grid)
    rep = _report(P, case_id, deficit, fit, bounds.sob_bound, hs_inner(F, F, grid), tol)
    rep.diagnostics["koenig_upper"] = bounds.koenig_upper
    return rep


def relative_distance(F: BubbleCombo, fit: Optional[ManifoldFit] = None,
                      grid: Optional[RadialGrid] = None) -> float:
    """delta = dist^2 / ||F||^2 in the s-order norm."""
    fit = fit or sobolev_manifold_distance(F, grid)
    return fit.dist_sq / hs_inner(F, F, grid)


def local_grid(n: int) -> RadialGrid:
    """Wide dense grid; near-manifold deficits are ~1e-9 and feel the bubble tails."""
    return RadialGrid(n, 1e-8, 1e8, 8192)


def local_sobolev_check(F: BubbleCombo, tol: float = 1e-6,
                        grid: Optional[RadialGrid] = None) -> Optional[Check]:
    """Near-manifold bound ratio >= S m(delta) for nonnegative ``F``.

    Defaults to :func:`local_grid`.
    Returns None when the bound is vacuous (m(delta) <= 0) or ``F`` takes
    negative values.
    """
    P = F.params
    grid = grid or local_grid(P.n)
    if np.any(F.sample(grid).values < 0):
        return None
    fit = sobolev_manifold_distance(F, grid)
    delta = fit.dist_sq / hs_inner(F, F, grid)
    if not 0 < delta < 1:
        return None
    m = m_of_delta(P, delta)
    if m <= 0:
        return None
    S = sobolev_sharp_constant(P)
    ratio = sobolev_deficit(F, grid) / fit.dist_sq
    target = S * m * (1 - tol)
    return Check(ratio >= target, ratio - target, {"delta": delta, "m": m, "ratio": ratio})


# ------------------------------------------------------------ spectral gap

def tangent_combo(P: Params, b: float, eps: float = FD_EPS) -> BubbleCombo:
    """Central difference (U_{b(1+eps)} - U_{b(1-eps)}) / (2 b eps)."""
    w = 1.0 / (2 * b * eps)
    return BubbleCombo(P, Flavor.SOBOLEV, [(w, b * (1 + eps)), (-w, b * (1 - eps))])


def orthogonalize(b: float, raw: BubbleCombo, grid: Optional[RadialGrid] = None) -> BubbleCombo:
    """Remove from ``raw`` its s-order projection on U_b and the scale tangent."""
    _require_sobolev(raw)
    P = raw.params
    u = make_bubble(P, b)
    tan = tangent_combo(P, b)
    uu = hs_inner(u, u, grid)
    tan = tan.plus(u.scaled(-hs_inner(tan, u, grid) / uu))
    r = raw.plus(u.scaled(-hs_inner(raw, u, grid) / uu))
    return r.plus(tan.scaled(-hs_inner(r, tan, grid) / hs_inner(tan, tan, grid)))


class GapCheck(NamedTuple):
    residual: float
    r_norm_sq: float

    @property
    def relative(self) -> float:
        return self.residual / self.r_norm_sq


def spectral_gap_check(b: float, raw: BubbleCombo, grid: Optional[RadialGrid] = None,
                       degenerate: float = 1e-10) -> Optional[GapCheck]:
    """Spectral gap residual of ``raw`` after orthogonalization at scale b.

    residual = ||r||^2 - (2*-1) S^-1 ||U_b||^(2-2*) int U_b^(2*-2) r^2
               - 4s/(n+2s+2) ||r||^2,
    nonnegative by the gap inequality. Returns None when nothing of ``raw``
    survives the orthogonalization.
    """
    P = raw.params
    grid = grid or default_grid(P.n)
    q = P.sob_exp
    raw_norm = hs_inner(raw, raw, grid)
    r = orthogonalize(b, raw, grid)
    rr = hs_inner(r, r, grid)
    if raw_norm == 0 or rr <= degenerate * raw_norm:
        return None
    U = make_bubble(P, b).sample(grid)
    weight = (q - 1) / sobolev_sharp_constant(P) * lp_norm(U, q) ** (2 - q)
    pot = grid.integrate(U.values ** (q - 2) * r.sample(grid).values ** 2)
    gap = 4 * P.s / (P.n + 2 * P.s + 2)
    return GapCheck(float(rr - weight * pot - gap * rr), float(rr))


# ----------------------------------------------------- pointwise and split

def taylor_pointwise_check(x, q, tol: float = 1e-12):
    """Binomial upper bound for (1+x)^q, x >= -1, q >= 1, elementwise.

    Non-integer q: (1+x)^q <= 1 + sum_{k<=[q]} C(q,k) x^k + |x|^q.
    Integer q: both sides agree (binomial theorem).
    """
    x = np.asarray(x, dtype=float)
    q = np.asarray(q, dtype=float)
    if np.any(x < -1) or np.any(q < 1):
        raise DomainError("need x >= -1 and q >= 1")
    x, q = np.broadcast_arrays(x, q)
    integer = np.abs(q - np.round(q)) < 1e-9
    top = np.where(integer, np.round(q), np.floor(q)).astype(int)
    rhs = np.ones_like(x)
    scale = np.ones_like(x)
    coef = np.ones_like(x)
    for k in range(1, int(top.max(initial=1)) + 1):
        coef = coef * (q - (k - 1)) / k
        term = np.where(k <= top, coef * x ** k, 0.0)
        rhs = rhs + term
        scale = scale + np.abs(term)
    rem = np.where(integer, 0.0, np.abs(x) ** q)
    rhs = rhs + rem
    scale = scale + rem
    lhs = (1 + x) ** q
    ok = np.where(integer, np.abs(lhs - rhs) <= tol * scale, lhs <= rhs + tol * scale)
    return bool(ok) if ok.ndim == 0 else ok


def norm_expansion_sides(u: RadialFn, r: RadialFn) -> tuple[float, float]:
    """Both sides of the expansion bound for ||u + r||_{2*}^2."""
    P = _params(u)
    if np.any(u.values < 0) or np.any(u.values + r.values < -1e-300):
        raise DomainError("need u >= 0 and u + r >= 0")
    q = P.sob_exp
    grid = u.grid
    nu = lp_norm(u, q)
    lhs = lp_norm(u + r, q) ** 2
    integer = _is_integer(q)
    top = int(round(q)) if integer else int(math.floor(q))
    rhs = nu ** 2
    uv, rv = u.values, r.values
    for k in range(1, top + 1):
        with np.errstate(divide="ignore", invalid="ignore"):
            integrand = np.where(uv > 0, uv ** (q - k), 0.0) * rv ** k
        rhs += (2 / q) * gen_binom(q, k) * nu ** (2 - q) * grid.integrate(integrand)
    if not integer:
        rhs += (2 / q) * nu ** (2 - q) * lp_norm(r, q) ** q
    return float(lhs), float(rhs)


def norm_expansion_check(u: RadialFn, r: RadialFn, tol: float = 1e-8) -> Check:
    lhs, rhs = norm_expansion_sides(u, r)
    return Check(lhs <= rhs + tol * abs(rhs), rhs - lhs, {"lhs": lhs, "rhs": rhs})


def h_of_m(q, m):
    return 1 - m ** q - (1 - m) ** q


def h_m_bound_check(n, s, m, tol: float = 1e-12):
    """h(m) >= (2^q - 2) m^q on [0, 1/2] with q = (n+2s)/n, elementwise."""
    m = np.asarray(m, dtype=float)
    if np.any(m < 0) or np.any(m > 0.5):
        raise DomainError("m must lie in [0, 1/2]")
    q = (np.asarray(n, dtype=float) + 2 * np.asarray(s, dtype=float)) / np.asarray(n, dtype=float)
    ok = h_of_m(q, m) >= (2 ** q - 2) * m ** q - tol
    return bool(ok) if np.ndim(ok) == 0 else ok


def _deficit(g: RadialFn, S: float) -> float:
    return lp_norm(g, g.params.hls_exp) ** 2 - neg_frac_norm_sq(g) / S


def split_superadditivity_check(g: RadialFn, tol: float = 1e-10) -> Check:
    """Deficit superadditivity over the sign split and the h(m) gain.

    Checks D(g) >= D(g+) + D(g-) + ||g||^2 - ||g+||^2 - ||g-||^2 and
    ||g||^2 - ||g+||^2 - ||g-||^2 >= (2^q - 2) ||g_minor||^2, where the
    minor part is the one carrying at most half of ||g||_p^p.
    """
    P = _params(g)
    p = P.hls_exp
    gp, gm = split_parts(g)
    if not (np.any(gp.values > 0) and np.any(gm.values > 0)):
        raise DomainError("split check needs a sign-changing function")
    S = sobolev_sharp_constant(P)
    ng, npos, nneg = (lp_norm(f, p) for f in (g, gp, gm))
    gain = ng ** 2 - npos ** 2 - nneg ** 2
    super_margin = _deficit(g, S) - (_deficit(gp, S) + _deficit(gm, S) + gain)
    scale = ng ** 2
    minor = min(npos, nneg)
    q = (P.n + 2 * P.s) / P.n
    h_margin = gain - (2 ** q - 2) * minor ** 2
    m = minor ** p / ng ** p
    ok = super_margin >= -tol * scale and h_margin >= -tol * scale
    return Check(ok, min(super_margin, h_margin) / scale,
                 {"superadditivity": super_margin / scale, "h_gain": h_margin / scale, "m": m})


# ---------------------------------------------------------- local bounds

class LocalBounds(NamedTuple):
    nu_lower: float
    nu_lower_scaled: float
    mu_lower: float
    global_lower: float


def local_bounds(P: Params, delta: float) -> LocalBounds:
    """Lower bounds for the local Sobolev and HLS stability infima at delta."""
    if not 0 < delta < 0.5:
        raise DomainError("delta must lie in (0, 1/2)")
    a = (P.n - 2 * P.s) / (P.n + 2 * P.s)
    m = m_of_delta(P, delta)
    mu = 0.5 * a * min(m_of_delta(P, 2 * delta) * a, 1.0)
    return LocalBounds(m, sobolev_sharp_constant(P) * m, mu, delta * mu)


@dataclass(frozen=True)
class LocalCase:
    """Base bubble U_b plus a perturbation orthogonal to U_b and its tangent."""

    b: float
    r: BubbleCombo
    delta: float

    @classmethod
    def from_raw(cls, b: float, raw: BubbleCombo, size: float,
                 grid: Optional[RadialGrid] = None) -> "LocalCase":
        r = orthogonalize(b, raw, grid)
        u = make_bubble(raw.params, b)
        r = r.scaled(size * math.sqrt(hs_inner(u, u, grid) / hs_inner(r, r, grid)))
        F = u.plus(r)
        return cls(b, r, hs_inner(r, r, grid) / hs_inner(F, F, grid))

    def function(self) -> BubbleCombo:
        return make_bubble(self.r.params, self.b).plus(self.r)


# ------------------------------------------------------- duality identity

def legendre_terms(F: BubbleCombo, grid: Optional[RadialGrid] = None) -> dict:
    """Independent evaluations of the terms in the deficit duality identity.

    g = ||F||^(2-2*) |F|^(2*-1) sgn F is the dual function and
    f1 = S^-1 (-Delta)^(-s) g.
    """
    _require_sobolev(F)
    P = F.params
    grid = grid or default_grid(P.n)
    S = sobolev_sharp_constant(P)
    q = P.sob_exp
    Fs = F.sample(grid)
    nF = lp_norm(Fs, q)
    g = RadialFn(grid, nF ** (2 - q) * np.abs(Fs.values) ** (q - 1) * np.sign(Fs.values), P)
    hs = hs_inner(F, F, grid)
    neg = neg_frac_norm_sq(g)
    Fg = l2_inner(Fs, g)
    dist = S * hs - 2 * Fg + neg / S
    return {
        "sobolev_deficit": S * hs - nF ** 2,
        "hls_deficit": lp_norm(g, P.hls_exp) ** 2 - neg / S,
        "dist_term": dist,
        "pairing": Fg,
        "norm_sq": nF ** 2,
    }


def legendre_deficit_identity(F: BubbleCombo, grid: Optional[RadialGrid] = None) -> float:
    """Relative residual of Sobolev deficit = HLS deficit of g + S ||F - f1||^2."""
    t = legendre_terms(F, grid)
    lhs = t["sobolev_deficit"]
    rhs = t["hls_deficit"] + t["dist_term"]
    return abs(lhs - rhs) / max(abs(lhs), t["norm_sq"])


# ------------------------------------------------------------- sphere HLS

def sphere_hls_deficit(g: ZonalSphereFn, P: Params) -> float:
    """(int |g|^p)^(2/p) - B int int g |xi - eta|^(-lam) g on S^n."""
    if g.dim != P.n:
        raise UsageError("sphere dimension differs from params")
    return g.lp_norm(P.hls_exp) ** 2 - sphere_hls_constant(P) * sphere_hls_form(g, P)


def sphere_stability_check(g: ZonalSphereFn, P: Params, case_id: str = "",
                           tol: float = 1e-6) -> StabilityReport:
    """Sphere HLS stability ratio; the distance is taken after stereographic transfer."""
    deficit = sphere_hls_deficit(g, P)
    f = stereographic_transfer(g, P.hls_exp)
    f = RadialFn(f.grid, f.values, P)
    fit = hls_manifold_distance(f)
    return _report(P, case_id, deficit, fit, stability_bounds(P).hls_bound,
                   g.lp_norm(P.hls_exp) ** 2, tol)


# ------------------------------------------------------------------ corpora

B_RATIOS = (2.0, 4.0, 10.0)
COEF_RATIOS = (0.05, 0.1, 0.3)
SIGNS = (1.0, -1.0)
PATTERNS = [(br, cr, sg) for br in B_RATIOS for cr in COEF_RATIOS for sg in SIGNS]


def member_rng(seed: int, index: int) -> np.random.Generator:
    return np.random.default_rng([int(seed), int(index)])


def _pair_terms(rng, index):
    br, cr, sg = PATTERNS[index % len(PATTERNS)]
    b0 = math.exp(rng.uniform(-1.0, 1.0))
    amp = math.exp(rng.uniform(-0.7, 0.7))
    pattern = f"b{br:g}_c{cr:g}_{'pp' if sg > 0 else 'pm'}"
    return [(amp, b0), (sg * cr * amp, br * b0)], pattern


def sobolev_corpus(P: Params, size: int = 200, seed: int = 0) -> list:
    """Seeded bubble-pair combinations, (case_id, BubbleCombo)."""
    out = []
    for i in range(size):
        terms, pattern = _pair_terms(member_rng(seed, i), i)
        out.append((f"sob{i:03d}_{pattern}", BubbleCombo(P, Flavor.SOBOLEV, terms)))
    return out


def truncated_bubble(P: Params, b: float, depth: float, r0: float, width: float,
                     grid: Optional[RadialGrid] = None) -> RadialFn:
    """HLS bubble multiplied by 1 - depth * logistic((ln r - ln r0) / width)."""
    grid = grid or default_grid(P.n)
    cut = 1.0 / (1.0 + np.exp(-(grid.t - math.log(r0)) / width))
    vals = bubble_profile(P, b, Flavor.HLS, grid.r) * (1.0 - depth * cut)
    return RadialFn(grid, vals, P)


def hls_corpus(P: Params, size: int = 200, seed: int = 0,
               grid: Optional[RadialGrid] = None) -> list:
    """Seeded HLS test functions, (case_id, RadialFn).

    Roughly three quarters are bubble pairs cycling through the fixed
    patterns; the rest are bubbles with a smooth logistic cutoff in ln r,
    some deep enough to change sign.
    """
    grid = grid or default_grid(P.n)
    n_pairs = (3 * size) // 4
    out = []
    for i in range(size):
        rng = member_rng(seed, i)
        if i < n_pairs:
            terms, pattern = _pair_terms(rng, i)
            g = BubbleCombo(P, Flavor.HLS, terms).sample(grid)
            out.append((f"hls{i:03d}_{pattern}", g))
        else:
            b = math.exp(rng.uniform(-1.0, 1.0))
            depth = rng.choice([0.2, 0.5, 0.9, 1.3])
            r0 = b * math.exp(rng.uniform(-1.5, 1.5))
            width = rng.uniform(0.2, 1.0)
            g = truncated_bubble(P, b, depth, r0, width, grid)
            out.append((f"hls{i:03d}_trunc_d{depth:g}", g))
    return out


def spectral_gap_corpus(P: Params, size: int = 100, seed: int = 0) -> list:
    """Seeded (b, raw) pairs with b in {0.5, 1, 2} and two-bubble raw data."""
    out = []
    for i in range(size):
        rng = member_rng(seed, 10_000 + i)
        b = (0.5, 1.0, 2.0)[i % 3]
        s1, s2 = np.exp(rng.uniform(-2.0, 2.0, size=2))
        if abs(s1 - s2) < 1e-3:
            s2 *= 1.5
        c1, c2 = rng.normal(size=2)
        out.append((b, BubbleCombo(P, Flavor.SOBOLEV, [(c1, s1 * b), (c2, s2 * b)])))
    return out


def near_manifold_corpus(P: Params, size: int = 20, seed: int = 0) -> list:
    """Nonnegative bubble plus small positive second bubble."""
    out = []
    for i in range(size):
        rng = member_rng(seed, 20_000 + i)
        b0 = math.exp(rng.uniform(-1.0, 1.0))
        ratio = math.exp(rng.uniform(0.1, 1.0))
        c = rng.uniform(0.002, 0.02)
        out.append((f"near{i:03d}", BubbleCombo(P, Flavor.SOBOLEV, [(1.0, b0), (c, ratio * b0)])))
    return out


def sign_changing_corpus(P: Params, size: int = 20, seed: int = 0,
                         grid: Optional[RadialGrid] = None) -> list:
    """H_b - c H_{b'} pairs, sign-changing by construction."""
    grid = grid or default_grid(P.n)
    out = []
    for i in range(size):
        rng = member_rng(seed, 30_000 + i)
        b0 = math.exp(rng.uniform(-1.0, 1.0))
        ratio = (2.0, 4.0, 10.0)[i % 3]
        c = rng.uniform(0.1, 1.5)
        g = BubbleCombo(P, Flavor.HLS, [(1.0, b0), (-c, ratio * b0)]).sample(grid)
        out.append((f"split{i:03d}", g))
    return out
