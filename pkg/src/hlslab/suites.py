"""Verification suites run by ``hlslab verify``.

Each suite returns a :class:`SuiteResult` holding named checks with a
margin: positive when the check holds, with the size of the slack.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from . import stability as st
from . import symmetry as sym
from . import trace as tr
from .constants import (Params, lieb_sharp_diagonal, m_of_delta, sobolev_sharp_constant,
                        sobolev_sharp_constant_forms, sphere_area, stability_bounds, trace_constants)
from .errors import NearManifoldError, UsageError
from .funcspace import BubbleCombo, Flavor, RadialGrid, ZonalSphereFn, lp_norm, make_bubble
from .riesz import angular_kernel, hls_form, hs_inner, neg_frac_norm_sq, riesz_const


@dataclass
class Check:
    label: str
    ok: bool
    margin: float


@dataclass
class SuiteResult:
    name: str
    checks: list = field(default_factory=list)
    skipped: str = ""

    def add(self, label: str, ok, margin: float):
        self.checks.append(Check(label, bool(ok), float(margin)))

    @property
    def passed(self) -> bool:
        return all(c.ok for c in self.checks)

    @property
    def worst(self) -> Check | None:
        return min(self.checks, key=lambda c: (c.ok, c.margin), default=None)

    def to_dict(self) -> dict:
        w = self.worst
        return {
            "suite": self.name,
            "pass": self.passed,
            "skipped": self.skipped,
            "worst_check": None if w is None else w.label,
            "worst_margin": None if w is None else w.margin,
            "checks": len(self.checks),
            "failed": [c.label for c in self.checks if not c.ok],
        }


@dataclass
class Context:
    """Inputs shared by the suites; ``S`` may be overridden to inject faults."""

    P: Params
    grid: RadialGrid
    tol: float = 1e-6
    seed: int = 0
    S: float = math.nan

    def __post_init__(self):
        if math.isnan(self.S):
            self.S = sobolev_sharp_constant(self.P)

    @property
    def wide_grid(self) -> RadialGrid:
        """Wider, denser grid for deficits of order 1e-9 (bubble tails matter there)."""
        return RadialGrid(self.P.n, 1e-8, 1e8, 4 * self.grid.N)


def _rel_margin(err: float, tol: float) -> float:
    return tol - err


def suite_quadrature(ctx: Context) -> SuiteResult:
    res = SuiteResult("quadrature")
    P, grid = ctx.P, ctx.grid
    q = P.sob_exp
    U = make_bubble(P, 1.0).sample(grid)
    err = abs(lp_norm(U, q) ** q / sphere_area(P.n) - 1)
    res.add("bubble_norm", err <= 1e-6, _rel_margin(err, 1e-6))
    shell = angular_kernel(Params(3, 1.0), np.array([1.0, 2.0, 1.0, 5.0]), np.array([0.5, 1.0, 2.0, 1.0]))
    err = float(np.max(np.abs(shell / np.array([1.0, 0.5, 0.5, 0.2]) - 1)))
    res.add("shell_theorem", err <= 1e-6, _rel_margin(err, 1e-6))
    H1 = make_bubble(P, 1.0, flavor=Flavor.HLS).sample(grid)
    H4 = make_bubble(P, 4.0, flavor=Flavor.HLS).sample(grid)
    a, b = hls_form(H1, H4), hls_form(H4, H1)
    err = abs(a - b) / abs(a)
    res.add("form_symmetry", err <= 1e-8, _rel_margin(err, 1e-8))
    return res


def suite_extremal(ctx: Context) -> SuiteResult:
    res = SuiteResult("extremal")
    P, grid = ctx.P, ctx.grid
    lo, hi = sobolev_sharp_constant_forms(P)
    err = abs(lo / hi - 1)
    res.add("sobolev_constant_forms", err <= 1e-12, _rel_margin(err, 1e-12))
    err = abs(riesz_const(P) * lieb_sharp_diagonal(P.n, P.lam) / ctx.S - 1)
    res.add("duality_constant", err <= 1e-10, _rel_margin(err, 1e-10))
    for b in (0.5, 1.0, 2.0):
        H = make_bubble(P, b, flavor=Flavor.HLS).sample(grid)
        nrm = lp_norm(H, P.hls_exp) ** 2
        d = abs(nrm - neg_frac_norm_sq(H) / ctx.S) / nrm
        res.add(f"hls_bubble_b{b:g}", d <= 1e-4, _rel_margin(d, 1e-4))
        U = make_bubble(P, b)
        nU = lp_norm(U.sample(grid), P.sob_exp) ** 2
        d = abs(ctx.S * hs_inner(U, U, grid) - nU) / nU
        res.add(f"sobolev_bubble_b{b:g}", d <= 1e-4, _rel_margin(d, 1e-4))
    one = ZonalSphereFn.constant(P.n)
    d = abs(st.sphere_hls_deficit(one, P)) / one.lp_norm(P.hls_exp) ** 2
    res.add("sphere_constant", d <= 1e-3, _rel_margin(d, 1e-3))
    return res


def suite_taylor(ctx: Context) -> SuiteResult:
    res = SuiteResult("taylor")
    rng = np.random.default_rng([ctx.seed, 70_000])
    x = rng.uniform(-1.0, 10.0, 100_000)
    q = rng.uniform(1.0, 8.0, 100_000)
    bad = int(np.sum(~st.taylor_pointwise_check(x, q)))
    res.add("noninteger_q", bad == 0, -bad)
    qi = np.round(q)
    bad = int(np.sum(~st.taylor_pointwise_check(x, qi)))
    res.add("integer_q", bad == 0, -bad)
    return res


def suite_spectral_gap(ctx: Context) -> SuiteResult:
    res = SuiteResult("spectral_gap")
    for i, (b, raw) in enumerate(st.spectral_gap_corpus(ctx.P, 100, ctx.seed)):
        gap = st.spectral_gap_check(b, raw, ctx.grid)
        if gap is None:
            continue
        res.add(f"gap{i:03d}", gap.relative >= -1e-6, gap.relative + 1e-6)
    return res


def suite_duality(ctx: Context) -> SuiteResult:
    res = SuiteResult("duality")
    rng = np.random.default_rng([ctx.seed, 80_000])
    for i in range(50):
        b1 = math.exp(rng.uniform(-1, 1))
        b2 = b1 * math.exp(rng.uniform(0.3, 2.0))
        F = BubbleCombo(ctx.P, Flavor.SOBOLEV, [(1.0, b1), (rng.uniform(-0.8, 0.8), b2)])
        t = st.legendre_terms(F, ctx.grid)
        resid = abs(t["sobolev_deficit"] - t["hls_deficit"] - t["dist_term"]) / max(
            abs(t["sobolev_deficit"]), t["norm_sq"])
        res.add(f"identity{i:02d}", resid <= 1e-3, 1e-3 - resid)
        holder = abs(t["pairing"] / t["norm_sq"] - 1)
        res.add(f"holder{i:02d}", holder <= 1e-10, 1e-10 - holder)
    return res


def suite_stability_hls(ctx: Context) -> SuiteResult:
    res = SuiteResult("stability_hls")
    bound = stability_bounds(ctx.P).hls_bound
    for cid, g in st.hls_corpus(ctx.P, 200, ctx.seed, ctx.grid):
        deficit = lp_norm(g, ctx.P.hls_exp) ** 2 - neg_frac_norm_sq(g) / ctx.S
        fit = st.hls_manifold_distance(g)
        try:
            rep = st._report(ctx.P, cid, deficit, fit, bound, lp_norm(g, ctx.P.hls_exp) ** 2, ctx.tol)
        except NearManifoldError:
            continue
        res.add(cid, rep.passed, rep.margin)
    return res


def _sobolev_deficit(ctx: Context, F: BubbleCombo, grid: Optional[RadialGrid] = None) -> float:
    grid = grid or ctx.grid
    return ctx.S * hs_inner(F, F, grid) - lp_norm(F.sample(grid), ctx.P.sob_exp) ** 2


def suite_stability_sobolev(ctx: Context) -> SuiteResult:
    res = SuiteResult("stability_sobolev")
    bounds = stability_bounds(ctx.P)
    for cid, F in st.sobolev_corpus(ctx.P, 200, ctx.seed):
        fit = st.sobolev_manifold_distance(F, ctx.grid)
        ratio = _sobolev_deficit(ctx, F) / fit.dist_sq
        res.add(cid, ratio >= bounds.sob_bound - ctx.tol, ratio - bounds.sob_bound)
    wide = ctx.wide_grid
    for cid, F in st.near_manifold_corpus(ctx.P, 20, ctx.seed):
        fit = st.sobolev_manifold_distance(F, wide)
        delta = fit.dist_sq / hs_inner(F, F, wide)
        m = m_of_delta(ctx.P, delta)
        if m <= 0:
            continue
        ratio = _sobolev_deficit(ctx, F, wide) / fit.dist_sq
        target = ctx.S * m * (1 - ctx.tol)
        res.add(f"{cid}_local", ratio >= target, ratio - target)
    return res


def suite_split(ctx: Context) -> SuiteResult:
    res = SuiteResult("split")
    for cid, g in st.sign_changing_corpus(ctx.P, 20, ctx.seed, ctx.grid):
        chk = st.split_superadditivity_check(g)
        res.add(cid, chk.ok, chk.margin)
    m = np.linspace(0.0, 0.5, 10_001)
    bad = int(np.sum(~st.h_m_bound_check(ctx.P.n, ctx.P.s, m)))
    res.add("h_of_m_sweep", bad == 0, -bad)
    return res


def sphere_corpus(P: Params, size: int = 6, seed: int = 0) -> list:
    """Positive zonal perturbations of the constant on S^n."""
    out = []
    for i in range(size):
        rng = np.random.default_rng([seed, 90_000 + i])
        a1, a2 = rng.uniform(-0.4, 0.4, size=2)
        out.append((f"zonal{i:02d}", ZonalSphereFn(
            P.n, lambda th, a1=a1, a2=a2: 1.0 + a1 * np.cos(th) + a2 * np.cos(2 * th))))
    return out


def suite_sphere(ctx: Context) -> SuiteResult:
    res = SuiteResult("sphere")
    for cid, g in sphere_corpus(ctx.P, 6, ctx.seed):
        try:
            rep = st.sphere_stability_check(g, ctx.P, cid, ctx.tol)
        except NearManifoldError:
            continue
        res.add(cid, rep.passed, rep.margin)
    return res


def suite_trace(ctx: Context) -> SuiteResult:
    res = SuiteResult("trace")
    P = ctx.P
    if P.n < 2 or P.s <= 0.5:
        res.skipped = "trace problems need n >= 2 and s > 1/2"
        return res
    tc = trace_constants(P)
    r1 = tr.extremal_trace_equality(P, 1.0)
    err = abs(r1 / tc.C_ns - 1)
    res.add("flat_constant", err <= 1e-2, 1e-2 - err)
    for b in (0.5, 2.0):
        err = abs(tr.extremal_trace_equality(P, b) / r1 - 1)
        res.add(f"flat_scale_b{b:g}", err <= 1e-3, 1e-3 - err)
    err = abs(tr.extremal_trace_sphere_equality(P) / tc.D_ns - 1)
    res.add("sphere_constant", err <= 1e-2, 1e-2 - err)
    corpus = [g for _, g in tr.boundary_corpus(P, 10, ctx.seed)]
    resid, _, _ = tr.trace_equivalence_check(corpus)
    res.add("energy_form_ratio", resid <= 1e-2, 1e-2 - resid)
    for cid, g in tr.perturbed_boundary_corpus(P, 20, ctx.seed):
        try:
            rep = tr.trace_stability_flat(g, cid, ctx.tol)
        except NearManifoldError:
            continue
        res.add(cid, rep.passed, rep.margin)
    return res


def suite_symmetry(ctx: Context) -> SuiteResult:
    res = SuiteResult("symmetry")
    corpus = sym.flow_corpus(6, ctx.seed)
    rng = np.random.default_rng([ctx.seed, 95_000])
    for i in range(100):
        f = corpus[i % len(corpus)][1]
        f = f * (1.0 / f.lp_norm())
        H = sym.random_halfplane(rng, 16)
        g = sym.polarize(f, H)
        same = np.array_equal(np.sort(f.values, axis=None), np.sort(g.values, axis=None))
        gain = sym.hls2d(g, g) - sym.hls2d(f, f)
        res.add(f"polarize{i:03d}", same and gain >= -1e-10, gain + 1e-10 if same else -1.0)
    for cid, f in corpus:
        trace, its = sym.competing_symmetries(f, 30, distances=True, keep=True)
        d = np.array(trace.dist_to_h)
        ratio = d.min() / d[0]
        res.add(f"{cid}_converge", ratio <= 0.1, 0.1 - ratio)
        lip = all(sym.lipschitz_distance_check(its[k], its[k + 1], fit_f=trace.fits[k],
                                               fit_g=trace.fits[k + 1]) for k in range(len(its) - 1))
        res.add(f"{cid}_lipschitz", lip, 0.0)
    return res


SUITES: dict[str, Callable[[Context], SuiteResult]] = {
    "quadrature": suite_quadrature,
    "extremal": suite_extremal,
    "taylor": suite_taylor,
    "spectral_gap": suite_spectral_gap,
    "duality": suite_duality,
    "stability_hls": suite_stability_hls,
    "stability_sobolev": suite_stability_sobolev,
    "split": suite_split,
    "sphere": suite_sphere,
    "trace": suite_trace,
    "symmetry": suite_symmetry,
}


def run_suites(ctx: Context, names=None) -> list:
    names = list(SUITES) if not names else list(names)
    unknown = [n for n in names if n not in SUITES]
    if unknown:
        raise UsageError(f"unknown suite(s): {', '.join(unknown)}")
    return [SUITES[n](ctx) for n in names]
