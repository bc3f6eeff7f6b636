"""Acceptance gate: one test per criterion, each timed against its budget.

Run with ``pytest tests/test_acceptance.py``; the terminal summary lists one
PASS/FAIL line per criterion.
"""
import math

import numpy as np
import pytest

from hlslab.constants import (Params, lieb_sharp_diagonal, sobolev_sharp_constant,
                              sobolev_sharp_constant_forms, stability_bounds)
from hlslab.funcspace import RadialGrid
from hlslab.riesz import angular_kernel, riesz_const
from hlslab.suites import Context, SUITES

CASES = [Params(3, 1.0), Params(4, 1.0), Params(3, 0.75), Params(5, 1.5)]


def random_pairs(count, seed):
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(count):
        n = int(rng.integers(1, 11))
        out.append(Params(n, float(rng.uniform(0.02, 0.98)) * n / 2))
    return out


def run_suite(name, P, N=2048):
    res = SUITES[name](Context(P, RadialGrid(P.n, N=N)))
    failed = [c.label for c in res.checks if not c.ok]
    return res, failed


def test_c01_constant_reproduction(criterion):
    with criterion(1, "Sobolev constant reproduction", 1.0) as c:
        closed = 1 / (3 * (math.pi / 2) ** (4 / 3))
        assert sobolev_sharp_constant(Params(3, 1.0)) == pytest.approx(closed, rel=1e-10)
        worst = 0.0
        for P in random_pairs(50, 101):
            a, b = sobolev_sharp_constant_forms(P)
            worst = max(worst, abs(a / b - 1))
        c.note(f"worst form mismatch {worst:.1e}")
        assert worst <= 1e-12


def test_c02_duality_constant(criterion):
    with criterion(2, "Riesz constant times sharp HLS constant", 1.0) as c:
        worst = 0.0
        for P in random_pairs(20, 202):
            prod = riesz_const(P) * lieb_sharp_diagonal(P.n, P.n - 2 * P.s)
            worst = max(worst, abs(prod / sobolev_sharp_constant(P) - 1))
        c.note(f"worst {worst:.1e}")
        assert worst <= 1e-10


def test_c03_quadrature_calibration(criterion):
    with criterion(3, "bubble norms and shell theorem", 5.0) as c:
        for P in CASES:
            res, failed = run_suite("quadrature", P)
            assert not failed, (P, failed)
        r = np.array([1.0, 2.0, 1.0, 5.0])
        rho = np.array([0.5, 1.0, 2.0, 1.0])
        k = angular_kernel(Params(3, 1.0), r, rho)
        assert np.max(np.abs(k * np.maximum(r, rho) - 1)) <= 1e-6
        c.note(f"{len(CASES)} cases")


def test_c04_extremal_saturation(criterion):
    with criterion(4, "extremal saturation", 10.0) as c:
        for P in CASES:
            res, failed = run_suite("extremal", P)
            assert not failed, (P, failed)
        c.note(f"{len(CASES)} cases")


def test_c05_hls_stability_corpus(criterion):
    with criterion(5, "HLS stability corpus", 120.0) as c:
        counts = []
        for P in CASES:
            res, failed = run_suite("stability_hls", P)
            assert not failed, (P, failed)
            counts.append(len(res.checks))
        # members within roundoff of the manifold have no defined ratio
        c.note("checked " + "/".join(map(str, counts)) + " of 200 per case")


def test_c06_sobolev_stability_corpus(criterion):
    with criterion(6, "Sobolev stability corpus and local bound", 120.0) as c:
        local = 0
        for P in CASES:
            res, failed = run_suite("stability_sobolev", P)
            assert not failed, (P, failed)
            local += sum(ch.label.endswith("_local") for ch in res.checks)
        c.note(f"{local} local checks")


def test_c07_pointwise_and_gap_checks(criterion):
    with criterion(7, "Taylor, spectral gap, h(m) and split checks", 30.0) as c:
        counts = dict(taylor=0, spectral_gap=0, split=0)
        for P in CASES:
            for name in counts:
                res, failed = run_suite(name, P)
                assert not failed, (P, name, failed)
                counts[name] += len(res.checks)
        c.note(", ".join(f"{k} {v}" for k, v in counts.items()))


def test_c08_legendre_identity(criterion):
    with criterion(8, "deficit identity and Hoelder pairing", 60.0) as c:
        for P in CASES:
            res, failed = run_suite("duality", P)
            assert not failed, (P, failed)
            assert len(res.checks) == 100
        c.note(f"{len(CASES)} cases")


def test_c09_planar_flows(criterion):
    with criterion(9, "polarization and competing symmetries", 180.0) as c:
        res, failed = run_suite("symmetry", Params(2, 0.5))
        assert not failed, failed
        c.note(f"{len(res.checks)} checks")


def test_c10_trace_constants(criterion):
    with criterion(10, "trace constants", 180.0) as c:
        for P in CASES:
            res, failed = run_suite("trace", P)
            assert not failed, (P, failed)
        c.note(f"{len(CASES)} cases")


def test_c11_bound_ordering(criterion):
    with criterion(11, "Sobolev bound below third-order upper bound", 1.0) as c:
        count = 0
        for n in range(1, 9):
            for frac in np.linspace(0.05, 0.95, 10):
                b = stability_bounds(Params(n, round(frac * n / 2, 9)))
                assert b.sob_bound < b.koenig_upper
                assert b.koenig_upper == pytest.approx(
                    b.S_ns * 2 * frac * n / (n + 2 + frac * n), rel=1e-6)
                count += 1
        c.note(f"{count} pairs")
