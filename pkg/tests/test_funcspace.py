import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, strategies as st

from hlslab.constants import Params, sphere_area
from hlslab.errors import DomainError, UsageError
from hlslab.funcspace import (BubbleCombo, Flavor, RadialFn, RadialGrid, ZonalSphereFn,
                              default_grid, lp_norm, make_bubble, split_parts,
                              stereographic_transfer)

CASES = [Params(3, 1.0), Params(4, 1.0), Params(3, 0.75), Params(5, 1.5)]


def test_grid_layout():
    g = RadialGrid(3, 1e-2, 1e2, 101)
    assert g.r[0] == pytest.approx(1e-2)
    assert g.r[-1] == pytest.approx(1e2)
    assert g.area == pytest.approx(4 * math.pi)
    assert g == RadialGrid(3, 1e-2, 1e2, 101)
    assert g != RadialGrid(3, 1e-2, 1e2, 102)
    assert g.with_n(2).n == 2
    with pytest.raises(DomainError):
        RadialGrid(3, 1.0, 0.5)
    with pytest.raises(ValueError):
        g.r[0] = 1.0


@pytest.mark.parametrize("n", [1, 2, 3, 5])
def test_gaussian_norm_against_mpmath(n):
    grid = default_grid(n)
    f = RadialFn(grid, np.exp(-grid.r ** 2))
    for p in (1.0, 2.0, 3.5):
        inner = mp.quad(lambda r: mp.e ** (-p * r * r) * r ** (n - 1), [grid.rmin, 1, grid.rmax])
        exact = (sphere_area(n - 1) * inner) ** (1 / p)
        # the log-grid rule does not halve endpoint weights; for n = 1 the
        # integrand at rmin is still 1e-4 and costs about h rmin / 2
        assert lp_norm(f, p) == pytest.approx(float(exact), rel=1e-6 if n == 1 else 1e-10)


@pytest.mark.parametrize("P", CASES)
def test_bubble_critical_norm_is_sphere_area(P):
    q = P.sob_exp
    U = make_bubble(P, 1.0).sample()
    assert lp_norm(U, q) ** q == pytest.approx(sphere_area(P.n), rel=1e-6)
    H = make_bubble(P, 1.0, flavor=Flavor.HLS).sample()
    assert lp_norm(H, P.hls_exp) ** P.hls_exp == pytest.approx(sphere_area(P.n), rel=1e-6)


@given(st.sampled_from(CASES), st.floats(-2.0, 2.0), st.floats(-3.0, 3.0))
def test_bubble_norm_scale_invariant_and_homogeneous(P, logb, c):
    U = make_bubble(P, math.exp(logb), c).sample()
    ref = make_bubble(P, 1.0).sample()
    assert lp_norm(U, P.sob_exp) == pytest.approx(abs(c) * lp_norm(ref, P.sob_exp), rel=1e-6, abs=1e-12)


def test_radial_fn_arithmetic_and_errors():
    g = default_grid(3)
    f = RadialFn(g, np.exp(-g.r))
    assert np.array_equal((f + f).values, (2 * f).values)
    assert np.array_equal((f - f).values, np.zeros(g.N))
    assert np.array_equal((-f).values, -f.values)
    with pytest.raises(UsageError):
        RadialFn(g, np.zeros(5))
    with pytest.raises(DomainError):
        RadialFn(g, np.full(g.N, np.nan))
    with pytest.raises(UsageError):
        f + RadialFn(RadialGrid(3, N=64), np.zeros(64))
    with pytest.raises(DomainError):
        lp_norm(f, 0.5)


def test_split_parts_reassemble():
    g = default_grid(2)
    f = RadialFn(g, np.cos(g.t))
    pos, neg = split_parts(f)
    assert np.array_equal(pos.values - neg.values, f.values)
    assert np.all(pos.values * neg.values == 0)


def test_radial_fn_exports():
    g = RadialGrid(2, 1e-1, 1e1, 8)
    f = RadialFn(g, np.arange(8.0), Params(2, 0.5))
    lines = f.to_csv().splitlines()
    assert lines[0] == "r,value" and len(lines) == 9
    import json
    doc = json.loads(f.to_json())
    assert doc["schema"] == 1 and doc["s"] == 0.5 and len(doc["value"]) == 8


def test_combo_validation_and_merge():
    P = Params(3, 1.0)
    with pytest.raises(DomainError):
        BubbleCombo(P, Flavor.SOBOLEV, [(1.0, 1.0), (2.0, 1.0)])
    with pytest.raises(DomainError):
        make_bubble(P, 0.0)
    a = BubbleCombo(P, Flavor.SOBOLEV, [(1.0, 1.0), (2.0, 3.0)])
    b = make_bubble(P, 3.0, -2.0)
    m = a.plus(b)
    assert dict((bb, c) for c, bb in m.terms) == {1.0: 1.0, 3.0: 0.0}
    with pytest.raises(UsageError):
        a.plus(make_bubble(P, 2.0, flavor=Flavor.HLS))
    r = np.array([0.0, 1.0, 2.0])
    assert a(r) == pytest.approx(make_bubble(P, 1.0)(r) + 2 * make_bubble(P, 3.0)(r))
    assert make_bubble(P, 1.0)(np.array([0.0]))[0] == pytest.approx(2.0 ** 0.5)


def test_zonal_integration():
    g = ZonalSphereFn(2, lambda th: np.cos(th) ** 2)
    assert g.integrate() == pytest.approx(4 * math.pi / 3, rel=1e-13)
    one = ZonalSphereFn.constant(4)
    assert one.lp_norm(3.0) == pytest.approx(sphere_area(4) ** (1 / 3), rel=1e-13)
    sampled = ZonalSphereFn(3, np.cos(g.theta) ** 3)
    assert sampled(np.array([0.3]))[0] == pytest.approx(math.cos(0.3) ** 3, rel=1e-10)
    assert sampled.scaled(2.0).integrate() == pytest.approx(2 * sampled.integrate(), abs=1e-14)
    with pytest.raises(UsageError):
        ZonalSphereFn(2, np.ones(7))


@pytest.mark.parametrize("n,p", [(2, 1.5), (3, 1.2), (4, 4 / 3)])
def test_stereographic_transfer_preserves_norm(n, p):
    g = ZonalSphereFn(n, lambda th: 1.0 + 0.3 * np.cos(th))
    f = stereographic_transfer(g, p)
    assert lp_norm(f, p) == pytest.approx(g.lp_norm(p), rel=1e-6)
    with pytest.raises(DomainError):
        stereographic_transfer(g, 1.0)
