import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, strategies as st

from hlslab.constants import Params, sobolev_sharp_constant, sphere_area
from hlslab.errors import DomainError, SingularityError, UsageError
from hlslab.funcspace import (BubbleCombo, Flavor, RadialFn, RadialGrid, ZonalSphereFn,
                              default_grid, lp_norm, make_bubble)
from hlslab.riesz import (KernelTable, angular_kernel, hls_form, hs_cross, hs_diag, hs_inner,
                          l2_inner, log_kernel, neg_frac_norm_sq, riesz_const, riesz_potential,
                          sobolev_eigen_const, sphere_hls_form, sphere_potential,
                          toeplitz_weights)

CASES = [Params(3, 1.0), Params(4, 1.0), Params(3, 0.75), Params(5, 1.5), Params(2, 0.5)]


def gaussian_form(n, lam):
    # double integral of exp(-|x|^2 - |y|^2) |x-y|^(-lam), via u = x-y, v = x+y
    return (2.0 ** -n * (2 * math.pi) ** (n / 2) * sphere_area(n - 1)
            * 2 ** ((n - lam) / 2 - 1) * math.gamma((n - lam) / 2))


def test_shell_theorem():
    P = Params(3, 1.0)
    r = np.array([1.0, 2.0, 1.0, 5.0, 0.0])
    rho = np.array([0.5, 1.0, 2.0, 1.0, 3.0])
    assert angular_kernel(P, r, rho) == pytest.approx(1 / np.maximum(r, rho), rel=1e-10)


def test_angular_kernel_domain():
    with pytest.raises(DomainError):
        angular_kernel(Params(3, 1.0), -1.0, 1.0)
    with pytest.raises(SingularityError):
        angular_kernel(Params(3, 0.5), 1.0, 1.0)


@pytest.mark.parametrize("P", [Params(4, 1.0), Params(5, 1.5), Params(2, 0.75)])
def test_angular_kernel_against_mpmath(P):
    n, lam = P.n, P.lam
    r, rho = 1.3, 0.7
    norm = sphere_area(n - 2) / sphere_area(n - 1)
    exact = norm * mp.quad(lambda t: (r * r + rho * rho - 2 * r * rho * mp.cos(t)) ** (-lam / 2)
                           * mp.sin(t) ** (n - 2), [0, mp.pi])
    assert angular_kernel(P, r, rho) == pytest.approx(float(exact), rel=1e-9)


def test_log_kernel_even_and_consistent():
    P = Params(3, 0.75)
    u = np.array([0.1, 1.0, 3.0])
    assert log_kernel(P, u) == pytest.approx(log_kernel(P, -u))
    r, rho = 1.0, np.exp(u)
    expect = angular_kernel(P, r, rho)
    assert log_kernel(P, u) * (r * rho) ** (-0.5 * P.lam) == pytest.approx(expect, rel=1e-7)


@pytest.mark.parametrize("P", CASES)
def test_gaussian_hls_form(P):
    grid = default_grid(P.n)
    g = RadialFn(grid, np.exp(-grid.r ** 2), P)
    assert hls_form(g, g) == pytest.approx(gaussian_form(P.n, P.lam), rel=1e-6)


@pytest.mark.parametrize("P", CASES)
def test_riesz_potential_of_hls_bubble(P):
    grid = default_grid(P.n)
    H = make_bubble(P, 1.0, flavor=Flavor.HLS).sample(grid)
    U = make_bubble(P, 1.0).sample(grid)
    pot = riesz_potential(H)
    mid = (grid.r > 1e-2) & (grid.r < 1e2)
    expect = U.values / sobolev_eigen_const(P)
    assert np.max(np.abs(pot.values[mid] / expect[mid] - 1)) < 1e-5


@given(st.sampled_from(CASES[:4]), st.floats(-1.0, 1.0), st.floats(-1.0, 1.0))
def test_hls_form_symmetric_and_bilinear(P, a, c):
    grid = default_grid(P.n)
    f = make_bubble(P, 1.0, flavor=Flavor.HLS).sample(grid)
    g = RadialFn(grid, np.exp(-grid.r ** 2) * (1 + a * np.cos(grid.t)), P)
    fg, gf = hls_form(f, g), hls_form(g, f)
    assert fg == pytest.approx(gf, rel=1e-8)
    assert hls_form(f * c + g, f) == pytest.approx(c * hls_form(f, f) + gf, rel=1e-9, abs=1e-9)


@pytest.mark.parametrize("P", CASES)
def test_sobolev_extremal_in_hs_product(P):
    U = make_bubble(P, 1.7)
    grid = default_grid(P.n)
    lhs = sobolev_sharp_constant(P) * hs_inner(U, U, grid)
    assert lhs == pytest.approx(lp_norm(U.sample(grid), P.sob_exp) ** 2, rel=1e-6)


def test_hs_products_consistent():
    P = Params(3, 1.0)
    M = hs_cross(P, [0.5, 1.0, 3.0], [0.5, 1.0, 3.0])
    assert M == pytest.approx(M.T, rel=1e-6)
    assert np.all(np.linalg.eigvalsh(0.5 * (M + M.T)) > 0)
    F = BubbleCombo(P, Flavor.SOBOLEV, [(1.0, 0.5), (-0.3, 3.0)])
    assert hs_inner(F, F) == pytest.approx(np.array([1, 0, -0.3]) @ M @ np.array([1, 0, -0.3]))
    assert hs_diag(P, [0.5, 1.0, 3.0]) == pytest.approx(np.diag(M), rel=1e-14)
    assert hs_inner(BubbleCombo(P, Flavor.SOBOLEV, []), F) == 0.0
    with pytest.raises(UsageError):
        hs_inner(make_bubble(P, 1.0, flavor=Flavor.HLS), F)


def test_hs_product_matches_dual_norm():
    # <U, U>_s = ||(-Delta)^(-s/2) (-Delta)^s U||^2 with (-Delta)^s U = c H
    P = Params(4, 1.0)
    grid = default_grid(P.n)
    U = make_bubble(P, 1.0)
    H = make_bubble(P, 1.0, flavor=Flavor.HLS).sample(grid)
    c = sobolev_eigen_const(P)
    assert hs_inner(U, U, grid) == pytest.approx(c * c * neg_frac_norm_sq(H), rel=1e-6)
    assert hs_inner(U, U, grid) == pytest.approx(c * l2_inner(U.sample(grid), H), rel=1e-10)


def test_riesz_const_three_dims():
    # (-Delta)^(-1) in R^3 has kernel 1/(4 pi |x|)
    assert riesz_const(Params(3, 1.0)) == pytest.approx(1 / (4 * math.pi))


def test_form_requires_params_and_shared_grid():
    grid = default_grid(3)
    f = RadialFn(grid, np.exp(-grid.r))
    with pytest.raises(UsageError):
        hls_form(f, f)
    P = Params(3, 1.0)
    g = RadialFn(grid, f.values, P)
    h = RadialFn(RadialGrid(3, N=512), np.ones(512), P)
    with pytest.raises(UsageError):
        hls_form(g, h)


def test_kernel_table_roundtrip(tmp_path):
    P = Params(3, 0.75)
    grid = RadialGrid(3, N=64)
    table = KernelTable(P, grid, toeplitz_weights(P, grid.N, grid.h))
    path = tmp_path / "k.bin"
    table.save(path)
    back = KernelTable.load(path, P, grid)
    assert np.array_equal(back.weights, table.weights)
    assert KernelTable.load(path, Params(3, 1.0), grid) is None
    assert KernelTable.cache_key(P, grid) != KernelTable.cache_key(P, RadialGrid(3, N=65))
    assert table.kernel(3, 5) == pytest.approx(angular_kernel(P, grid.r[3], grid.r[5]), rel=1e-7)


def mp_sphere_constant_form(n, lam):
    ang = mp.quad(lambda t: (2 * mp.sin(t / 2)) ** (-lam) * mp.sin(t) ** (n - 1), [0, mp.pi])
    return sphere_area(n) * sphere_area(n - 1) * float(ang)


@pytest.mark.parametrize("P", CASES)
def test_sphere_form_of_constants(P):
    one = ZonalSphereFn.constant(P.n)
    assert sphere_hls_form(one, P) == pytest.approx(mp_sphere_constant_form(P.n, P.lam), rel=1e-6)


def test_sphere_potential_of_constant_is_flat():
    P = Params(3, 1.0)
    one = ZonalSphereFn.constant(3)
    V = sphere_potential(P, one, np.array([0.2, 1.0, 2.5]))
    assert V == pytest.approx(np.full(3, V[0]), rel=1e-7)
    with pytest.raises(UsageError):
        sphere_potential(P, ZonalSphereFn.constant(2), np.array([1.0]))
