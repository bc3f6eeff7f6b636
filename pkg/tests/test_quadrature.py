import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, strategies as st

from hlslab.quadrature import (gauss_legendre, graded_edges, panel_rule, power_mean_table,
                               spherical_power_mean)


def mp_power_mean(d, nu, kappa):
    # mean of (1 - kappa cos)^(-nu) over S^(d-1) as a Gauss series in kappa^2
    return mp.hyp2f1(mp.mpf(nu) / 2, (mp.mpf(nu) + 1) / 2, mp.mpf(d) / 2, mp.mpf(kappa) ** 2)


def test_gauss_legendre_exact_for_polynomials():
    x, w = gauss_legendre(6)
    for k in range(12):
        exact = 0.0 if k % 2 else 2.0 / (k + 1)
        assert np.dot(w, x ** k) == pytest.approx(exact, abs=1e-14)


def test_panel_rule_shapes_and_total():
    edges = np.array([[0.0, 0.5, 2.0], [1.0, 2.0, 3.0]])
    x, w = panel_rule(edges, 4)
    assert x.shape == w.shape == (2, 8)
    assert np.sum(w, axis=1) == pytest.approx([2.0, 2.0])
    assert np.sum(w[0] * x[0] ** 3) == pytest.approx(4.0)


def test_graded_edges():
    e = graded_edges(0.0, 1.0, 0.5, 3, uniform=2)
    assert e == pytest.approx([0.125, 0.25, 0.5, 0.75, 1.0])
    r = graded_edges(1.0, 0.0, 0.5, 2)
    assert r == pytest.approx([0.75, 0.5, 0.0])


@pytest.mark.parametrize("d,nu", [(2, 0.5), (3, 0.5), (3, 1.0), (4, 1.25), (5, 2.0), (6, 3.5)])
@pytest.mark.parametrize("kappa", [0.0, 0.3, 0.9, 0.999, 1 - 1e-8])
def test_power_mean_against_hypergeometric(d, nu, kappa):
    got = spherical_power_mean(d, nu, np.array([kappa]), np.array([1.0 - kappa]))[0]
    assert got == pytest.approx(float(mp_power_mean(d, nu, kappa)), rel=1e-9)


def test_power_mean_circle_is_two_point_average():
    got = spherical_power_mean(1, 0.7, np.array([0.4]))
    assert got[0] == pytest.approx(0.5 * (0.6 ** -0.7 + 1.4 ** -0.7))


@given(st.integers(2, 7), st.floats(0.1, 3.0), st.floats(-18.0, -0.01))
def test_power_mean_table_matches_direct(d, nu, y):
    omz = math.exp(y)
    kappa = math.sqrt(-math.expm1(y))
    table = power_mean_table(d, round(nu, 3))
    direct = spherical_power_mean(d, round(nu, 3), np.array([kappa]), np.array([omz / (1 + kappa)]))[0]
    assert table(np.array([omz]))[0] == pytest.approx(direct, rel=1e-7)


def test_power_mean_table_below_range_uses_asymptotics():
    # nu > (d-1)/2: mean ~ C (1 - kappa^2)^((d-1)/2 - nu)
    table = power_mean_table(3, 1.5)
    a, b = table(np.array([1e-40, 1e-42]))
    assert a / b == pytest.approx(10 ** (-2 * 0.5), rel=1e-6)
