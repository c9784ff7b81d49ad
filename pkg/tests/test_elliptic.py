import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import special

from sranosov import elliptic
from sranosov.errors import DomainError


@pytest.mark.parametrize("k", [0.1, 0.5, 0.99])
def test_initial_values(k):
    trip = elliptic.jacobi(0.0, k)
    assert (trip.sn, trip.cn, trip.dn) == (0.0, 1.0, 1.0)


@pytest.mark.parametrize("k", [0.2, 0.5, 0.9])
def test_values_at_quarter_period(k):
    trip = elliptic.jacobi(elliptic.quarter_period(k), k)
    assert abs(trip.cn) <= 1e-9 and abs(trip.sn - 1) <= 1e-9


@pytest.mark.parametrize("t", [0.3, 1.1, 2.7])
def test_matches_landen_at_k06(t):
    ode = elliptic.jacobi(t, 0.6)
    agm = elliptic.jacobi_agm(t, 0.6)
    assert np.allclose([ode.sn, ode.cn, ode.dn], agm, atol=1e-9, rtol=0)


def test_landen_oracle_matches_scipy():
    t = np.linspace(-12, 12, 41)
    for k in (0.1, 0.5, 0.9):
        ref = special.ellipj(t, k * k)[:3]
        assert np.max(np.abs(np.array(elliptic.jacobi_agm(t, k)) - np.array(ref))) < 1e-12


def test_ode_matches_agm_on_grid():
    for k in np.linspace(0.1, 0.9, 5):
        t = np.linspace(-20, 20, 20)
        ode = elliptic.jacobi_array(t, k)
        assert np.max(np.abs(ode - np.stack(elliptic.jacobi_agm(t, k), axis=-1))) <= 1e-9


def test_quarter_period_values():
    assert abs(elliptic.quarter_period(1e-6) - math.pi / 2) <= 1e-6
    assert abs(elliptic.quarter_period(0.8) - math.pi / (2 * elliptic.agm(1, 0.6))) <= 1e-10
    assert abs(elliptic.quarter_period(0.8) - 1.9953) < 1e-4
    for k in (0.3, 0.7):
        assert abs(elliptic.quarter_period(k) - special.ellipk(k * k)) <= 1e-10


@pytest.mark.parametrize("k", [0.0, -0.2, 1.0, 1.5, float("nan")])
def test_modulus_domain(k):
    with pytest.raises(DomainError, match=r"\(0, 1\)"):
        elliptic.jacobi(0.3, k)


def test_periodicity_examples():
    assert elliptic.check_periodicity(0.3, [0.0]) <= 1e-9
    K = elliptic.quarter_period(0.5)
    assert elliptic.check_periodicity(0.5, np.linspace(0, 4 * K, 32)) <= 1e-8
    K7 = elliptic.quarter_period(0.7)
    assert elliptic.check_periodicity(0.7, np.linspace(0, 2 * K7, 16)) <= 1e-8


def test_sn_ode_residual():
    assert elliptic.sn_ode_residual(0.0, 0.5) == 0.0
    assert elliptic.sn_ode_residual(elliptic.quarter_period(0.5), 0.5) <= 1e-9
    assert elliptic.sn_ode_residual(1.3, 0.4) <= 1e-9


def test_symmetric_integrals():
    assert elliptic.symmetric_integrals(0.7, 0.7, 0.5) == (0.0, 0.0, 0.0)
    K = elliptic.quarter_period(0.5)
    assert max(map(abs, elliptic.symmetric_integrals(0.0, 4 * K, 0.5))) <= 1e-8
    s, c, _ = elliptic.symmetric_integrals(0.0, 2 * K, 0.5)
    assert abs(c) <= 1e-8 and s > 0.1


@settings(max_examples=40, deadline=None)
@given(st.floats(-40, 40), st.floats(0.05, 0.95))
def test_identities_and_parity(t, k):
    sn, cn, dn = elliptic.jacobi_array(np.array([t, -t]), k).T
    assert abs(sn[0] ** 2 + cn[0] ** 2 - 1) <= 1e-10
    assert abs(k * k * sn[0] ** 2 + dn[0] ** 2 - 1) <= 1e-10
    assert abs(sn[0] + sn[1]) <= 1e-9 and abs(cn[0] - cn[1]) <= 1e-9 and abs(dn[0] - dn[1]) <= 1e-9


@settings(max_examples=25, deadline=None)
@given(st.floats(0.05, 0.95), st.floats(0, 1))
def test_reflection_about_quarter_period(k, frac):
    K = elliptic.quarter_period(k)
    s = frac * K
    v = elliptic.jacobi_array(np.array([K + s, K - s]), k, quarter=K)
    assert abs(v[0, 0] - v[1, 0]) <= 1e-8
    assert abs(v[0, 1] + v[1, 1]) <= 1e-8


def test_reduce_argument_range():
    K = 1.7
    t = np.linspace(-50, 50, 1001)
    r = elliptic.reduce_argument(t, K)
    assert np.all(r >= -2 * K - 1e-12) and np.all(r < 2 * K)
    n = (t - r) / (4 * K)
    assert np.max(np.abs(n - np.round(n))) <= 1e-12
