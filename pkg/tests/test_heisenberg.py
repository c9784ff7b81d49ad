import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from sranosov import heisenberg
from sranosov.errors import DomainError
from sranosov.heisenberg import HeisenbergGeodesicParams as Params, HeisenbergPoint


def test_straight_line():
    geo = heisenberg.geodesic(Params(0, 0, 1))
    assert np.allclose(geo.endpoint, [1, 0, 0], atol=1e-12)


def test_full_circle_is_vertical():
    geo = heisenberg.geodesic(Params(2 * math.pi, 0, 1))
    x, y, z = geo.endpoint
    assert abs(x) <= 1e-8 and abs(y) <= 1e-8 and abs(z) > 0.01


def test_half_circle_endpoint():
    x, y, _ = heisenberg.geodesic(Params(math.pi, 0, 1)).endpoint
    assert abs(x) <= 1e-8 and abs(y - 2 / math.pi) <= 1e-8


def test_length_guard():
    with pytest.raises(DomainError):
        Params(1.0, 0.0, 0.0)


def test_frame_fields():
    X1, X2 = heisenberg.frame_fields((2.0, 4.0, 0.0))
    assert list(X1) == [1, 0, -2] and list(X2) == [0, 1, 1]


@pytest.mark.parametrize("v0l,expect_small", [(2 * math.pi, True), (4 * math.pi, True), (3.0, False)])
def test_vertical_defect(v0l, expect_small):
    d = heisenberg.vertical_endpoint_defect(Params(v0l, 0, 1))
    assert (d <= 1e-8) if expect_small else (d >= 0.1)


@pytest.mark.parametrize("n", [1, 2, 3])
def test_balanced_on_full_turns(n):
    assert abs(heisenberg.balance_report(Params(2 * math.pi * n, 0.3, 1)).defect) <= 1e-8


@pytest.mark.parametrize("th0", [0.0, 0.4, 1.2])
def test_straight_line_defect(th0):
    rep = heisenberg.balance_report(Params(0, th0, 1))
    assert abs(rep.defect - math.cos(2 * th0)) <= 1e-8 and abs(rep.E1 - math.cos(th0) ** 2) <= 1e-8


def test_quarter_turn_fixture():
    assert abs(heisenberg.balance_report(Params(math.pi / 4, 0, 1)).defect - 2 / math.pi) <= 1e-8


def test_defect_closed_form():
    for v0l in (0.5, 1.7, 3.0, 5.5):
        for th0 in (0.0, 0.9):
            expected = (math.sin(2 * v0l + 2 * th0) - math.sin(2 * th0)) / (2 * v0l)
            assert abs(heisenberg.balance_report(Params(v0l, th0, 1)).defect - expected) <= 1e-8


def test_balance_iff_vertical_on_sweep():
    sweep = list(np.arange(0.5, 4 * math.pi, 0.5)) + [2 * math.pi, 4 * math.pi]
    for v0l in sweep:
        p = Params(v0l, 0, 1)
        balanced = abs(heisenberg.balance_report(p).defect) <= 1e-8
        vertical = heisenberg.vertical_endpoint_defect(p) <= 1e-8
        assert balanced == vertical, v0l


def test_half_turn_multiples_are_balanced_but_not_vertical():
    # the energy defect vanishes whenever v0 l is a multiple of pi
    for v0l in (math.pi / 2, math.pi, 3 * math.pi):
        p = Params(v0l, 0, 1)
        assert abs(heisenberg.balance_report(p).defect) <= 1e-8
        assert heisenberg.vertical_endpoint_defect(p) > 0.1


@settings(max_examples=20, deadline=None)
@given(st.floats(-8, 8), st.floats(0, 2 * math.pi), st.floats(0.1, 3),
       st.floats(-2, 2), st.floats(-2, 2))
def test_numeric_matches_closed_form(v0, th0, ell, x0, y0):
    p = Params(v0, th0, ell, HeisenbergPoint(x0, y0, 0.5))
    geo = heisenberg.geodesic(p, samples=50)
    x, y = heisenberg.closed_form_xy(p, geo.times)
    assert np.max(np.abs(geo.points[:, 0] - x)) <= 1e-8
    assert np.max(np.abs(geo.points[:, 1] - y)) <= 1e-8
    assert np.allclose(geo.path.w1 ** 2 + geo.path.w2 ** 2, 1, atol=1e-15)


@pytest.mark.parametrize("v0", [2 * math.pi, -3.0, 5.0])
def test_z_rise_equals_enclosed_area(v0):
    ell = 2 * math.pi / abs(v0)
    geo = heisenberg.geodesic(Params(v0, 0.3, ell), samples=20001)
    x, y = geo.points[:, 0], geo.points[:, 1]
    shoelace = 0.5 * np.sum(x[:-1] * y[1:] - x[1:] * y[:-1])
    assert abs(geo.endpoint[2] - shoelace) <= 1e-7
    assert abs(abs(shoelace) - math.pi / v0 ** 2) <= 1e-6
