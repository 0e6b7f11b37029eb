import numpy as np
import pytest
from hypothesis import given, strategies as st

from contactlab.exceptions import DomainError
from contactlab.legendrian import fiber, reeb_image
from contactlab.spacetime import (SKY_MODEL, Event, ProductSpacetime, continuity_scaling,
                                  deck_translates, null_geodesic, sky, sky_distance_upper,
                                  sky_order_certificate, tau_g, tau_g_collocation,
                                  torus_distance)

FLAT = ProductSpacetime()
WAVY = ProductSpacetime([(0.3, 1, 0, 0)])
TWO_PI = 2 * np.pi


def test_conformal_exponent_is_bounded():
    with pytest.raises(DomainError):
        ProductSpacetime([(0.8, 1, 0, 0), (0.7, 0, 1, 0)])


@given(a=st.tuples(st.floats(0, 6.28), st.floats(0, 6.28)),
       b=st.tuples(st.floats(-20, 20), st.floats(-20, 20)))
def test_torus_distance_is_a_metric_on_the_quotient(a, b):
    d = torus_distance(a, b)
    assert 0 <= d <= np.pi * np.sqrt(2) + 1e-9
    assert d == pytest.approx(torus_distance(b, a), abs=1e-9)
    assert d == pytest.approx(torus_distance(a, np.add(b, (TWO_PI, -TWO_PI))), abs=1e-9)
    assert len(deck_translates(a, b)) == 9


def test_flat_null_geodesics_are_straight_lines():
    theta = np.linspace(0, TWO_PI, 8, endpoint=False)
    g = null_geodesic(FLAT, Event(1.0, 0.5, 0.5), theta, -1.0)
    wrapped = lambda v: np.mod(v + np.pi, TWO_PI) - np.pi
    assert np.allclose(wrapped(g.x[-1] - 0.5 + np.cos(theta)), 0.0, atol=1e-12)
    assert np.allclose(wrapped(g.y[-1] - 0.5 + np.sin(theta)), 0.0, atol=1e-12)
    assert np.allclose(g.t[-1], 0.0)


def test_conformal_geodesics_conserve_y_momentum():
    # u depends on x only, so e^{2u} dy/dt = e^{u} sin(theta) is conserved
    theta = np.linspace(0.1, TWO_PI, 12, endpoint=False)
    g = null_geodesic(WAVY, Event(2.0, 0.3, 0.0), theta, -2.0, max_step=0.005, store=40)
    mom = np.exp(WAVY.u(np.column_stack([g.x.ravel(), g.y.ravel()]))).reshape(g.x.shape) \
        * np.sin(g.theta)
    assert np.max(np.abs(mom - mom[0])) < 1e-7
    assert g.drift < 1e-8


@pytest.mark.parametrize("event", [(0.7, 1.0, 2.0), (-0.4, 5.0, 0.1)])
def test_flat_sky_is_reeb_image_of_fiber(event):
    p = Event(*event)
    S = sky(FLAT, p, 128)
    exact = reeb_image(fiber(SKY_MODEL, (p.x, p.y), 128), p.t)
    assert S.curve.hausdorff(exact) < 1e-12
    assert S.curve.legendrian_residual() < 1e-4


def test_conformal_sky_is_legendrian():
    S = sky(WAVY, Event(1.0, 0.0, 0.0), 128)
    assert not S.flagged
    assert S.curve.legendrian_residual() < 1e-4


@pytest.mark.parametrize("q", [(1.0, 0.6, 0.0), (2.0, 1.0, 1.0), (0.5, 0.1, -0.2)])
def test_flat_collocation_matches_closed_form(q):
    res = tau_g_collocation(FLAT, (0, 0, 0), q, 32)
    assert res.converged
    assert res.value == pytest.approx(tau_g(FLAT, (0, 0, 0), q), abs=1e-9)


def test_tau_g_doctest_value_and_spacelike_pairs():
    assert tau_g(FLAT, (0, 0, 0), (1, 0.6, 0)) == pytest.approx(0.8)
    assert tau_g(FLAT, (0, 0, 0), (0.5, 1.0, 0)) == 0.0
    assert tau_g(FLAT, (0, 0, 0), (1, 2 * np.pi + 0.6, 0)) == pytest.approx(0.8)


def test_conformal_tau_is_bounded_by_flat_comparison():
    # h >= e^{-0.6} delta, so timelike paths are at least as long as in the scaled flat metric
    q = (1.5, 0.8, 0.2)
    lower = tau_g(WAVY, (0, 0, 0), q)
    dt, d = 1.5, np.hypot(0.8, 0.2)
    assert lower >= np.sqrt(dt ** 2 - (np.exp(0.3) * d) ** 2) - 1e-6
    assert lower <= np.sqrt(dt ** 2 - (np.exp(-0.3) * d) ** 2) + 1e-6


def test_sky_distance_witness_decomposition():
    est = sky_distance_upper(FLAT, (0, 0, 0), (0.5, 0.3, 0.4), 128)
    assert est.upper_bound == pytest.approx(1.0)
    assert est.reeb_part == pytest.approx(0.5) and est.translation_part == pytest.approx(0.5)
    assert est.matching_residual < 1e-9


def test_conformal_sky_distance_limited_to_time_shifts():
    est = sky_distance_upper(WAVY, (0, 0, 0), (0.2, 0, 0), 64)
    assert est.upper_bound == pytest.approx(0.2)
    with pytest.raises(DomainError):
        sky_distance_upper(WAVY, (0, 0, 0), (0.2, 0.1, 0), 64)


def test_continuity_scaling_constant():
    rows, C = continuity_scaling(FLAT, (0.0, 0.0), n=64)
    assert C <= 1.01
    assert [r[0] for r in rows] == [0.2, 0.1, 0.05, 0.025]


def test_order_certificate_margin():
    cert = sky_order_certificate(FLAT, (0, 0, 0), (1, 0.6, 0), 64)
    assert cert.margin == pytest.approx(0.4) and cert.tau_g == pytest.approx(0.8)
    assert cert.sampled_margin >= cert.margin - 1e-9
    assert cert.matching_residual < 1e-9
    assert sky_order_certificate(FLAT, (0, 0, 0), (0.5, 1.0, 0), 64) is None
    with pytest.raises(DomainError):
        sky_order_certificate(WAVY, (0, 0, 0), (1, 0.1, 0), 64)
