import numpy as np
import pytest
from hypothesis import given, strategies as st

from contactlab.exceptions import ToleranceError
from contactlab.flows import (BasisPath, Mode, TimeProfile, concatenate, conformal_factor,
                              dumps_path, flow_map, integrate, loads_path, lorentz_length,
                              reeb_path, reeb_reparametrize, reverse, shelukhin_length,
                              simpson_weights, time_warp, translation_path)
from contactlab.library import random_path
from contactlab.lorentz import match_residual, probe_points
from contactlab.manifolds import ContactModel
from oracles import conformal_factor_fd

ONE = TimeProfile("poly", (1.0,))


@pytest.mark.parametrize("kind", ["T3", "J1S1", "S3"])
@pytest.mark.parametrize("c", [0.3, -1.2])
def test_rk4_reeb_path_matches_closed_form_reeb_flow(kind, c):
    m = ContactModel(kind, -1 if kind == "T3" else 1, 0.8)
    P = probe_points(m, 16)
    end = integrate(reeb_path(m, c), P, 400).final
    assert match_residual(m, end, m.reeb_flow(P, c)) < 1e-10


@given(a=st.floats(-2, 2), b=st.floats(-2, 2), c=st.floats(-1, 1))
def test_translation_flow_closed_form(a, b, c):
    m = ContactModel("T3")
    P = probe_points(m, 8)
    path = translation_path(m, a, b, c)
    closed = flow_map(path, P)
    numeric = integrate(path, P, 400).final
    assert match_residual(m, closed, numeric) < 1e-9
    # the base point moves by (a, b) and the coorientation shift is the Reeb time
    shifted = m.reeb_flow(P + np.array([a, b, 0.0]), c)
    assert match_residual(m, closed, m.wrap(shifted)) < 1e-9


@pytest.mark.parametrize("kind,seed", [("T3", 0), ("J1S1", 1), ("S3", 2)])
def test_conformal_factor_matches_finite_differences(kind, seed):
    m = ContactModel(kind)
    path = random_path(m, seed)
    P = probe_points(m, 12, seed=seed)
    trace = integrate(path, P, 1000, probes=True)
    rho = conformal_factor(trace)
    assert np.allclose(rho.values, conformal_factor_fd(path, P), rtol=1e-5, atol=1e-6)
    assert rho.consistency < 1e-5


def test_strict_paths_have_unit_conformal_factor():
    m = ContactModel("T3")
    trace = integrate(translation_path(m, 0.4, -0.3, 0.2), probe_points(m, 8), 400, probes=True)
    assert np.allclose(conformal_factor(trace).values, 1.0, atol=1e-8)


@pytest.mark.parametrize("kind", ["T3", "J1S1", "S3"])
def test_path_text_round_trip(kind):
    m = ContactModel(kind, -1, 0.5)
    path = concatenate(random_path(m, 4), reverse(time_warp(random_path(m, 5))))
    text = dumps_path(path)
    again = loads_path(text)
    assert dumps_path(again) == text
    P = probe_points(m, 6)
    assert match_residual(m, flow_map(path, P, 400), flow_map(again, P, 400)) < 1e-12


def test_simpson_weights_integrate_cubics_exactly():
    w = simpson_weights(8)
    t = np.linspace(0, 1, 9)
    assert np.isclose(w @ (t ** 3 - 2 * t), 0.25 - 1.0)
    with pytest.raises(ValueError):
        simpson_weights(7)


@pytest.mark.parametrize("t", [0.3, 0.7, 1.5])
def test_reeb_lengths(t):
    m = ContactModel("T3")
    assert lorentz_length(reeb_path(m, t)).value == pytest.approx(t, abs=1e-12)
    assert shelukhin_length(reeb_path(m, -t)).value == pytest.approx(t, abs=1e-12)


def test_translation_lengths_closed_form():
    m = ContactModel("T3")
    path = translation_path(m, 0.3, 0.4, 1.0)
    L = lorentz_length(path)
    assert abs(L.value - 0.5) <= L.error_bound + 1e-9
    S = shelukhin_length(path)
    assert abs(S.value - 1.5) <= S.error_bound + 1e-9


@pytest.mark.parametrize("seed", [0, 1])
def test_concatenation_lengths_add(seed):
    m = ContactModel("S3")
    p1, p2 = random_path(m, seed), random_path(m, seed + 10)
    L1, L2, L = (lorentz_length(p) for p in (p1, p2, concatenate(p1, p2)))
    assert abs(L.value - L1.value - L2.value) <= L.error_bound + L1.error_bound + L2.error_bound


def test_concatenation_endpoint_is_composition():
    m = ContactModel("J1S1")
    p1, p2 = random_path(m, 3), random_path(m, 4)
    P = probe_points(m, 8)
    both = flow_map(concatenate(p1, p2), P, 2000)
    seq = flow_map(p2, flow_map(p1, P, 1000), 1000)
    assert match_residual(m, both, seq) < 1e-7


def test_reverse_undoes_the_flow():
    m = ContactModel("T3")
    p = random_path(m, 7)
    P = probe_points(m, 8)
    back = flow_map(reverse(p), flow_map(p, P, 1000), 1000)
    assert match_residual(m, back, P) < 1e-7


def test_time_warp_keeps_endpoint():
    m = ContactModel("S3")
    p = random_path(m, 2)
    P = probe_points(m, 8)
    assert match_residual(m, flow_map(time_warp(p), P, 1000), flow_map(p, P, 1000)) < 1e-7


@pytest.mark.parametrize("kind", ["T3", "J1S1", "S3"])
@pytest.mark.parametrize("seed", [11, 12])
def test_reparametrize_equalizes_minima_and_keeps_endpoint(kind, seed):
    m = ContactModel(kind)
    path = random_path(m, seed)
    delta = 1e-3
    new = reeb_reparametrize(path, delta=delta)
    info = new.info
    assert info.max_deviation < delta
    assert np.all(np.abs(info.check_minima - info.target) < delta)
    # the level is the Lorentzian length, which reparametrization preserves
    assert abs(info.target - lorentz_length(path).value) < 2e-3
    P = probe_points(m, 16)
    assert match_residual(m, flow_map(path, P, 1000), flow_map(new, P, 1000)) < 1e-5


def test_reparametrize_rejects_inconsistent_target():
    m = ContactModel("T3")
    with pytest.raises((ToleranceError, ValueError)):
        reeb_reparametrize(reeb_path(m, 0.5), target=0.9)
    with pytest.raises(ValueError):
        reeb_reparametrize(reeb_path(m, 0.5), delta=0.0)


def test_basis_path_rejects_wrong_modes():
    with pytest.raises(ValueError):
        BasisPath(ContactModel("J1S1"), [(1.0, ONE, Mode("mono", (1, 0, 0, 0)))])
    with pytest.raises(ValueError):
        BasisPath(ContactModel("J1S1"), [(1.0, ONE, Mode("fourier", (1, 0, 0, 0)))])
