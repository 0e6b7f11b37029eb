import numpy as np
import pytest
from hypothesis import given, strategies as st
from sklearn.exceptions import NotFittedError

from contactlab.exceptions import RefusalError
from contactlab.flows import flow_map, reeb_path, translation_path
from contactlab.genfun import LegendrianCurve
from contactlab.legendrian import (ChekanovEstimator, LegIsotopy, LegTauEstimator,
                                   cheap_hopf_input, chekanov_upper, fiber, hopf_circle,
                                   jet_curve, leg_lorentz_length, leg_reparametrize,
                                   leg_tau_lower, loop_from_cheap_path, reeb_image,
                                   zero_section)
from contactlab.library import random_path
from contactlab.manifolds import ContactModel

T3 = ContactModel("T3")
J1 = ContactModel("J1S1")


@pytest.mark.parametrize("curve", [fiber(T3, (0.3, 1.0), 64), zero_section(64),
                                   jet_curve([(0.4, ("cos", 2)), (0.1, ("one",))], 64),
                                   hopf_circle(ContactModel("S3"), 64)])
def test_shipped_curves_are_legendrian(curve):
    # spline interpolation error of the sampled curve, O(h^4)
    assert curve.legendrian_residual() < 1e-4


@given(s=st.floats(-2, 2))
def test_reeb_image_matches_reeb_isotopy(s):
    L = fiber(T3, n=32)
    iso = LegIsotopy(L, reeb_path(T3, s), 8, 256)
    assert iso.final.hausdorff(reeb_image(L, s)) < 1e-10


@pytest.mark.parametrize("t", [0.25, 0.9])
def test_reeb_isotopy_length_and_tau(t):
    iso = LegIsotopy(fiber(T3, n=64), reeb_path(T3, t), 16, 256)
    L = leg_lorentz_length(iso)
    assert L.value == pytest.approx(t, abs=1e-12)
    value, err = L
    assert err <= 1e-9
    est = leg_tau_lower(iso, reeb_image(fiber(T3, n=64), t))
    assert est.relation == "strictly precedes" and est.lower_bound >= t - 1e-9


def test_isotopy_velocity_matches_hamiltonian_vector_field():
    iso = LegIsotopy(fiber(T3, n=32), random_path(T3, 2), 16, 512)
    assert iso.velocity_residual(h=1e-4) < 1e-6


@pytest.mark.parametrize("model,curve", [(T3, fiber(T3, n=128)), (J1, zero_section(128))])
def test_leg_reparametrize_equalizes_minima(model, curve):
    path = random_path(model, 5, positive=True)
    iso = LegIsotopy(curve, path, 32, 512)
    new = leg_reparametrize(iso, 1e-3)
    assert new.max_deviation < 1e-3
    assert np.all(np.abs(new.minima() - new.level) < 1e-3)
    assert new.final.hausdorff(iso.final) < 1e-5


def test_leg_tau_reports_endpoint_mismatch():
    iso = LegIsotopy(fiber(T3, n=32), reeb_path(T3, 0.5), 8, 256)
    est = leg_tau_lower(iso, fiber(T3, (1.0, 0.0), 32))
    assert est.relation.startswith("not certified") and est.lower_bound == 0.0


def test_chekanov_translation_bound_is_closed_form():
    L0 = fiber(T3, n=128)
    L1 = LegendrianCurve(T3, T3.wrap(flow_map(translation_path(T3, 0.3, 0.4, 0.0), L0.points)))
    est = chekanov_upper(L0, L1, seed=0)
    assert est.certified and est.upper_bound == pytest.approx(0.5, abs=1e-9)


def test_chekanov_reeb_shift():
    L0 = fiber(T3, n=128)
    est = chekanov_upper(L0, reeb_image(L0, 0.37), seed=0)
    assert est.certified and est.upper_bound == pytest.approx(0.37, abs=1e-9)


def test_chekanov_jet_pair_is_certified_and_above_max_gap():
    L0, L1 = zero_section(128), jet_curve([(0.2, ("cos", 1)), (0.05, ("one",))], 128)
    est = chekanov_upper(L0, L1, seed=0)
    assert est.certified and est.matching_residual <= est.eta
    # the z-gap between the curves is a lower bound for any connecting norm
    assert est.upper_bound >= 0.25 - 1e-9


def test_identity_pair_has_zero_distance():
    L0 = fiber(T3, n=64)
    assert chekanov_upper(L0, L0).upper_bound == 0.0


def test_hopf_loop_certificate():
    cert = loop_from_cheap_path(cheap_hopf_input(n=64, n_t=16, steps=256))
    assert cert.certified
    assert cert.margin == pytest.approx(0.5, abs=1e-6)
    assert cert.closing_residual < 1e-6


def test_loop_refused_for_long_inputs():
    model = ContactModel("S3", 1, 1 / (2 * np.pi))
    iso = LegIsotopy(hopf_circle(model, 32), reeb_path(model, -1.5), 8, 256)
    with pytest.raises(RefusalError):
        loop_from_cheap_path(iso)


def test_legendrian_estimators():
    with pytest.raises(NotFittedError):
        LegTauEstimator().predict()
    iso = LegIsotopy(fiber(T3, n=32), reeb_path(T3, 0.5), 8, 256)
    assert LegTauEstimator().fit(iso).lower_bound_ == pytest.approx(0.5, abs=1e-9)
    L0 = fiber(T3, n=64)
    assert ChekanovEstimator().fit((L0, reeb_image(L0, 0.2))).upper_bound_ == pytest.approx(0.2)
