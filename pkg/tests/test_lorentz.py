import numpy as np
import pytest
from sklearn.exceptions import NotFittedError

from contactlab.exceptions import CompositionError, RefusalError
from contactlab.flows import reeb_path, translation_path
from contactlab.lorentz import (NormEstimator, TauEstimator, conjugation_transport,
                                loop_tau_lower, norm_upper, positive_loop,
                                reverse_triangle_check, tau_lower)
from contactlab.manifolds import ContactModel, GridSpec

T3 = ContactModel("T3")
S3 = ContactModel("S3")
COARSE = GridSpec((12, 12, 12), depth=2)


@pytest.mark.parametrize("t", [0.3, 1.5])
def test_tau_of_reeb_flow_is_t(t):
    est = tau_lower(T3, reeb_path(T3, t), max_evals=40, seed=0)
    assert est.lower_bound >= t - 1e-6
    assert est.relation == "strictly precedes"
    assert est.matching_residual < 1e-9


@pytest.mark.parametrize("t", [0.5, 1.0])
def test_norm_of_reeb_flow_is_t(t):
    est = norm_upper(T3, reeb_path(T3, t), max_evals=40, seed=0)
    assert est.upper_bound <= t + 1e-3
    lower = tau_lower(T3, reeb_path(T3, t), max_evals=40, seed=0).lower_bound
    assert lower <= est.upper_bound + 1e-9


def test_translation_is_not_certified_positive():
    est = tau_lower(T3, translation_path(T3, 0.5, 0.0, 0.1), max_evals=20, seed=0, grid=COARSE)
    assert est.lower_bound <= 0.0 or not est.positive


def test_tau_is_seed_deterministic():
    a = tau_lower(T3, translation_path(T3, 0.2, 0.1, 1.0), max_evals=20, seed=3, grid=COARSE)
    b = tau_lower(T3, translation_path(T3, 0.2, 0.1, 1.0), max_evals=20, seed=3, grid=COARSE)
    assert a.to_dict() == b.to_dict()


@pytest.mark.parametrize("k", [1, 2, 3])
def test_s3_loop_bound_grows_linearly(k):
    est = loop_tau_lower(S3, k, max_evals=20, seed=0)
    assert est.lower_bound == pytest.approx(2 * np.pi * k, abs=1e-9)


def test_positive_loop_refused_on_orderable_models():
    for kind in ("T3", "J1S1", "STR2"):
        with pytest.raises(RefusalError):
            positive_loop(ContactModel(kind))
    cert = positive_loop(ContactModel("S3", scale=0.5), 2)
    assert cert.margin == pytest.approx(2 * np.pi)
    assert cert.matching_residual < 1e-7


def test_reverse_triangle_bounds_add():
    first = tau_lower(T3, reeb_path(T3, 0.4), max_evals=10, seed=0)
    second = tau_lower(T3, reeb_path(T3, 0.6), max_evals=10, seed=0, probe=first.end)
    both = reverse_triangle_check(first, second)
    assert both.lower_bound == pytest.approx(first.lower_bound + second.lower_bound, abs=1e-12)
    assert both.history[-1]["consistent"]
    assert both.lower_bound == pytest.approx(1.0, abs=1e-9)


def test_reverse_triangle_rejects_mismatched_endpoints():
    first = tau_lower(T3, reeb_path(T3, 0.4), max_evals=10, seed=0)
    second = tau_lower(T3, reeb_path(T3, 0.6), max_evals=10, seed=0)
    with pytest.raises(CompositionError):
        reverse_triangle_check(first, second)


def test_conjugation_transport_brackets():
    est = tau_lower(T3, reeb_path(T3, 1.0), max_evals=10, seed=0)
    tr = conjugation_transport(est, (0.5, 2.0))
    assert tr.lower == pytest.approx(0.5) and tr.widening == 4.0
    with pytest.raises(ValueError):
        conjugation_transport(est, (0.0, 1.0))


def test_estimators_follow_sklearn_conventions():
    tau = TauEstimator(max_evals=10)
    with pytest.raises(NotFittedError):
        tau.predict([reeb_path(T3, 0.5)])
    tau.fit(reeb_path(T3, 0.5))
    assert tau.lower_bound_ == pytest.approx(0.5, abs=1e-6)
    assert tau.get_params()["max_evals"] == 10
    norm = NormEstimator(max_evals=10).fit(reeb_path(T3, 0.5))
    assert norm.upper_bound_ <= 0.5 + 1e-3
