import numpy as np
import pytest
from hypothesis import given, strategies as st

from contactlab.exceptions import DomainError
from contactlab.lorentz import probe_points
from contactlab.manifolds import (ContactModel, GridSpec, ScalarField, alpha_eval,
                                  contact_vector_field, extremize, reeb_field)
from oracles import reeb_oracle

KINDS = ["T3", "STR2", "J1S1", "S3"]


@pytest.mark.parametrize("kind", KINDS)
@pytest.mark.parametrize("sign,scale", [(1, 1.0), (-1, 1.0), (1, 0.5), (-1, 2.0)])
def test_reeb_matches_symbolic_solve(kind, sign, scale):
    m = ContactModel(kind, sign, scale)
    P = probe_points(m, 32)
    expected = reeb_oracle(kind)(P) / m.sigma
    assert np.allclose(m.reeb(P), expected, atol=1e-12)


@pytest.mark.parametrize("kind", KINDS)
def test_alpha_of_reeb_is_one(kind):
    m = ContactModel(kind, -1, 1.7)
    P = probe_points(m, 16)
    vals = np.einsum("ij,ij->i", m.alpha_covector(P), m.reeb(P))
    assert np.allclose(vals, 1.0)


@pytest.mark.parametrize("kind", KINDS)
@given(s=st.floats(-3, 3), r=st.floats(-3, 3))
def test_reeb_flow_is_a_group(kind, s, r):
    m = ContactModel(kind)
    P = probe_points(m, 8)
    a = m.reeb_flow(m.reeb_flow(P, s), r)
    b = m.reeb_flow(P, s + r)
    assert np.max(np.abs(m.chart_difference(a, b))) < 1e-9


@pytest.mark.parametrize("kind", KINDS)
def test_reeb_flow_derivative_is_reeb_field(kind):
    m = ContactModel(kind)
    P = probe_points(m, 8)
    h = 1e-6
    d = m.chart_difference(m.reeb_flow(P, h), m.reeb_flow(P, -h)) / (2 * h)
    assert np.allclose(d, m.reeb(P), atol=1e-6)


@pytest.mark.parametrize("kind", ["T3", "J1S1", "S3"])
@given(seed=st.integers(0, 10_000))
def test_contact_field_evaluates_to_hamiltonian(kind, seed):
    m = ContactModel(kind)
    rng = np.random.default_rng(seed)
    k = rng.integers(-2, 3, size=3)

    if kind == "S3":
        H = ScalarField(lambda x: 1.0 + x[:, 0] * x[:, 3],
                        lambda x: np.column_stack([x[:, 3], 0 * x[:, 0], 0 * x[:, 0], x[:, 0]]))
    else:
        H = ScalarField(lambda x: np.cos(x @ k) + 0.5,
                        lambda x: -np.sin(x @ k)[:, None] * k[None, :])
    P = probe_points(m, 8, seed=seed)
    X = contact_vector_field(m, H, P)
    assert np.allclose(np.einsum("ij,ij->i", m.alpha_covector(P), X), H(P), atol=1e-10)


def test_alpha_eval_example():
    assert alpha_eval(ContactModel("J1S1"), [0.0, 2.0, 0.0], [1.0, 0.0, 0.0]) == -2.0
    assert np.allclose(reeb_field(ContactModel("T3"), [0.0, 0.0, 0.3]),
                       [np.cos(0.3), np.sin(0.3), 0.0])


def test_s3_rejects_points_off_the_sphere():
    with pytest.raises(DomainError):
        ContactModel("S3").check_points([[1.0, 1.0, 0.0, 0.0]])


def test_bad_model_parameters():
    with pytest.raises(ValueError):
        ContactModel("T3", scale=0.0)
    with pytest.raises(ValueError):
        ContactModel("K3")


def test_extremize_trig_field_on_t3():
    m = ContactModel("T3")
    f = ScalarField(lambda x: np.cos(x[:, 0]) + 0.5 * np.sin(x[:, 2]),
                    lambda x: np.column_stack([-np.sin(x[:, 0]), 0 * x[:, 0],
                                               0.5 * np.cos(x[:, 2])]))
    ext = extremize(m, f, GridSpec((16, 8, 16)))
    assert abs(ext.min + 1.5) < 1e-9 and abs(ext.max - 1.5) < 1e-9
    assert 0 <= ext.error_bound < 0.05


def test_extremize_s3_monomial():
    m = ContactModel("S3")
    f = ScalarField(lambda x: x[:, 0] * x[:, 1],
                    lambda x: np.column_stack([x[:, 1], x[:, 0], 0 * x[:, 0], 0 * x[:, 0]]))
    ext = extremize(m, f)
    assert abs(ext.min + 0.5) < 1e-6 and abs(ext.max - 0.5) < 1e-6
