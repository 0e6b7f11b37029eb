import warnings

import numpy as np
import pytest
from hypothesis import given, strategies as st

from contactlab.exceptions import DomainError
from contactlab.flows import flow_map, translation_path
from contactlab.genfun import (Cutoff, GenFun, LegendrianCurve, Term, critical_locus,
                               cubical_complex, family_velocity, fishtail_family,
                               hodograph, hodograph_inverse, jet_genfun,
                               legendrian_from_genfun, lift_to_str2, origin_fiber, persistence,
                               pullback_residual, reeb_family, spectral_invariant,
                               spectral_values, translation_family, zap_sandwich)
from contactlab.genfun.locus import RegularityWarning
from contactlab.manifolds import ContactModel
from oracles import circle_spectral, essential_births, fishtail_roots, random_trig

TWO_PI = 2 * np.pi


@given(seed=st.integers(0, 2 ** 32 - 1), shape=st.sampled_from([(6, 4), (5, 5), (4, 3, 3)]))
def test_persistence_essential_classes_match_gf2_oracle(seed, shape):
    rng = np.random.default_rng(seed)
    v = rng.normal(size=shape)
    a = float(np.sort(v.ravel())[int(rng.integers(0, 4))])
    pers = persistence(cubical_complex(v), a)
    for deg in range(len(shape) + 1):
        assert np.allclose(sorted(pers.essential.get(deg, [])), essential_births(v, a, deg))


def test_circle_filtration_oracle_agrees_with_cubical_persistence():
    f = np.cos(TWO_PI * np.arange(32) / 32) + 0.3 * np.sin(2 * TWO_PI * np.arange(32) / 32)
    pers = persistence(cubical_complex(f[:, None]), -np.inf)
    lp, lf = circle_spectral(f)
    assert pers.essential[0] == [lp] and pers.essential[1] == [lf]


@given(seed=st.integers(0, 2 ** 32 - 1))
def test_jet_spectral_values_are_min_and_max(seed):
    terms, f = random_trig(np.random.default_rng(seed), degree=3)
    S = jet_genfun(terms)
    vals = spectral_values(S, n_q=128, n_e=33, refine=False)
    grid_f = f(TWO_PI * np.arange(128) / 128)
    tol = 2 * vals["point"].cell_tol
    assert abs(vals["point"].value - grid_f.min()) <= tol
    assert abs(vals["fundamental"].value - grid_f.max()) <= tol


@given(c=st.floats(-3, 3))
def test_shift_equivariance(c):
    S = jet_genfun([(0.7, ("cos", 2)), (0.2, ("sin", 1))])
    base = spectral_values(S, n_q=64, n_e=33, refine=False)
    moved = spectral_values(S.shifted(c), n_q=64, n_e=33, refine=False)
    for A in ("point", "fundamental"):
        assert moved[A].value - base[A].value == pytest.approx(c, abs=1e-12)


def test_stabilization_keeps_spectral_values():
    S = jet_genfun([(0.5, ("cos", 1)), (-0.25, ("sin", 3))])
    one = spectral_values(S, n_q=64, n_e=33, refine=False)
    two = spectral_values(S.stabilized(), n_q=64, n_e=17, refine=False)
    neg = spectral_values(S.stabilized(-1.0), n_q=64, n_e=17, refine=False)
    for A in ("point", "fundamental"):
        tol = 2 * max(one[A].cell_tol, two[A].cell_tol)
        assert abs(one[A].value - two[A].value) <= tol
        assert abs(one[A].value - neg[A].value) <= 2 * max(one[A].cell_tol, neg[A].cell_tol)


def test_spectral_invariant_example_and_class_validation():
    S = jet_genfun([(1.0, ("cos", 1))])
    assert spectral_invariant(S, "point", n_q=64, n_e=33, refine=False).value == -1.0
    with pytest.raises(ValueError):
        spectral_invariant(S, "top")


def test_spectral_refinement_brackets_value():
    S = fishtail_family()
    v = spectral_values(S, n_q=128, n_e=129)
    for A in ("point", "fundamental"):
        assert v[A].lower <= v[A].value <= v[A].upper


def test_fishtail_critical_locus_matches_polynomial_roots():
    S = fishtail_family()
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RegularityWarning)
        loc = critical_locus(S, 1.0, n_q=96, n_e=401)
    roots = fishtail_roots(TWO_PI * np.arange(96) / 96)
    checked = 0
    for i, sl in enumerate(loc.columns()):
        ok = ~loc.flagged[sl]
        if not np.all(ok) or len(roots[i]) != len(loc.e[sl]):
            continue
        assert np.allclose(np.sort(loc.e[sl][:, 0]), roots[i], atol=1e-8)
        checked += 1
    assert checked >= 80


def test_reeb_family_locus_is_zero_section_shifted():
    S = reeb_family()
    L = legendrian_from_genfun(S, 0.4, n_q=64)
    assert np.allclose(L.points[:, 1], 0.0) and np.allclose(L.points[:, 2], 0.4)


@given(pts=st.lists(st.tuples(st.floats(-5, 5), st.floats(-5, 5), st.floats(0, 6.28)),
                    min_size=1, max_size=8))
def test_hodograph_round_trip_and_pullback(pts):
    X = np.array(pts)
    back = hodograph_inverse(hodograph(X))
    assert np.allclose(back[:, :2], X[:, :2], atol=1e-9)
    assert np.allclose(np.mod(back[:, 2], TWO_PI), np.mod(X[:, 2], TWO_PI), atol=1e-9)
    v = np.random.default_rng(len(pts)).normal(size=X.shape)
    assert pullback_residual(X, v) < 1e-9


def test_translation_family_generates_transported_fiber():
    a, b, c = 0.6, 0.2, 0.3
    path = lift_to_str2(translation_path(ContactModel("T3"), a, b, c))
    fiber = origin_fiber(256)
    image = LegendrianCurve(ContactModel("J1S1"), hodograph(flow_map(path, fiber.points)))
    L = legendrian_from_genfun(translation_family(a, b, c), 1.0, n_q=256)
    assert image.hausdorff(L) < (TWO_PI / 256) ** 2


@pytest.mark.parametrize("name", ["reeb-q0", "jet-cos", "translation-hodograph"])
def test_sandwich_holds_for_closed_form_families(name):
    from contactlab.genfun import shipped_families
    rep = zap_sandwich(shipped_families()[name], "point", n_t=16, n_q=128)
    assert rep.passed
    assert rep.int_min - rep.tolerance <= rep.spectral <= rep.int_max + rep.tolerance


def test_sandwich_requires_start_at_zero_section():
    S = GenFun([1.0], [Term(1.0, "one", ("cos", 1))])
    with pytest.raises(DomainError):
        zap_sandwich(S)


def test_family_velocity_matches_geometric_velocity():
    fv = family_velocity(fishtail_family(), 0.6, n_q=128)
    assert not fv.flagged and fv.geometric_gap < 1e-3


def test_cutoff_and_genfun_validation():
    with pytest.raises(ValueError):
        GenFun([0.0])
    with pytest.raises(ValueError):
        GenFun([1.0, 1.0, 1.0])
    with pytest.raises(ValueError):
        Cutoff(3.0, 2.0)
