"""The nine acceptance criteria; each test records one pass/fail line."""

import time

import numpy as np
import pytest

from conftest import ACCEPTANCE
from contactlab.flows import (concatenate, flow_map, lorentz_length, reeb_path,
                              reeb_reparametrize)
from contactlab.genfun import (LegendrianCurve, genfun_for_path, hodograph, jet_genfun,
                               legendrian_from_genfun, lift_to_str2, origin_fiber,
                               shipped_families, spectral_values, theorem3_check,
                               weight_field, zap_sandwich)
from contactlab.library import random_path
from contactlab.lorentz import (loop_tau_lower, match_residual, norm_upper, probe_points,
                                reverse_triangle_check, tau_lower)
from contactlab.manifolds import ContactModel, GridSpec
from contactlab.spacetime import (ProductSpacetime, continuity_scaling, sky_order_certificate,
                                  torus_distance)
from oracles import dense_extrema, random_trig

T3 = ContactModel("T3")
TWO_PI = 2 * np.pi


def record(n, title, ok, detail):
    ACCEPTANCE[n] = (bool(ok), title, detail)
    print(f"criterion {n}: {'PASS' if ok else 'FAIL'}  {title}  ({detail})")
    assert ok, detail


def test_criterion_1_reeb_calibration():
    worst_lower, worst_cells, worst_time, ok = np.inf, 0.0, 0.0, True
    for t in (0.3, 0.7, 1.5):
        t0 = time.perf_counter()
        path = reeb_path(T3, t)
        est = tau_lower(T3, path, max_evals=200, seed=0)
        S = genfun_for_path(path)
        # the family must generate the hodograph image of the transported fiber
        moved = flow_map(lift_to_str2(path), origin_fiber(256).points)
        image = LegendrianCurve(ContactModel("J1S1"), hodograph(moved))
        gap = image.hausdorff(legendrian_from_genfun(S, 1.0, n_q=256))
        sv = spectral_values(S, 1.0)["point"]
        elapsed = time.perf_counter() - t0
        cells = abs(sv.value - t) / max(sv.cell_tol, 1e-300)
        worst_lower = min(worst_lower, est.lower_bound - t)
        worst_cells = max(worst_cells, cells)
        worst_time = max(worst_time, elapsed)
        ok &= (est.lower_bound >= t - 1e-6 and abs(sv.value - t) <= 2 * sv.cell_tol
               and gap < 1e-6 and elapsed <= 60 and sv.n_q >= 256)
    record(1, "Reeb calibration", ok,
           f"min lower-t={worst_lower:.2e}, spectral off by {worst_cells:.2f} cells, "
           f"max {worst_time:.1f}s")


def test_criterion_2_norm_calibration():
    ok, rows = True, []
    for t in (0.5, 1.0):
        path = reeb_path(T3, t)
        up = norm_upper(T3, path, max_evals=200, seed=0)
        lo = tau_lower(T3, path, max_evals=200, seed=0)
        ok &= up.upper_bound <= t + 1e-3 and lo.lower_bound <= up.upper_bound + lo.error_bound
        rows.append(f"t={t}: [{lo.lower_bound:.6f}, {up.upper_bound:.6f}]")
    record(2, "norm calibration", ok, "; ".join(rows))


def test_criterion_3_reparametrization_suite():
    delta, ok = 1e-3, True
    worst_dev = worst_end = worst_time = 0.0
    for kind in ("T3", "J1S1", "S3"):
        m = ContactModel(kind)
        P = probe_points(m, 32)
        for seed in range(20):
            path = random_path(m, 1000 + seed)
            t0 = time.perf_counter()
            new = reeb_reparametrize(path, delta=delta)
            elapsed = time.perf_counter() - t0
            info = new.info
            dev = float(np.max(np.abs(info.check_minima - info.target)))
            end = match_residual(m, flow_map(path, P, 1000), flow_map(new, P, 1000))
            worst_dev, worst_end = max(worst_dev, dev), max(worst_end, end)
            worst_time = max(worst_time, elapsed)
            ok &= dev < delta and end <= 1e-5 and elapsed <= 5.0
    record(3, "Reeb reparametrization, 60 paths", ok,
           f"max |min-eps|={worst_dev:.2e}, endpoint {worst_end:.2e}, max {worst_time:.2f}s")


def test_criterion_4_sandwich():
    fams = shipped_families()
    assert len(fams) >= 10
    worst, ok = np.inf, True
    for name, S in fams.items():
        for A in ("point", "fundamental"):
            rep = zap_sandwich(S, A, strict=False)
            ok &= rep.passed
            worst = min(worst, rep.slack_lower + rep.tolerance, rep.slack_upper + rep.tolerance)
    record(4, f"sandwich on {len(fams)} families x 2 classes", ok,
           f"smallest slack beyond tolerance {worst:.3e}")


def test_criterion_5_spectral_oracle():
    rng = np.random.default_rng(2024)
    ok, worst_cells, worst_shift, worst_stab = True, 0.0, 0.0, 0.0
    for _ in range(50):
        terms, f = random_trig(rng, degree=5)
        lo, hi = dense_extrema(f)
        S = jet_genfun(terms)
        v = spectral_values(S, n_q=256, n_e=33, refine=False)
        tol = 2 * v["point"].cell_tol
        cells = max(abs(v["point"].value - lo), abs(v["fundamental"].value - hi)) / (tol / 2)
        worst_cells = max(worst_cells, cells)
        ok &= abs(v["point"].value - lo) <= tol and abs(v["fundamental"].value - hi) <= tol
        c = float(rng.uniform(-2, 2))
        w = spectral_values(S.shifted(c), n_q=256, n_e=33, refine=False)
        shift = max(abs(w[A].value - v[A].value - c) for A in w)
        worst_shift = max(worst_shift, shift)
        ok &= shift <= 1e-12
        s2 = spectral_values(S.stabilized(), n_q=128, n_e=9, refine=False)
        tol2 = 2 * max(s2["point"].cell_tol, v["point"].cell_tol)
        stab = max(abs(s2["point"].value - lo), abs(s2["fundamental"].value - hi))
        worst_stab = max(worst_stab, stab / tol2)
        ok &= stab <= tol2
    record(5, "spectral oracle on 50 trig polynomials", ok,
           f"worst {worst_cells:.2f} cells, shift err {worst_shift:.1e}, "
           f"stabilized {worst_stab:.2f} of tolerance")


def test_criterion_6_theorem3():
    rho = weight_field(1.0 / 3.0)
    ok, worst = True, -np.inf
    for seed in range(10):
        path = random_path(T3, 500 + seed, positive=True)
        rep = theorem3_check(path, rho, max_evals=150, seed=seed, family=None)
        ok &= rep.checks["tau_le_C_d"] and abs(rep.C - 2.0) < 1e-9
        worst = max(worst, rep.tau_lower - rep.C * rep.d_upper)
    record(6, "tau <= C d on 10 weighted T3 paths", ok, f"max tau - C d = {worst:.3f}")


def test_criterion_7_s3_loops():
    S3 = ContactModel("S3")
    lows = [loop_tau_lower(S3, k, max_evals=20, seed=0).lower_bound for k in range(1, 6)]
    lin = max(abs(lows[k - 1] - k * lows[0]) for k in range(1, 6))
    ok = lin <= 1e-9 and all(lows[k - 1] >= TWO_PI * k - 1e-9 for k in range(1, 6))
    record(7, "S3 loop bounds 2 pi k, k = 1..5", ok, f"linearity error {lin:.1e}")


def test_criterion_8_concatenation():
    grid = GridSpec((12, 12, 12), depth=2)
    ok, worst_add, worst_tri = True, 0.0, 0.0
    for i in range(20):
        m = T3 if i % 2 == 0 else ContactModel("S3")
        p1 = random_path(m, 3000 + 2 * i, n_terms=2, positive=True)
        p2 = random_path(m, 3001 + 2 * i, n_terms=2, positive=True)
        L1, L2, L = (lorentz_length(p) for p in (p1, p2, concatenate(p1, p2)))
        add = abs(L.value - L1.value - L2.value)
        ok &= add <= L.error_bound + L1.error_bound + L2.error_bound
        worst_add = max(worst_add, add)
        e1 = tau_lower(m, p1, max_evals=10, seed=i, grid=grid, steps=300)
        e2 = tau_lower(m, p2, max_evals=10, seed=i, grid=grid, steps=300, probe=e1.end)
        both = reverse_triangle_check(e1, e2, grid=grid, steps=300)
        tri = abs(both.lower_bound - (e1.lower_bound + e2.lower_bound))
        ok &= tri <= 1e-6 and both.history[-1]["consistent"]
        worst_tri = max(worst_tri, tri)
    record(8, "concatenation additivity and reverse triangle", ok,
           f"additivity gap {worst_add:.2e}, triangle gap {worst_tri:.1e}")


def test_criterion_9_spacetime():
    t0 = time.perf_counter()
    st = ProductSpacetime()
    rows, C = continuity_scaling(st, (0.0, 0.0), (0.2, 0.1, 0.05, 0.025))
    ok = all(r[1] <= 1.01 * r[0] for r in rows)
    rng = np.random.default_rng(99)
    worst = worst_sampled = 0.0
    for _ in range(50):
        p = np.concatenate([[rng.uniform(-1, 1)], rng.uniform(0, TWO_PI, 2)])
        dt = rng.uniform(0.2, 2.0)
        ang, r = rng.uniform(0, TWO_PI), rng.uniform(0, 0.95) * min(dt, np.pi)
        q = p + np.array([dt, r * np.cos(ang), r * np.sin(ang)])
        cert = sky_order_certificate(st, p, q, 128)
        expected = dt - torus_distance(p[1:], q[1:])
        ok &= cert is not None and cert.margin > 0 and abs(cert.margin - expected) <= 1e-6
        if cert is not None:
            worst = max(worst, abs(cert.margin - expected))
            # the sampled isotopy is an independent route: a sampled minimum
            # can only overestimate the closed-form one, and only slightly
            gap = cert.sampled_margin - cert.margin
            ok &= -1e-9 <= gap <= 1e-3 and cert.matching_residual < 1e-9
            worst_sampled = max(worst_sampled, gap)
    elapsed = time.perf_counter() - t0
    ok &= elapsed <= 120
    record(9, "flat spacetime continuity and sky order", ok,
           f"C={C:.4f}, margin error {worst:.1e}, sampled excess {worst_sampled:.1e}, "
           f"{elapsed:.1f}s")
