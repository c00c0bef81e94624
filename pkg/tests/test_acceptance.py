"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Run with ``pytest tests/test_acceptance.py -s`` or directly as a script.
"""

import sys
import time

import numpy as np
import pytest

from conftest import builtin_profiles, record
from foliamod import (GeneralField, GridChart, LevelSetFunction, NormalField, ScalarField,
                      WarpProfile, bko_residual, first_variation, jacobian_flow_check,
                      p_modulus, radial_foliation, random_fields, second_variation,
                      shear_foliation, stability_scan)
from foliamod.capacity import Condenser, capacity_q, nu_spread, q_harmonic_radial
from foliamod.foliation import random_general_fields
from foliamod.modulus import criticality_residual_u, fubini_residuals, nu_derivative_sides
from foliamod.variation import alpha0, critical_residual, hardy_residual, sigma2f0_residual

TORUS = WarpProfile.torus(1.0)
STABLE = ("cylinder", "torus", "euclidean", "hyperbolic", "spherical")


def _sup(fol, f):
    return float(np.max(np.abs(fol.sample(f))))


# 1 ----------------------------------------------------------------------------------

CLOSED_FORMS = [
    ("euclidean k=1 [1,e] p=2", WarpProfile.euclidean(1, np.e), 2.0, 1 / (2 * np.pi)),
    ("euclidean k=2 [1,2] p=2", WarpProfile.euclidean(1, 2, fiber_dim=2), 2.0, 1 / (8 * np.pi)),
] + [(f"cylinder p={p}", WarpProfile.cylinder(), p, (2 * np.pi) ** (1 - p))
     for p in (1.5, 2.0, 3.0)]


def test_criterion_1_closed_form_moduli():
    worst_err, worst_time = 0.0, 0.0
    for _, profile, p, expected in CLOSED_FORMS:
        start = time.perf_counter()
        value = p_modulus(radial_foliation(GridChart(profile, 2048)), p).value
        worst_time = max(worst_time, time.perf_counter() - start)
        worst_err = max(worst_err, abs(value - expected) / expected)
    ok = worst_err < 1e-6 and worst_time < 1.0
    assert record(1, ok, f"closed-form moduli: max rel err {worst_err:.2e}, "
                         f"slowest {worst_time:.3f} s")


# 2 ----------------------------------------------------------------------------------

def test_criterion_2_modulus_capacity_power_law():
    profiles = builtin_profiles()
    start = time.perf_counter()
    worst = 0.0
    for name in ("euclidean", "euclidean-k2", "hyperbolic", "spherical"):
        prof = profiles[name]
        for p in (1.5, 2.0, 3.0):
            rep = capacity_q(Condenser(prof), p / (p - 1), n_r=1024)
            dist = p_modulus(radial_foliation(GridChart(prof, 1024)), p).value
            for mod in (rep.modulus, dist):
                worst = max(worst, abs(mod * rep.value ** (p - 1) - 1))
    elapsed = time.perf_counter() - start
    ok = worst < 1e-6 and elapsed < 10
    assert record(2, ok, f"|mod_p cap_q^(p-1) - 1| max {worst:.2e} over 12 cases, "
                         f"{elapsed:.2f} s")


# 3 ----------------------------------------------------------------------------------

def test_criterion_3_integral_identities():
    chart = GridChart(TORUS, 256, 256, "surface")
    fields = random_fields(TORUS, 20, seed=2024)
    pairs = list(zip(fields[::2], fields[1::2]))
    worst = 0.0
    for fol in (radial_foliation(chart), shear_foliation(chart, 0.1)):
        for p in (1.5, 2.0, 3.0):
            for phi, psi in pairs:
                worst = max(worst, *fubini_residuals(fol, p, phi, psi))
    assert record(3, worst < 1e-7, f"integral identities: max residual {worst:.2e} "
                                   f"(10 pairs x 3 p x distance/shear)")


# 4 ----------------------------------------------------------------------------------

def _radial(profile, fn, dfn, d2fn):
    return LevelSetFunction(profile, fn, dfn, d2u_r=d2fn, radial=True)


def test_criterion_4_nu_derivative():
    worst_rel, worst_spread = 0.0, 0.0
    for prof in (WarpProfile.euclidean(1, np.e), WarpProfile.hyperbolic(1, 2)):
        for q in (1.5, 2.0, 3.0):
            funcs = [
                _radial(prof, lambda r: r, lambda r: 1 + 0 * r, lambda r: 0 * r),
                _radial(prof, lambda r: r ** 2, lambda r: 2 * r, lambda r: 2 + 0 * r),
                q_harmonic_radial(Condenser(prof), q),
            ]
            for u in funcs:
                lo, hi = u.label_range
                for s in lo + (hi - lo) * np.array([0.25, 0.5, 0.75]):
                    lhs, rhs = nu_derivative_sides(u, q / (q - 1), s, h=1e-3)
                    nu = u.nu(s, q)
                    worst_rel = max(worst_rel, abs(lhs - rhs) / max(abs(lhs), abs(rhs), nu))
            worst_spread = max(worst_spread, nu_spread(Condenser(prof), q, levels=20))
    ok = worst_rel < 1e-3 and worst_spread < 1e-8
    assert record(4, ok, f"nu derivative rel err {worst_rel:.2e}, q-harmonic nu spread "
                         f"{worst_spread:.2e}")


# 5 ----------------------------------------------------------------------------------

def test_criterion_5_criticality():
    profiles = builtin_profiles()
    worst_fv, worst_crit = 0.0, 0.0
    for name in STABLE:
        prof = profiles[name]
        fol = radial_foliation(GridChart(prof, 512, 32, "surface"))
        for f in random_fields(prof, 10, seed=5):
            worst_fv = max(worst_fv, abs(first_variation(fol, 2.0, f)) / _sup(fol, f))
        for p in (1.5, 2.0, 3.0):
            worst_crit = max(worst_crit, float(np.max(np.abs(critical_residual(fol, p)))))
            d = _radial(prof, lambda r: r, lambda r: 1 + 0 * r, lambda r: 0 * r)
            if not prof.periodic:
                worst_crit = max(worst_crit, float(np.max(np.abs(
                    criticality_residual_u(d, p, GridChart(prof, 512))))))
    shear = shear_foliation(GridChart(TORUS, 64, 64, "surface"), 0.3)
    control = float(np.max(np.abs(critical_residual(shear, 2.0))))
    ok = worst_fv < 1e-6 and worst_crit < 1e-8 and control > 1e-2
    assert record(5, ok, f"first variation / |f| {worst_fv:.2e}, criticality {worst_crit:.2e}, "
                         f"shear control {control:.3f}")


# 6 ----------------------------------------------------------------------------------

def _scalar(fn, d_r, d_t):
    return ScalarField(fn, d_r, d_t)


ZERO = _scalar(lambda r, t: 0 * r, lambda r, t: 0 * r, lambda r, t: 0 * r)
WORKED = [
    ("r d/dr", WarpProfile.euclidean(1, 2),
     GeneralField(_scalar(lambda r, t: r + 0 * t, lambda r, t: 1 + 0 * r, lambda r, t: 0 * r),
                  ZERO, name="r-dr"),
     lambda r, th: (1 + 0 * r, 4 + 0 * r)),
    ("d/dtheta", WarpProfile.hyperbolic(1, 2),
     GeneralField(ZERO, _scalar(lambda r, t: 1 + 0 * r, lambda r, t: 0 * r,
                                lambda r, t: 0 * r), name="dtheta"),
     lambda r, th: (0 * r, 0 * r)),
    ("sin(theta) d/dr", TORUS,
     GeneralField(_scalar(lambda r, t: np.sin(t) + 0 * r, lambda r, t: 0 * r,
                          lambda r, t: np.cos(t) + 0 * r), ZERO, name="sin-dr"),
     lambda r, th: (np.cos(th) ** 2, 0 * r)),
]


def test_criterion_6_jacobian_derivatives():
    worst = 0.0
    for _, prof, X, exact in WORKED:
        chk = jacobian_flow_check(X, GridChart(prof, 8, 16, "surface"))
        d2_leaf, d2_full = exact(chk.r, chk.theta)
        for mine, truth in ((chk.analytic.d2_leaf, d2_leaf), (chk.analytic.d2_full, d2_full),
                            (chk.numeric.d2_leaf, d2_leaf), (chk.numeric.d2_full, d2_full)):
            worst = max(worst, float(np.max(np.abs(mine - truth)) / max(1, np.max(np.abs(truth)))))
        worst = max(worst, chk.discrepancy)
    for prof in (WarpProfile.euclidean(1, 2), TORUS, WarpProfile.spherical(np.pi / 4,
                                                                           3 * np.pi / 4)):
        for X in random_general_fields(prof, 5, seed=17):
            worst = max(worst, jacobian_flow_check(X, GridChart(prof, 8, 16, "surface"))
                        .discrepancy)
    assert record(6, worst < 1e-3, f"Jacobian derivatives: max relative discrepancy {worst:.2e} "
                                   f"(3 worked + 5 seeded fields x 3 profiles)")


# 7 ----------------------------------------------------------------------------------

def test_criterion_7_torus_shear_benchmark():
    chart = GridChart(TORUS, 64, 128, "surface")
    sin = NormalField(lambda r, th: np.sin(th) + 0 * r, lambda r, th: 0 * r,
                      lambda r, th: np.cos(th) + 0 * r, name="sin-theta")
    rep = second_variation(radial_foliation(chart), 2.0, sin, fd_step=0.05)
    exact = -1 / (2 * np.pi)
    analytic_err = abs(rep.total - exact)
    worst_slope, monotone = 0.0, True
    for p in (2.0, 3.0):
        mod = {eps: p_modulus(shear_foliation(chart, eps), p).value
               for eps in (-0.1, -0.05, 0.0, 0.05, 0.1)}
        monotone &= all(mod[e] <= mod[0.0] for e in mod)
        worst_slope = max(worst_slope, abs(mod[0.05] - mod[-0.05]) / 0.1)
    ok = analytic_err < 1e-10 and rep.fd_discrepancy < 1e-5 and monotone and worst_slope < 1e-5
    assert record(7, ok, f"total {rep.total:.12f} vs -1/(2 pi), FD gap {rep.fd_discrepancy:.2e}, "
                         f"mod(eps) <= mod(0): {monotone}, slope {worst_slope:.2e}")


# 8, 9 -------------------------------------------------------------------------------

@pytest.fixture(scope="module")
def stable_foliations():
    profiles = builtin_profiles()
    return {name: radial_foliation(GridChart(profiles[name], 256, 64, "surface"))
            for name in STABLE}


def test_criterion_8_stability(stable_foliations):
    worst_ratio, worst_alpha, verdicts = -np.inf, 0.0, set()
    for name, fol in stable_foliations.items():
        family = random_fields(fol.profile, 20, seed=8)
        for p in (2.0, 3.0):
            rep = stability_scan(fol, p, family)
            verdicts.add(rep.verdict)
            worst_ratio = max(worst_ratio, max(r.total / r.scale for r in rep.records))
            worst_alpha = max(worst_alpha, float(np.max(np.abs(alpha0(fol, p) - 1))))
    ok = verdicts == {"stable-at-sampled-resolution"} and worst_alpha < 1e-10
    assert record(8, ok, f"stability: verdicts {sorted(verdicts)}, max total/scale "
                         f"{worst_ratio:.3e}, |alpha0 - 1| {worst_alpha:.2e}")


def test_criterion_9_hardy(stable_foliations):
    worst = np.inf
    for name, fol in stable_foliations.items():
        family = random_fields(fol.profile, 20, seed=9)
        for p in (2.0, 3.0):
            worst = min(worst, min(hardy_residual(fol, p, f) for f in family))
    assert record(9, worst >= -1e-10, f"Hardy inequality: min residual {worst:.3e}")


# 10 ---------------------------------------------------------------------------------

def test_criterion_10_curvature_identities():
    worst_bko, worst_s2 = 0.0, 0.0
    for prof in builtin_profiles().values():
        worst_bko = max(worst_bko, bko_residual(prof, 512))
        fol = radial_foliation(GridChart(prof, 512))
        for p in (2.0, 3.0):
            worst_s2 = max(worst_s2, sigma2f0_residual(fol, p))
    ok = worst_bko < 1e-6 and worst_s2 < 1e-6
    assert record(10, ok, f"curvature identity {worst_bko:.2e}, f0 identity {worst_s2:.2e} "
                          f"(6 profiles, n_r = 512)")


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-q", "-s", "-p", "no:cacheprovider"]))
