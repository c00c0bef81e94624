import io

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import integrate

from foliamod import (DomainError, FlowDegeneracyError, GridChart, LevelSetFunction,
                      NormalField, WarpProfile, extremal_function, flow_normal_field,
                      graph_foliation, hat, radial_foliation, random_fields, shear_foliation)
from foliamod.foliation import gradient_norm, normalize_levelset, write_grid_csv

TORUS = WarpProfile.torus(1.0)
ANNULUS = WarpProfile.euclidean(1.0, 2.0)


def one(r, th):
    return 1.0 + 0.0 * r


def radial_u(profile, fn, dfn, d2fn=None):
    return LevelSetFunction(profile, fn, dfn, d2u_r=d2fn, radial=True)


# -- hat ------------------------------------------------------------------------------

@pytest.mark.parametrize("t", [1.0, 1.25, 2.0])
def test_hat_of_one_on_circles(t):
    fol = radial_foliation(GridChart(ANNULUS, 65, 32, "surface"))
    assert hat(one, fol, t=t) == pytest.approx(2 * np.pi * t, rel=1e-14)


@pytest.mark.parametrize("eps", [0.1, 0.3, 0.7])
def test_hat_of_one_on_sheared_leaf(eps):
    fol = shear_foliation(GridChart(TORUS, 16, 128, "surface"), eps)
    oracle = integrate.quad(lambda th: np.sqrt(1 + eps ** 2 * np.cos(th) ** 2), 0, 2 * np.pi,
                            epsabs=0, epsrel=1e-13, limit=200)[0]
    assert hat(one, fol, t=0.25) == pytest.approx(oracle, rel=1e-12)


def test_hat_through_point():
    fol = shear_foliation(GridChart(TORUS, 16, 64, "surface"), 0.2)
    # the leaf through (0.5, pi/2) has label 0.3
    assert fol.label_of(0.5, np.pi / 2) == pytest.approx(0.3, abs=1e-12)
    assert hat(one, fol, point=(0.5, np.pi / 2)) == pytest.approx(hat(one, fol, t=0.3))


@pytest.mark.parametrize("fol", [
    radial_foliation(GridChart(ANNULUS, 64, 32, "surface")),
    shear_foliation(GridChart(TORUS, 32, 64, "surface"), 0.4),
    radial_foliation(GridChart(WarpProfile.euclidean(1, 2, fiber_dim=2), 64)),
])
@pytest.mark.parametrize("p", [1.5, 2.0, 3.0])
def test_hat_of_extremal_is_one(fol, p):
    assert np.max(np.abs(fol.hat(extremal_function(fol, p).values) - 1)) < 1e-12


def test_hat_label_out_of_range():
    fol = radial_foliation(GridChart(ANNULUS, 32))
    with pytest.raises(DomainError):
        hat(one, fol, t=2.5)


@settings(max_examples=20, deadline=None)
@given(st.floats(-3, 3), st.floats(0, 3))
def test_hat_linear_and_monotone(a, c):
    fol = shear_foliation(GridChart(TORUS, 16, 32, "surface"), 0.2)
    f = fol.sample(lambda r, th: np.cos(th) + r)
    g = fol.sample(lambda r, th: np.sin(th) ** 2)
    assert np.allclose(fol.hat(a * f + g), a * fol.hat(f) + fol.hat(g), atol=1e-12)
    assert np.all(fol.hat(f + c * g) >= fol.hat(f) - 1e-14)


def test_hat_of_one_is_leaf_volume():
    prof = WarpProfile.hyperbolic(1, 2, fiber_dim=2)
    fol = radial_foliation(GridChart(prof, 32))
    assert np.allclose(fol.hat(np.ones(32)), prof.sigma(fol.t), rtol=1e-14)


# -- gradient norm --------------------------------------------------------------------

def test_gradient_of_distance():
    u = radial_u(ANNULUS, lambda r: r, lambda r: 1 + 0 * r)
    assert np.all(gradient_norm(u, GridChart(ANNULUS, 16, 8, "surface")) == 1.0)


@pytest.mark.parametrize("eps", [0.0, 0.2, 0.5])
def test_gradient_of_shear(eps):
    fol = shear_foliation(GridChart(TORUS, 8, 32, "surface"), eps)
    assert np.allclose(gradient_norm(fol), np.sqrt(1 + eps ** 2 * np.cos(fol.theta) ** 2),
                       rtol=1e-15)


def test_gradient_of_r_squared_on_flat_band():
    band = WarpProfile.cylinder(1, 2)
    u = radial_u(band, lambda r: r ** 2, lambda r: 2 * r)
    chart = GridChart(band, 16, 8, "surface")
    assert np.allclose(gradient_norm(u, chart), 2 * chart.mesh()[0], rtol=1e-14)


# -- flows ----------------------------------------------------------------------------

def test_zero_flow_is_identity():
    fol = radial_foliation(GridChart(ANNULUS, 32, 16, "surface"))
    zero = NormalField(lambda r, th: 0 * r, lambda r, th: 0 * r, lambda r, th: 0 * r)
    out = flow_normal_field(fol, zero, 0.3, 10)
    assert np.array_equal(out.rho, fol.rho) and np.array_equal(out.rho_t, fol.rho_t)


@pytest.mark.parametrize("t", [-0.2, 0.05, 0.3])
def test_torus_sine_flow_is_a_shear(t):
    fol = radial_foliation(GridChart(TORUS, 16, 32, "surface"))
    f = NormalField(lambda r, th: np.sin(th) + 0 * r, lambda r, th: 0 * r,
                    lambda r, th: np.cos(th) + 0 * r)
    out = flow_normal_field(fol, f, t, 7)
    r, th = fol.nodes
    assert np.allclose(out.rho, r + t * np.sin(th), atol=1e-14)
    assert np.allclose(out.rho_theta, t * np.cos(th), atol=1e-14)


def test_radial_flow_matches_ode_oracle():
    fol = radial_foliation(GridChart(ANNULUS, 33))
    f = random_fields(ANNULUS, 1, seed=9, radial_only=True)[0]
    out = flow_normal_field(fol, f, 0.2, 200)
    for i in (5, 16, 27):
        sol = integrate.solve_ivp(lambda s, y: f(y, 0.0), (0, 0.2), [fol.t[i]], method="DOP853",
                                  rtol=1e-13, atol=1e-14)
        assert out.rho[i, 0] == pytest.approx(sol.y[0, -1], abs=1e-10)


def test_flow_group_property():
    fol = radial_foliation(GridChart(ANNULUS, 16, 8, "surface"))
    f = random_fields(ANNULUS, 1, seed=4)[0]
    two = flow_normal_field(flow_normal_field(fol, f, 0.1, 200), f, 0.15, 200)
    one_ = flow_normal_field(fol, f, 0.25, 200)
    assert np.max(np.abs(two.rho - one_.rho)) < 1e-9


def test_flow_degeneracy_reports_leaf():
    fol = radial_foliation(GridChart(TORUS, 32, 8, "surface"))
    sink = NormalField(lambda r, th: -5 * np.sin(2 * np.pi * r) + 0 * th,
                       lambda r, th: -10 * np.pi * np.cos(2 * np.pi * r) + 0 * th,
                       lambda r, th: 0 * r)
    with pytest.raises(FlowDegeneracyError) as info:
        flow_normal_field(fol, sink, 1.0, 400)
    assert info.value.leaf_label is not None


def test_graph_must_be_monotone():
    chart = GridChart(ANNULUS, 33)
    with pytest.raises(FlowDegeneracyError) as info:
        graph_foliation(chart, lambda t, th: 1.5 + (t - 1.5) ** 3,
                        lambda t, th: 3 * (t - 1.5) ** 2 + 0 * th)
    assert info.value.leaf_label == pytest.approx(1.5)


def test_noncompact_field_rejected():
    fol = radial_foliation(GridChart(ANNULUS, 32, 8, "surface"))
    with pytest.raises(DomainError):
        flow_normal_field(fol, NormalField(one, lambda r, th: 0 * r, lambda r, th: 0 * r), 0.1)


def test_random_fields_vanish_on_boundary():
    for f in random_fields(ANNULUS, 5, seed=1):
        f.check_support(radial_foliation(GridChart(ANNULUS, 16, 8, "surface")))
        d_r, _ = f.partials(np.array([1.0, 2.0]), np.array([0.3, 0.3]))
        assert np.max(np.abs(d_r)) < 1e-12


def test_random_fields_reproducible():
    a, b = random_fields(ANNULUS, 2, seed=5), random_fields(ANNULUS, 2, seed=5)
    r = np.linspace(1, 2, 7)
    assert np.array_equal(a[1](r, r), b[1](r, r))


def test_random_field_partials_match_differences():
    f = random_fields(ANNULUS, 1, seed=2)[0]
    r, th = np.linspace(1.1, 1.9, 5), np.linspace(0, 6, 5)
    h = 1e-5
    d_r, d_t = f.partials(r, th)
    assert np.allclose(d_r, (f(r + h, th) - f(r - h, th)) / (2 * h), atol=1e-7)
    assert np.allclose(d_t, (f(r, th + h) - f(r, th - h)) / (2 * h), atol=1e-7)


# -- level functions and normalisation ------------------------------------------------

def test_level_foliation_shares_leaves_with_distance():
    u = radial_u(ANNULUS, lambda r: r ** 2, lambda r: 2 * r, lambda r: 2 + 0 * r)
    fol = u.foliation(GridChart(ANNULUS, 65))
    assert np.allclose(fol.rho[:, 0], np.sqrt(fol.t), atol=1e-12)
    assert np.allclose(fol.rho_t[:, 0], 1 / (2 * np.sqrt(fol.t)), rtol=1e-12)


@pytest.mark.parametrize("profile, p, slope", [
    (WarpProfile.cylinder(0, 1), 2.0, lambda r: 1 / (2 * np.pi) + 0 * r),
    (ANNULUS, 2.0, lambda r: 1 / (2 * np.pi * r)),
    (ANNULUS, 3.0, lambda r: (2 * np.pi * r) ** -2),
])
def test_normalize_distance(profile, p, slope):
    v = normalize_levelset(radial_u(profile, lambda r: r, lambda r: 1 + 0 * r), p)
    r = np.linspace(*profile.base, 9)
    assert np.allclose(v.d_r(r), slope(r), rtol=1e-12)
    q = p / (p - 1)
    assert np.max(np.abs(v.nu(np.linspace(*v.label_range, 11), q) - 1)) < 1e-8


def test_normalize_log_on_annulus():
    v = normalize_levelset(radial_u(ANNULUS, lambda r: r, lambda r: 1 + 0 * r), 2.0)
    r = np.linspace(1, 2, 9)
    assert np.allclose(v(r), np.log(r) / (2 * np.pi), atol=1e-12)


def test_normalized_function_is_a_fixed_point():
    v = normalize_levelset(radial_u(ANNULUS, lambda r: r, lambda r: 1 + 0 * r), 2.0)
    w = normalize_levelset(v, 2.0)
    r = np.linspace(1, 2, 9)
    assert np.allclose(w(r), v(r), atol=1e-10)


def test_normalize_surface_level_function():
    u = LevelSetFunction(TORUS, lambda r, th: r - 0.3 * np.sin(th), lambda r, th: 1 + 0 * r,
                         lambda r, th: -0.3 * np.cos(th) + 0 * r, n_theta=64)
    v = normalize_levelset(u, 2.0)
    assert np.max(np.abs(v.nu(np.linspace(0.1, 0.9, 5), 2.0) - 1)) < 1e-8


def test_normalize_rejects_bad_exponent():
    with pytest.raises(DomainError):
        normalize_levelset(radial_u(ANNULUS, lambda r: r, lambda r: 1 + 0 * r), 1.0)


def test_grid_csv_layout():
    buf = io.StringIO()
    write_grid_csv(buf, np.array([[0.1, 0.2], [1.0 / 3, 4.0]]), header="f0")
    lines = buf.getvalue().split("\n")
    assert lines[0] == "r_index,theta_index,f0"
    assert lines[3] == "1,0,0.33333333333333331"
    assert "\r" not in buf.getvalue()
