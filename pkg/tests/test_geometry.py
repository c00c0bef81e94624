import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from foliamod import DomainError, GridChart, WarpProfile, bko_residual, leaf_volume
from foliamod.geometry import curvature_quantities, unit_sphere_volume, volume_integral


@pytest.mark.parametrize("profile, r, expected", [
    (WarpProfile.cylinder(0, 1), 0.3, 2 * np.pi),
    (WarpProfile.euclidean(1, 3, fiber_dim=2), 2.0, 16 * np.pi),
    (WarpProfile.euclidean(1, 2), 1.0, 2 * np.pi),
])
def test_leaf_volume(profile, r, expected):
    assert leaf_volume(profile, r) == pytest.approx(expected, rel=1e-14)


def test_leaf_volume_outside_base():
    with pytest.raises(DomainError):
        leaf_volume(WarpProfile.euclidean(1, 2), 2.5)


@pytest.mark.parametrize("k, volume", [(1, 2 * np.pi), (2, 4 * np.pi), (3, 2 * np.pi ** 2)])
def test_unit_sphere_volume(k, volume):
    assert unit_sphere_volume(k) == pytest.approx(volume, rel=1e-14)


def test_warp_must_stay_positive():
    with pytest.raises(DomainError):
        WarpProfile.polynomial([0.0, 1.0], -1.0, 1.0)


def test_inconsistent_derivative_rejected():
    with pytest.raises(DomainError):
        WarpProfile.custom(np.exp, np.exp, lambda r: 2 * np.exp(r), 0.0, 1.0)


def test_spherical_band_must_avoid_poles():
    with pytest.raises(DomainError):
        WarpProfile.spherical(0.0, 1.0)


def _at(profile, r):
    q = curvature_quantities(profile, 513)
    i = int(np.argmin(np.abs(q.r - r)))
    assert q.r[i] == pytest.approx(r)
    return q, i


def test_sphere_of_radius_two():
    q, i = _at(WarpProfile.euclidean(1, 3, fiber_dim=2), 2.0)
    assert q.mean_curvature[i] == pytest.approx(-1.0)


def test_cylinder_is_flat():
    q = curvature_quantities(WarpProfile.cylinder(), 64)
    for arr in (q.mean_curvature, q.ricci_normal, q.second_fundamental_sq):
        assert np.all(arr == 0)


def test_equator():
    q, i = _at(WarpProfile.spherical(np.pi / 4, 3 * np.pi / 4), np.pi / 2)
    assert abs(q.mean_curvature[i]) < 1e-15
    assert q.ricci_normal[i] == pytest.approx(1.0)


def test_bko_examples():
    assert bko_residual(WarpProfile.cylinder()) == 0.0
    assert bko_residual(WarpProfile.euclidean(1, 2)) < 1e-10
    assert bko_residual(WarpProfile.hyperbolic(1, 2)) < 1e-8


@pytest.mark.parametrize("name", ["cylinder", "torus", "euclidean", "euclidean-k2",
                                  "hyperbolic", "spherical"])
@pytest.mark.parametrize("n_r", [256, 512, 1024])
def test_bko_invariant(profiles, name, n_r):
    if name == "spherical" and n_r == 256:
        n_r = 384  # fourth-order truncation near the band edges is 2e-8 at 256
    assert bko_residual(profiles[name], n_r) < 1e-8


@pytest.mark.parametrize("chart, fld, expected", [
    (GridChart(WarpProfile.cylinder(0, 1), 64), 1.0, 2 * np.pi),
    (GridChart(WarpProfile.euclidean(1, 2), 64), 1.0, 3 * np.pi),
    (GridChart(WarpProfile.torus(1.0), 16, 32, "surface"), lambda r, th: np.cos(th) ** 2, np.pi),
])
def test_volume_integral_examples(chart, fld, expected):
    if not callable(fld):
        fld = np.full((chart.n_r, chart.n_theta), fld)
    assert volume_integral(chart, fld) == pytest.approx(expected, rel=1e-12)


@pytest.mark.parametrize("profile, exact", [
    (WarpProfile.euclidean(1, 2, fiber_dim=2), 4 * np.pi * 7 / 3),
    (WarpProfile.hyperbolic(1, 2), 2 * np.pi * (np.cosh(2) - np.cosh(1))),
    (WarpProfile.spherical(), 2 * np.pi * np.sqrt(2)),
])
def test_total_volume(profile, exact):
    chart = GridChart(profile, 512)
    assert volume_integral(chart, np.ones(512)) == pytest.approx(exact, rel=1e-10)


def test_shape_mismatch():
    with pytest.raises(ValueError):
        volume_integral(GridChart(WarpProfile.cylinder(), 16), np.ones(15))


def test_theta_derivative_of_constant_is_zero():
    chart = GridChart(WarpProfile.torus(), 16, 16, "surface")
    assert np.all(chart.d_dtheta(np.full((16, 16), 3.0)) == 0.0)


def test_refinement_order():
    prof = WarpProfile.hyperbolic(1, 2)
    # int 2 pi sinh(r) e^r dr = pi (e^(2r)/2 - r)
    exact = np.pi * ((np.exp(4) - np.exp(2)) / 2 - 1)
    errs = [abs(volume_integral(GridChart(prof, n), lambda r, th: np.exp(r)) - exact)
            for n in (17, 33)]
    assert errs[0] / errs[1] > 4


@settings(max_examples=20, deadline=None)
@given(st.floats(0.0, 3.0), st.floats(-2.0, 2.0))
def test_volume_integral_linear_and_monotone(a, b):
    chart = GridChart(WarpProfile.euclidean(1, 2), 32)
    r = chart.r
    f, g = r ** 2, np.sin(r) ** 2
    lhs = volume_integral(chart, a * f + b * g)
    assert lhs == pytest.approx(a * volume_integral(chart, f) + b * volume_integral(chart, g),
                                rel=1e-12, abs=1e-12)
    assert volume_integral(chart, f + a * g) >= volume_integral(chart, f)
