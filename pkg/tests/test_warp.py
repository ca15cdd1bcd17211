import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from conftest import ROOT_ORACLE, WARP_ORACLE
from hadss_lab import (DomainError, WarpParams, horizon_radius, integrate_warp,
                       mass_from_radius, ricci_normal, scalar_curvature,
                       slice_data)
from hadss_lab.warp import PROFILE_CSV_HEADER, ricci_tangential, write_profile_csv


@pytest.mark.parametrize("m, a", sorted(ROOT_ORACLE.items()))
def test_horizon_radius_matches_high_precision_root(m, a):
    assert horizon_radius(m) == pytest.approx(a, rel=1e-14)


def test_horizon_radius_simple_values():
    assert horizon_radius(1.0) == pytest.approx(1.0, abs=1e-15)
    assert horizon_radius(5.0) == pytest.approx(2.0, abs=1e-14)


@pytest.mark.parametrize("m", [0.0, -1.0, float("nan"), float("inf")])
def test_horizon_radius_rejects_bad_mass(m):
    with pytest.raises(DomainError):
        horizon_radius(m)


@given(st.floats(min_value=1e-6, max_value=1e6))
def test_root_is_a_zero_of_f(m):
    a = horizon_radius(m)
    assert a > 0
    # relative residual of r^3 + r - 2m
    assert abs(a ** 3 + a - 2 * m) <= 1e-12 * max(2 * m, a)


@given(st.floats(min_value=1e-3, max_value=50.0))
def test_round_trip_radius_mass(a):
    assert horizon_radius(mass_from_radius(a)) == pytest.approx(a, rel=1e-12)


def test_params_constructors_agree():
    p = WarpParams.from_mass(1.5)
    q = WarpParams.from_radius(p.a)
    assert q.m == pytest.approx(1.5, rel=1e-15)
    assert p.f(p.a) == pytest.approx(0.0, abs=1e-14)


@pytest.mark.parametrize("a", [1.0, 2.0])
def test_profile_matches_taylor_oracle(profiles, a):
    prof = profiles[a]
    for (aa, s), (u_ref, du_ref) in WARP_ORACLE.items():
        if aa != a:
            continue
        for sign in (1, -1):
            u, du = prof.interpolate(sign * s)
            assert float(u) == pytest.approx(u_ref, rel=1e-11)
            assert float(du) == pytest.approx(sign * du_ref, rel=1e-10)


@pytest.mark.parametrize("a", [1.0, 1.5, 2.0])
def test_profile_even_and_starts_at_horizon(profiles, a):
    prof = profiles[a]
    np.testing.assert_allclose(prof.u, prof.u[::-1], rtol=0, atol=1e-13)
    np.testing.assert_allclose(prof.du, -prof.du[::-1], rtol=0, atol=1e-13)
    mid = len(prof.s_grid) // 2
    assert prof.s_grid[mid] == 0.0
    assert prof.u[mid] == a and prof.du[mid] == 0.0


@pytest.mark.parametrize("a", [1.0, 1.5, 2.0])
def test_first_integral_and_scalar_curvature(profiles, a):
    prof = profiles[a]
    assert np.max(np.abs(prof.first_integral_residual())) < 1e-10
    s = np.linspace(-2, 2, 401)
    np.testing.assert_allclose(scalar_curvature(prof, s), -6.0, rtol=0,
                               atol=1e-8)


def test_ricci_decomposition_traces_to_scalar(profiles):
    prof = profiles[1.5]
    s = np.linspace(-1.9, 1.9, 77)
    R = ricci_normal(prof, s) + 2 * ricci_tangential(prof, s)
    np.testing.assert_allclose(R, scalar_curvature(prof, s), atol=1e-12)


@pytest.mark.parametrize("a, expected", [(1.0, -4.0), (2.0, -3.25)])
def test_ricci_normal_at_horizon(profiles, a, expected):
    # -2u''/u = -2 (1 + m/a^3) with 2m = a + a^3
    assert float(ricci_normal(profiles[a], 0.0)) == pytest.approx(expected,
                                                                  abs=1e-13)


def test_rk4_converges_at_fourth_order():
    ref = WARP_ORACLE[(1.0, 1.7)][0]
    errs = []
    for h in (4e-2, 2e-2, 1e-2):
        prof = integrate_warp(1.0, 1.7, h)
        errs.append(abs(float(prof.interpolate(1.7)[0]) - ref))
    rates = [math.log2(errs[i] / errs[i + 1]) for i in range(2)]
    assert min(rates) > 3.7


def test_interpolation_outside_range_raises(profiles):
    with pytest.raises(DomainError):
        profiles[1.0].interpolate(2.5)
    with pytest.raises(DomainError):
        profiles[1.0].interpolate(float("nan"))


def test_integrate_warp_rejects_bad_step():
    with pytest.raises(DomainError):
        integrate_warp(1.0, 1.0, 0.0)


def test_slice_data_closed_form(profiles):
    prof = profiles[2.0]
    h0 = slice_data(prof, 0.0)
    assert h0.H == 0.0 and h0.area == pytest.approx(8 * math.pi, rel=1e-15)
    sd = slice_data(prof, 0.5)
    u_ref, du_ref = WARP_ORACLE[(2.0, 0.5)]
    # normal points towards the horizon, so slices outside it have H < 0
    assert sd.H == pytest.approx(-2 * du_ref / u_ref, rel=1e-10)
    assert sd.normsq_h == pytest.approx(sd.H ** 2 / 2, rel=1e-14)
    assert sd.K == pytest.approx(u_ref ** -2, rel=1e-10)


def test_profile_csv(tmp_path, profiles):
    path = tmp_path / "p.csv"
    prof = integrate_warp(1.0, 0.1, 1e-2)
    write_profile_csv(prof, path)
    lines = path.read_text().splitlines()
    assert lines[0].split(",") == list(PROFILE_CSV_HEADER)
    assert len(lines) == 1 + len(prof.s_grid)
    row = [float(x) for x in lines[1 + len(prof.s_grid) // 2].split(",")]
    assert row[0] == 0.0 and row[1] == 1.0 and row[4] == pytest.approx(-6.0)
