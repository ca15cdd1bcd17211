import json
import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from hadss_lab import (AmbientCurvature, ContractError, DomainError,
                       GraphSurface, mass_derivative_terms, mass_from_radius,
                       minimal_disk_mass, modified_hawking_mass, slice_surface,
                       surface_geometry)
from hadss_lab.grid import legendre_field
from hadss_lab.mass import mass_from_parts, mass_report, write_mass_json


def _closed_form_slice_mass(prof, s):
    # A = 2 pi u^2, H = -2u'/u, inf R = -6
    u, du = (float(x) for x in prof.interpolate(s))
    A = 2 * math.pi * u * u
    integral = A * (4 * du * du / (u * u) - 4)
    return math.sqrt(A / (8 * math.pi)) * (1 - integral / (8 * math.pi))


@pytest.mark.parametrize("a", [1.0, 1.5, 2.0])
@pytest.mark.parametrize("s0", [0.0, 0.4, -0.7, 1.5])
def test_slice_mass_is_constant(profiles, grid, a, s0):
    prof = profiles[a]
    rep = modified_hawking_mass(slice_surface(prof, grid, s0))
    assert rep.mass == pytest.approx(mass_from_radius(a), rel=1e-10)
    assert rep.mass == pytest.approx(_closed_form_slice_mass(prof, s0),
                                     rel=1e-12)
    assert rep.chi == 1 and rep.inf_R == -6.0


@pytest.mark.parametrize("area, mass", [(2 * math.pi, 1.0),
                                        (8 * math.pi, 5.0)])
def test_minimal_disk_mass_values(area, mass):
    assert minimal_disk_mass(area) == pytest.approx(mass, rel=1e-15)


@given(st.floats(min_value=1e-3, max_value=30.0))
def test_minimal_disk_mass_at_horizon_area(a):
    assert minimal_disk_mass(2 * math.pi * a * a) == pytest.approx(
        mass_from_radius(a), rel=1e-12)


@given(st.floats(1e-6, 1e4), st.floats(1e-6, 1e4))
def test_minimal_disk_mass_is_increasing(x, y):
    lo, hi = sorted((x, y))
    assert minimal_disk_mass(lo) <= minimal_disk_mass(hi)


@pytest.mark.parametrize("area", [0.0, -1.0, float("nan")])
def test_minimal_disk_mass_domain(area):
    with pytest.raises(DomainError):
        minimal_disk_mass(area)


def test_mass_from_parts():
    A = 8 * math.pi
    assert mass_from_parts(A, 0.0) == pytest.approx(1.0)
    assert mass_from_parts(A, 8 * math.pi, chi=1) == pytest.approx(0.0)
    assert mass_from_parts(A, -16 * math.pi) == pytest.approx(3.0)


def test_derivative_terms_vanish_on_model_leaves(profiles, grid):
    for t in (-0.3, 0.0, 0.25):
        geo = surface_geometry(slice_surface(profiles[1.0], grid, t))
        terms = mass_derivative_terms(geo, np.ones(grid.shape))
        for value in terms.evaluable().values():
            assert abs(value) < 1e-12
        assert terms.theta_term is None
        assert terms.rho_bar == pytest.approx(1.0, rel=1e-14)


def test_gradient_term_against_analytic_gradient(profiles, grid):
    s0, eps = 0.3, 0.1
    geo = surface_geometry(slice_surface(profiles[1.0], grid, s0))
    p2 = legendre_field(grid, 2)
    rho = 1 + eps * p2
    terms = mass_derivative_terms(geo, rho)
    u = float(profiles[1.0].interpolate(s0)[0])
    grad_sq = (3 * eps * grid.cos * grid.sin) ** 2 / u ** 2
    expected = np.sum(grid.weights * u * u * grad_sq / rho ** 2)
    assert terms.gradient_integral == pytest.approx(expected, rel=1e-4)
    A = geo.area
    c = math.sqrt(A) / (8 * math.pi) ** 1.5
    assert terms.lapse_gradient == pytest.approx(
        -2 * c * terms.H * terms.rho_bar * terms.gradient_integral, rel=1e-14)


@pytest.mark.parametrize("t", [-0.3, 0.3])
def test_signs_follow_mean_curvature(profiles, grid, t):
    # H > 0 inside the horizon and H < 0 outside; every term with a
    # non-negative integrand contributes with the sign of -H
    geo = surface_geometry(slice_surface(profiles[1.0], grid, t))
    amb = AmbientCurvature(R=-6.0 + 0.2 * (1 + grid.cos), ric_NN=0.0,
                           H_bdy=0.05 * np.ones(grid.nphi))
    rho = 1 + 0.1 * legendre_field(grid, 2)
    terms = mass_derivative_terms(geo, rho, ambient=amb, h_prime=-4.0,
                                  theta=0.5)
    assert np.sign(terms.H) == -np.sign(t)
    for raw in (terms.scalar_integral, terms.gradient_integral,
                terms.boundary_integral):
        assert raw > 0
    assert terms.trace_integral >= -1e-12
    for value in (terms.scalar_deficit, terms.lapse_gradient,
                  terms.boundary_term):
        assert np.sign(value) == np.sign(t)
    c = math.sqrt(geo.area) / (8 * math.pi) ** 1.5
    assert terms.theta_term == pytest.approx(-2 * c * terms.H * -4.0 * 0.5)
    assert terms.predicted == pytest.approx(sum(terms.evaluable().values()))


@pytest.mark.parametrize("rho", [None, 0.0, -1.0, float("nan")])
def test_lapse_contract(profiles, grid, rho):
    geo = surface_geometry(slice_surface(profiles[1.0], grid, 0.0))
    with pytest.raises(ContractError):
        mass_derivative_terms(geo, rho)


def test_perturbed_disk_has_lower_mass_than_parameter(profiles, grid):
    # a small non-CMC perturbation of a slice changes the mass at second order
    w = 0.02 * legendre_field(grid, 2)
    base = modified_hawking_mass(slice_surface(profiles[1.0], grid, 0.0)).mass
    bent = modified_hawking_mass(GraphSurface(profiles[1.0], grid, 0.0, w)).mass
    assert abs(bent - base) < 1e-2
    assert bent != pytest.approx(base, abs=1e-8)


def test_mass_report_and_json(profiles, grid, tmp_path):
    rep = mass_report(slice_surface(profiles[2.0], grid, 0.3))
    assert set(rep) == {"a", "s0", "area", "mass", "expected_mass",
                        "abs_error"}
    assert rep["abs_error"] < 1e-9 and rep["expected_mass"] == 5.0
    path = tmp_path / "m.json"
    write_mass_json(rep, path)
    assert json.loads(path.read_text()) == rep
