import math

import numpy as np
import pytest
import scipy.sparse as sp
from hypothesis import given, settings, strategies as st
from scipy.sparse.linalg import eigsh

from conftest import ROBIN_ORACLE
from hadss_lab import (AmbientCurvature, DomainError, GraphSurface, SolverError,
                       area_estimate_check, assemble, build_grid,
                       first_eigenpair, index_form, integrate_warp,
                       slice_surface, spectrum, spectrum_pairs)
from hadss_lab.grid import legendre_field, random_neumann_field
from hadss_lab.jacobi import eigen_report, rayleigh_quotient, write_eigen_json

# P = 0 on the unit horizon reduces -L to the Neumann Laplacian
FLAT = AmbientCurvature(R=-6.0, ric_NN=0.0)


@pytest.fixture(scope="module")
def horizon_assemblies(profiles, grid):
    return {a: assemble(slice_surface(profiles[a], grid, 0.0))
            for a in (1.0, 2.0)}


@pytest.fixture(scope="module")
def tilted(profiles, grid):
    w = 0.05 * legendre_field(grid, 2) + 0.02 * random_neumann_field(
        grid, np.random.default_rng(5), include_constant=False)
    return assemble(GraphSurface(profiles[1.0], grid, 0.2, w))


def test_hemisphere_neumann_spectrum(profiles, grid):
    asm = assemble(slice_surface(profiles[1.0], grid, 0.0), ambient=FLAT)
    lam = spectrum(asm, 6)
    np.testing.assert_allclose(lam, [0, 2, 2, 6, 6, 6], atol=5e-3)
    assert abs(lam[0]) < 1e-10


@pytest.mark.parametrize("a", [1.0, 2.0])
def test_horizon_first_eigenvalue_and_area_identity(horizon_assemblies, a):
    asm = horizon_assemblies[a]
    lam, phi = first_eigenpair(asm)
    assert lam == pytest.approx(3 + 1 / a ** 2, abs=1e-10)
    assert area_estimate_check(lam) == pytest.approx(2 * math.pi * a * a,
                                                     rel=1e-9)
    assert area_estimate_check(lam) == pytest.approx(asm.geometry.area,
                                                     rel=1e-9)
    # constant, positive, unit L^2 norm
    assert np.ptp(phi) < 1e-9 and phi.min() > 0
    assert np.sum(asm.mass_matrix * phi ** 2) == pytest.approx(1.0, rel=1e-12)


@pytest.mark.parametrize("a", [1.0, 2.0])
def test_horizon_second_eigenvalue(horizon_assemblies, a):
    lam = spectrum(horizon_assemblies[a], 2)
    assert lam[1] == pytest.approx(3 + 3 / a ** 2, abs=2e-3)


def test_index_form_of_constant(horizon_assemblies):
    asm = horizon_assemblies[1.0]
    one = np.ones(asm.shape)
    # Q(1, 1) = -int P = lambda_1 * area = 4 * 2 pi
    assert index_form(asm, one, one) == pytest.approx(8 * math.pi, rel=1e-12)


def test_eigenfunctions_are_orthonormal(tilted):
    res = spectrum_pairs(tilted, 6)
    F = res.eigenfunctions.reshape(6, -1)
    G = (F * tilted.mass_matrix.ravel()) @ F.T
    np.testing.assert_allclose(G, np.eye(6), atol=1e-9)
    off = [index_form(tilted, res.eigenfunctions[0], res.eigenfunctions[j])
           for j in range(1, 6)]
    assert np.max(np.abs(off)) < 1e-8
    assert np.all(res.eigenfunctions[0] > 0)
    assert np.all(np.diff(res.eigenvalues) >= -1e-12)


def test_matches_scipy_eigsh_on_tilted_surface(tilted):
    ours = spectrum(tilted, 6)
    K = tilted.operator()
    M = sp.diags(tilted.mass_matrix.ravel())
    ref = np.sort(eigsh(K, k=6, M=M, sigma=ours[0] - 1.0, which="LM",
                        return_eigenvectors=False))
    np.testing.assert_allclose(ours, ref, rtol=1e-9, atol=1e-9)


def test_stiffness_symmetric_with_constant_kernel(tilted):
    S = tilted.stiffness
    assert abs(S - S.T).max() < 1e-12 * abs(S).max()
    assert np.max(np.abs(S @ np.ones(tilted.size))) < 1e-10
    assert np.sum(tilted.mass_matrix) == pytest.approx(tilted.geometry.area,
                                                       rel=1e-14)


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 10 ** 6))
def test_stiffness_is_positive_semidefinite(seed):
    x = np.random.default_rng(seed).standard_normal(_TILTED_SMALL.size)
    assert x @ (_TILTED_SMALL.stiffness @ x) >= -1e-10 * (x @ x)


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 10 ** 6), st.integers(1, 4))
def test_rayleigh_quotient_bounded_by_first_eigenvalue(seed, degree):
    g = _TILTED_SMALL.geometry.grid
    psi = 1.0 + random_neumann_field(g, np.random.default_rng(seed), degree)
    assert rayleigh_quotient(_TILTED_SMALL, psi) >= _LAMBDA_SMALL - 1e-9


def _small_tilted():
    g = build_grid(16, 32)
    w = 0.05 * legendre_field(g, 2)
    asm = assemble(GraphSurface(integrate_warp(1.5), g, -0.3, w))
    return asm, first_eigenpair(asm)[0]


_TILTED_SMALL, _LAMBDA_SMALL = _small_tilted()


@pytest.mark.parametrize("beta", sorted(ROBIN_ORACLE))
def test_robin_hemisphere_against_legendre_root(profiles, beta):
    errs = []
    for n in (32, 64):
        g = build_grid(n, 2 * n)
        asm = assemble(slice_surface(profiles[1.0], g, 0.0), ambient=FLAT,
                       robin=beta)
        errs.append(abs(first_eigenpair(asm)[0] - ROBIN_ORACLE[beta]))
    assert errs[1] < 1e-4
    assert errs[0] / errs[1] > 3


def test_solver_reports_residual_when_not_converged(tilted):
    with pytest.raises(SolverError) as info:
        spectrum_pairs(tilted, 6, tol=1e-14, max_iter=1)
    assert info.value.residual is not None and info.value.residual > 0


def test_mode_count_validated(horizon_assemblies):
    with pytest.raises(DomainError):
        spectrum_pairs(horizon_assemblies[1.0], 0)


@pytest.mark.parametrize("lam, area", [(4.0, 2 * math.pi),
                                       (3.25, 8 * math.pi),
                                       (5.0, math.pi)])
def test_area_estimate_values(lam, area):
    assert area_estimate_check(lam) == pytest.approx(area, rel=1e-15)


@pytest.mark.parametrize("lam", [3.0, 2.5, -1.0, float("nan")])
def test_area_estimate_domain(lam):
    with pytest.raises(DomainError):
        area_estimate_check(lam)


def test_eigen_report(tmp_path, profiles):
    g = build_grid(16, 32)
    rep = eigen_report(slice_surface(profiles[2.0], g, 0.0), modes=3)
    assert set(rep) == {"a", "s0", "ntheta", "nphi", "eigenvalues", "lambda1",
                        "area_predicted", "area_measured", "rel_error"}
    assert rep["rel_error"] < 1e-9 and len(rep["eigenvalues"]) == 3
    path = tmp_path / "e.json"
    write_eigen_json(rep, path)
    assert '"lambda1"' in path.read_text()


def test_eigen_report_without_area_prediction(profiles):
    # far outside the horizon lambda_1 drops below 3
    g = build_grid(16, 32)
    rep = eigen_report(slice_surface(profiles[1.0], g, 1.5), modes=1)
    assert rep["lambda1"] <= 3 and rep["area_predicted"] is None
