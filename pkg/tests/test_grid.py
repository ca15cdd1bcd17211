import math

import numpy as np
import pytest
from scipy.special import lpmv
from hypothesis import given, settings, strategies as st

from hadss_lab import ConfigError, build_grid
from hadss_lab.grid import (legendre_field, neumann_modes, random_neumann_field,
                            real_harmonic)


@pytest.mark.parametrize("k", range(7))
def test_quadrature_of_cos_powers(grid, k):
    # int_{S^2_+} cos^k theta dA = 2 pi / (k + 1)
    value = grid.integrate(grid.cos ** k)
    assert value == pytest.approx(2 * math.pi / (k + 1), rel=1e-7)


def test_quadrature_converges_at_high_order():
    errs = [abs(build_grid(n, 8).integrate(build_grid(n, 8).cos ** 6)
                - 2 * math.pi / 7) for n in (16, 32, 64)]
    rates = [math.log2(errs[i] / errs[i + 1]) for i in range(2)]
    assert min(rates) > 5.5


def test_integral_of_cos(grid):
    assert abs(grid.integrate(grid.cos) - math.pi) < 1e-9


def test_weights_are_positive_and_sum_to_area(grid):
    assert np.all(grid.weights > 0)
    assert grid.weights.sum() == pytest.approx(2 * math.pi, rel=1e-12)


def test_boundary_integral_of_equator(grid):
    assert grid.boundary_integrate(np.ones(grid.nphi)) == pytest.approx(
        2 * math.pi, rel=1e-15)
    assert grid.boundary_integrate(np.cos(grid.phi) ** 2) == pytest.approx(
        math.pi, rel=1e-14)


def test_harmonic_orthogonality(grid):
    modes = neumann_modes(3)
    Y = [real_harmonic(grid, l, m) for l, m in modes]
    G = np.array([[grid.integrate(x * y) for y in Y] for x in Y])
    off = G - np.diag(np.diag(G))
    assert np.max(np.abs(off)) < 1e-9


def test_neumann_modes_are_equator_even():
    for l, m in neumann_modes(4):
        assert (l + m) % 2 == 0
    assert len(neumann_modes(4)) == 15


def test_real_harmonic_rejects_bad_order(grid):
    with pytest.raises(ValueError):
        real_harmonic(grid, 1, 2)


def test_theta_derivatives_second_order():
    errs = []
    for n in (16, 32, 64):
        g = build_grid(n, 2 * n)
        f = legendre_field(g, 2)
        exact = -3 * g.cos * g.sin
        errs.append(np.max(np.abs(g.d_theta(f) - exact)))
    assert errs[0] / errs[1] > 3.5 and errs[1] / errs[2] > 3.5


def test_phi_derivatives_are_spectrally_small(grid):
    f = real_harmonic(grid, 3, 1)
    exact = -lpmv(1, 3, grid.cos) * np.sin(grid.PH)
    assert np.max(np.abs(grid.d_phi(f) - exact)) < 1e-3


def test_random_field_is_reproducible(grid):
    a = random_neumann_field(grid, np.random.default_rng(7))
    b = random_neumann_field(grid, np.random.default_rng(7))
    np.testing.assert_array_equal(a, b)


@settings(max_examples=20, deadline=None)
@given(st.integers(min_value=0, max_value=2 ** 31 - 1))
def test_random_field_without_constant_has_zero_mean(seed):
    g = _GRID
    f = random_neumann_field(g, np.random.default_rng(seed),
                             include_constant=False)
    assert abs(g.integrate(f)) < 1e-7 * (1 + np.max(np.abs(f)))


_GRID = build_grid(64, 128)


@pytest.mark.parametrize("shape", [(4, 16), (16, 4), (16, 33)])
def test_bad_resolution(shape):
    with pytest.raises(ConfigError):
        build_grid(*shape)
