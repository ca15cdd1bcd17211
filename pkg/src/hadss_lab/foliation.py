"""Free boundary CMC foliation of the model near the horizon.

In the warped model the leaves are the coordinate slices ``Sigma_t = {s = t}``
with normal displacement ``mu(t, x) = t`` and lapse ``rho_t = 1``, measured
along the direction of motion ``d/ds``.  The mean curvature evolves by
``d/dt g_t = -H(t) g_t``, i.e. ``d(log u)/dt = -H(t)/2``; integrating it from
``u(0) = a`` must return the warping function, which is the uniqueness
argument behind the rigidity statement.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

import numpy as np

from scipy.integrate import cumulative_simpson
from scipy.interpolate import CubicHermiteSpline

from ._io import text_sink
from .errors import DomainError
from .geometry import GraphSurface, slice_surface, surface_geometry
from .grid import HemisphereGrid, build_grid
from .mass import modified_hawking_mass
from .warp import DEFAULT_S_MAX, WarpProfile, integrate_warp

DEFAULT_EPS = 0.5
DEFAULT_FLOW_STEP = 1e-3
#: Leaves are round hemispheres, so a coarse grid already integrates them to
#: rounding error.
LEAF_GRID = (16, 32)


@dataclass(frozen=True, eq=False)
class FoliationTrace:
    a: float
    t_grid: np.ndarray
    u_t: np.ndarray
    H_t: np.ndarray
    rho_t: np.ndarray = field(repr=False)  # (n_t, ntheta, nphi)
    rho_bar_t: np.ndarray
    mu: np.ndarray = field(repr=False)  # (n_t, ntheta, nphi)
    volume: np.ndarray
    mass_t: np.ndarray
    area_t: np.ndarray
    H_spread: np.ndarray
    u_exp: np.ndarray
    profile: WarpProfile = field(repr=False)
    grid: HemisphereGrid = field(repr=False)

    @property
    def step(self) -> float:
        return float(self.t_grid[1] - self.t_grid[0])

    @property
    def zero_index(self) -> int:
        return len(self.t_grid) // 2

    def leaf(self, t: float) -> GraphSurface:
        return slice_surface(self.profile, self.grid, t)


def _log_u_rhs(profile, t):
    u, du = profile.interpolate(t)
    H = -2.0 * du / u
    return -0.5 * H


def _flow_branch(profile, a, h, n):
    """RK4 for ``d(log u)/dt = -H(t)/2`` from ``t = 0`` in steps of ``h``."""
    out = np.empty(n + 1)
    y = math.log(a)
    out[0] = y
    for k in range(n):
        t = k * h
        k1 = _log_u_rhs(profile, t)
        k2 = _log_u_rhs(profile, t + 0.5 * h)
        k4 = _log_u_rhs(profile, t + h)
        y = y + h * (k1 + 4.0 * k2 + k4) / 6.0
        out[k + 1] = y
    return np.exp(out)


def _cumulative_from_zero(values, h, n):
    fwd = cumulative_simpson(values[n:], dx=h, initial=0.0)
    bwd = cumulative_simpson(values[n::-1], dx=-h, initial=0.0)
    return np.concatenate([bwd[:0:-1], fwd])


def cmc_flow(a: float, eps: float = DEFAULT_EPS,
             step: float = DEFAULT_FLOW_STEP,
             profile: WarpProfile | None = None,
             grid: HemisphereGrid | None = None) -> FoliationTrace:
    """Trace the CMC foliation ``t in [-eps, eps]`` around the horizon.

    Raises
    ------
    DomainError
        If ``eps`` leaves the warp profile or ``step > eps/100``.
    """
    if not (eps > 0 and step > 0):
        raise DomainError("eps and step must be positive")
    if step > eps / 100 * (1 + 1e-12):
        raise DomainError(f"step {step} is larger than eps/100")
    if profile is None:
        profile = integrate_warp(a, max(DEFAULT_S_MAX, eps))
    if eps > profile.s_max:
        raise DomainError(f"eps={eps} exceeds the warp profile range "
                          f"{profile.s_max}")
    grid = grid if grid is not None else build_grid(*LEAF_GRID)
    n = int(round(eps / step))
    h = eps / n
    t = h * np.arange(-n, n + 1)
    t[n] = 0.0

    u_pos = _flow_branch(profile, a, h, n)
    u_neg = _flow_branch(profile, a, -h, n)
    u_t = np.concatenate([u_neg[:0:-1], u_pos])

    H_t, spread, area, mass, rho_bar = (np.empty(t.size) for _ in range(5))
    rho = np.empty((t.size,) + grid.shape)
    for k, tk in enumerate(t):
        geo = surface_geometry(slice_surface(profile, grid, tk))
        A = geo.area
        H_t[k] = geo.integrate(geo.H) / A
        spread[k] = np.ptp(geo.H)
        area[k] = A
        mass[k] = modified_hawking_mass(geo.surface, geometry=geo).mass
        # leaves s = t move with velocity d/ds, so rho = <d/ds, -N>
        rho[k] = -geo.normal_s
        rho_bar[k] = geo.integrate(rho[k]) / A

    mu = np.broadcast_to(t[:, None, None], rho.shape).copy()
    vol = _cumulative_from_zero(area * rho_bar, h, n)
    int_H = _cumulative_from_zero(H_t, h, n)
    u_exp = a * np.exp(-0.5 * int_H)
    return FoliationTrace(a=float(a), t_grid=t, u_t=u_t, H_t=H_t, rho_t=rho,
                          rho_bar_t=rho_bar, mu=mu, volume=vol, mass_t=mass,
                          area_t=area, H_spread=spread, u_exp=u_exp,
                          profile=profile, grid=grid)


@dataclass(frozen=True)
class SignReport:
    negative_side: bool
    at_zero: bool
    positive_side: bool
    h_at_zero: float

    @property
    def passed(self) -> bool:
        return self.negative_side and self.at_zero and self.positive_side


def mean_curvature_sign_check(trace: FoliationTrace,
                              zero_tol: float = 1e-10) -> SignReport:
    """``H > 0`` before the horizon, ``H = 0`` on it and ``H < 0`` after."""
    n = trace.zero_index
    H = trace.H_t
    return SignReport(negative_side=bool(np.all(H[:n] > 0)),
                      at_zero=bool(abs(H[n]) <= zero_tol),
                      positive_side=bool(np.all(H[n + 1:] < 0)),
                      h_at_zero=float(H[n]))


def h_prime_at_zero(trace: FoliationTrace) -> float:
    """Five-point central difference of ``H(t)`` at ``t = 0``."""
    n, h, H = trace.zero_index, trace.step, trace.H_t
    return float((H[n - 2] - 8 * H[n - 1] + 8 * H[n + 1] - H[n + 2]) / (12 * h))


def swept_volume(trace: FoliationTrace, t: float) -> float:
    """Signed volume between ``Sigma_0`` and ``Sigma_t``."""
    eps = trace.t_grid[-1]
    if abs(t) > eps * (1 + 1e-12):
        raise DomainError(f"|t| = {abs(t)} exceeds eps = {eps}")
    spline = CubicHermiteSpline(trace.t_grid, trace.volume,
                                trace.area_t * trace.rho_bar_t)
    return float(spline(t))


@dataclass(frozen=True)
class NormalisationReport:
    """Deviation of the displacement ``mu`` from its normalisation."""

    mu_at_zero: float
    dmu_dt_at_zero: float
    mean_offset: float

    def max_error(self) -> float:
        return max(self.mu_at_zero, self.dmu_dt_at_zero, self.mean_offset)


def normalisation_check(trace: FoliationTrace) -> NormalisationReport:
    """``mu(0, x) = 0``, ``d mu/dt(0, x) = 1`` and ``int (mu - t) dv = 0``."""
    n, h = trace.zero_index, trace.step
    mu = trace.mu
    dmu = (mu[n - 2] - 8 * mu[n - 1] + 8 * mu[n + 1] - mu[n + 2]) / (12 * h)
    offsets = []
    base = surface_geometry(trace.leaf(0.0))
    for k, t in enumerate(trace.t_grid):
        offsets.append(abs(base.integrate(mu[k] - t)))
    return NormalisationReport(mu_at_zero=float(np.max(np.abs(mu[n]))),
                               dmu_dt_at_zero=float(np.max(np.abs(dmu - 1.0))),
                               mean_offset=float(max(offsets)))


@dataclass(frozen=True)
class LapseIdentityResidual:
    """Both sides of the lapse identity on a leaf, the ``theta`` term excluded.

    ``residual = lhs - rhs_without_theta`` equals the term ``H'(t) theta``.
    """

    lhs: float
    rhs_without_theta: float
    residual: float
    lapse_gradient: float
    laplacian_integral: float
    rho_bar: float


def lapse_identity_check(trace: FoliationTrace, t: float, rho=None,
                         grid: HemisphereGrid | None = None,
                         rho_neumann: bool = True) -> LapseIdentityResidual:
    """Evaluate the lapse identity on the leaf ``Sigma_t``.

    ``rho`` defaults to the lapse of the model foliation; a synthetic lapse can
    be supplied to see the gradient term switch on.
    """
    grid = grid if grid is not None else trace.grid
    geo = surface_geometry(slice_surface(trace.profile, grid, t))
    amb = geo.model_ambient()
    if rho is None:
        rho = np.ones(grid.shape)
    rho = np.broadcast_to(np.asarray(rho, dtype=float), grid.shape)
    eq = 1 if rho_neumann else None
    P = np.asarray(amb.ric_NN) + geo.normsq_h
    A = geo.area
    rho_bar = geo.integrate(rho) / A
    lhs = geo.integrate(P * rho)
    grad = rho_bar * geo.integrate(geo.gradient_sq(rho, eq=eq) / rho ** 2)
    lap = geo.integrate(geo.laplacian(rho, eq=eq))
    bdy = grid.boundary_integrate(
        np.broadcast_to(np.asarray(amb.h_bdy_NN, dtype=float), (grid.nphi,))
        * np.sqrt(geo.G[-1]))
    rhs = rho_bar * geo.integrate(P) + grad - lap + rho_bar * bdy
    return LapseIdentityResidual(lhs=lhs, rhs_without_theta=rhs,
                                 residual=lhs - rhs, lapse_gradient=grad,
                                 laplacian_integral=lap, rho_bar=rho_bar)


#: Alias kept for the documented interface.
lemma41_model_check = lapse_identity_check


FOLIATION_CSV_HEADER = ("t", "u", "H", "rho_bar", "area", "mass", "volume")


def write_foliation_csv(trace: FoliationTrace, path) -> None:
    cols = [trace.t_grid, trace.u_t, trace.H_t, trace.rho_bar_t, trace.area_t,
            trace.mass_t, trace.volume]
    with text_sink(path) as fh:
        writer = csv.writer(fh)
        writer.writerow(FOLIATION_CSV_HEADER)
        for row in zip(*cols):
            writer.writerow([repr(float(x)) for x in row])
