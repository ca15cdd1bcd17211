"""Warping function of the half anti-de Sitter--Schwarzschild model.

The model metric is ``ds^2 + u(s)^2 g_{S^2_+}`` on ``R x S^2_+`` where the
warping function solves ``u'' = u + m/u^2`` with ``u(0) = a``, ``u'(0) = 0``
and ``2m = a + a^3``.  Along the solution the first integral
``u'^2 = 1 + u^2 - 2m/u`` is conserved, which doubles as an error monitor for
the integrator.

Orientation: slices ``{s = const}`` carry the unit normal ``N = -d/ds``
(:data:`NORMAL_SIGN`), so the mean curvature ``H = -2u'/u`` is positive for
``s < 0`` and negative for ``s > 0``.
"""

from __future__ import annotations

import csv
import logging
import math
from dataclasses import dataclass
from typing import Iterable

import numpy as np

from ._io import text_sink
from .errors import DomainError, IntegrationError

log = logging.getLogger(__name__)

#: Sign of ``<N, d/ds>`` for the unit normal used throughout the package.
NORMAL_SIGN = -1.0

#: Lower end of the bisection bracket for the horizon radius.
ROOT_BRACKET_LOW = 1e-8

DEFAULT_STEP = 1e-4
DEFAULT_S_MAX = 2.0


@dataclass(frozen=True)
class WarpParams:
    """Mass parameter ``m`` and horizon radius ``a`` (root of ``f``)."""

    m: float
    a: float

    @classmethod
    def from_radius(cls, a: float) -> "WarpParams":
        return cls(m=mass_from_radius(a), a=float(a))

    @classmethod
    def from_mass(cls, m: float) -> "WarpParams":
        return cls(m=float(m), a=horizon_radius(m))

    def f(self, r):
        """``f(r) = 1 + r^2 - 2m/r``."""
        return 1.0 + r * r - 2.0 * self.m / r


def _f(r: float, m: float) -> float:
    return 1.0 + r * r - 2.0 * m / r


def horizon_radius(m: float, newton_steps: int = 3) -> float:
    """Unique positive root of ``f(r) = 1 + r^2 - 2m/r``.

    ``f`` is strictly increasing on ``(0, inf)`` (``f' = 2r + 2m/r^2``), so
    plain bisection on ``[1e-8, max(1, 2m)]`` cannot fail; a few Newton steps
    polish the last bits.

    Raises
    ------
    DomainError
        If ``m <= 0``.
    """
    if not (m > 0 and math.isfinite(m)):
        raise DomainError(f"mass parameter must be positive, got {m!r}")
    lo, hi = ROOT_BRACKET_LOW, max(1.0, 2.0 * m)
    flo = _f(lo, m)
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        fm = _f(mid, m)
        if fm == 0.0:
            lo = hi = mid
            break
        if (fm < 0) == (flo < 0):
            lo, flo = mid, fm
        else:
            hi = mid
        if hi - lo <= 4e-16 * hi:
            break
    r = 0.5 * (lo + hi)
    for _ in range(newton_steps):
        # Same root through the cubic r^3 + r - 2m: better conditioned residual.
        g = r * r * r + r - 2.0 * m
        dg = 3.0 * r * r + 1.0
        r_new = r - g / dg
        if not (lo - 1e-12 <= r_new <= hi + 1e-12):
            break
        r = r_new
    return r


def mass_from_radius(a: float) -> float:
    """``m = (a + a^3)/2``, the inverse of :func:`horizon_radius`."""
    if not (a > 0 and math.isfinite(a)):
        raise DomainError(f"horizon radius must be positive, got {a!r}")
    return 0.5 * (a + a ** 3)


def _rk4_branch(a: float, m: float, h: float, nsteps: int):
    """Classical RK4 for ``(u, v)' = (v, u + m/u^2)`` from ``(a, 0)``."""
    u = np.empty(nsteps + 1)
    v = np.empty(nsteps + 1)
    uk, vk = a, 0.0
    u[0], v[0] = uk, vk
    half = 0.5 * h
    sixth = h / 6.0
    for k in range(1, nsteps + 1):
        k1u, k1v = vk, uk + m / (uk * uk)
        x = uk + half * k1u
        k2u, k2v = vk + half * k1v, x + m / (x * x)
        x = uk + half * k2u
        k3u, k3v = vk + half * k2v, x + m / (x * x)
        x = uk + h * k3u
        k4u, k4v = vk + h * k3v, x + m / (x * x)
        uk = uk + sixth * (k1u + 2.0 * k2u + 2.0 * k3u + k4u)
        vk = vk + sixth * (k1v + 2.0 * k2v + 2.0 * k3v + k4v)
        if not uk > 0.0:
            raise IntegrationError(
                f"warping function became non-positive (u={uk}) at step {k}")
        u[k], v[k] = uk, vk
    return u, v


@dataclass(frozen=True)
class WarpProfile:
    """Sampled warping function on a uniform grid of ``[-s_max, s_max]``."""

    params: WarpParams
    s_grid: np.ndarray
    u: np.ndarray
    du: np.ndarray
    ddu: np.ndarray
    step: float

    @property
    def s_max(self) -> float:
        return float(self.s_grid[-1])

    def first_integral_residual(self) -> np.ndarray:
        """``u'^2 - (1 + u^2 - 2m/u)`` at every sample."""
        m = self.params.m
        return self.du ** 2 - (1.0 + self.u ** 2 - 2.0 * m / self.u)

    def _check_range(self, s):
        s = np.asarray(s, dtype=float)
        tol = 1e-12 * max(1.0, self.s_max)
        if np.any(~np.isfinite(s)) or np.any(np.abs(s) > self.s_max + tol):
            raise DomainError(
                f"s outside the profile range [-{self.s_max}, {self.s_max}]")
        return s

    def interpolate(self, s, derivatives: int = 1):
        """Cubic Hermite interpolation of ``u`` and its derivatives at ``s``.

        Returns ``(u, u')`` for ``derivatives=1`` and ``(u, u', u'')`` for
        ``derivatives=2``.  Each derivative is itself Hermite-interpolated from
        the stored samples of it and of the next derivative, so all returned
        values are C^1 in ``s`` and exact at the samples.
        """
        s = self._check_range(s)
        m = self.params.m
        h = self.step
        x = (s - self.s_grid[0]) / h
        k = np.clip(np.floor(x).astype(int), 0, len(self.s_grid) - 2)
        t = x - k
        t2, t3 = t * t, t * t * t
        h00 = 2 * t3 - 3 * t2 + 1
        h10 = t3 - 2 * t2 + t
        h01 = -2 * t3 + 3 * t2
        h11 = t3 - t2

        def herm(f, df):
            return (h00 * f[k] + h10 * h * df[k]
                    + h01 * f[k + 1] + h11 * h * df[k + 1])

        u = herm(self.u, self.du)
        du = herm(self.du, self.ddu)
        if derivatives == 1:
            return u, du
        dddu = self.du * (1.0 - 2.0 * m / self.u ** 3)
        ddu = herm(self.ddu, dddu)
        return u, du, ddu


def integrate_warp(a: float, s_max: float = DEFAULT_S_MAX,
                   step: float = DEFAULT_STEP) -> WarpProfile:
    """Integrate the warping ODE outward from ``s = 0`` in both directions.

    Parameters
    ----------
    a : float
        Horizon radius, ``u(0) = a``.
    s_max : float
        Half-width of the sampled interval.
    step : float
        RK4 step; ``s_max/step`` is rounded to the nearest integer and the step
        adjusted so that ``s_max`` is a sample.
    """
    if not (s_max > 0 and step > 0):
        raise DomainError("s_max and step must be positive")
    params = WarpParams.from_radius(a)
    nsteps = max(1, int(round(s_max / step)))
    h = s_max / nsteps
    if h > 1e-3 * s_max:
        log.warning("step %.3g is coarse relative to s_max=%.3g", h, s_max)
    u_pos, v_pos = _rk4_branch(params.a, params.m, h, nsteps)
    u_neg, v_neg = _rk4_branch(params.a, params.m, -h, nsteps)
    u = np.concatenate([u_neg[:0:-1], u_pos])
    du = np.concatenate([v_neg[:0:-1], v_pos])
    s = h * np.arange(-nsteps, nsteps + 1)
    ddu = u + params.m / u ** 2
    return WarpProfile(params=params, s_grid=s, u=u, du=du, ddu=ddu, step=h)


def scalar_curvature(profile: WarpProfile, s):
    """Scalar curvature ``-4u''/u + 2(1 - u'^2)/u^2`` of the warped metric."""
    u, du, ddu = profile.interpolate(s, derivatives=2)
    return -4.0 * ddu / u + 2.0 * (1.0 - du * du) / (u * u)


def ricci_normal(profile: WarpProfile, s):
    """``Ric(d/ds, d/ds) = -2u''/u``, the Ricci curvature along slice normals."""
    u, _, ddu = profile.interpolate(s, derivatives=2)
    return -2.0 * ddu / u


def ricci_tangential(profile: WarpProfile, s):
    """Ricci curvature on a unit vector tangent to the hemisphere factor."""
    u, du, ddu = profile.interpolate(s, derivatives=2)
    return -ddu / u + (1.0 - du * du) / (u * u)


@dataclass(frozen=True)
class AmbientCurvature:
    """Ambient data entering the Jacobi operator and the mass formulas.

    Fields may be scalars or nodal arrays.  In the model ``R = -6`` and the
    boundary wall ``R x dS^2_+`` is totally geodesic (``H_bdy = h_bdy_NN = 0``).
    """

    R: object
    ric_NN: object
    inf_R: float = -6.0
    H_bdy: object = 0.0
    h_bdy_NN: object = 0.0


@dataclass(frozen=True)
class SliceSummary:
    s: float
    H: float
    normsq_h: float
    K: float
    area: float
    k_g: float
    robin: float


def slice_data(profile: WarpProfile, s: float) -> SliceSummary:
    """Closed-form geometry of the slice ``{s} x S^2_+`` (a round hemisphere)."""
    u, du = profile.interpolate(s)
    u, du = float(u), float(du)
    H = 2.0 * NORMAL_SIGN * du / u
    return SliceSummary(s=float(s), H=H, normsq_h=0.5 * H * H, K=1.0 / u ** 2,
                        area=2.0 * math.pi * u * u, k_g=0.0, robin=0.0)


PROFILE_CSV_HEADER = ("s", "u", "du", "ddu", "R", "ric_NN", "H", "K", "area")


def profile_rows(profile: WarpProfile) -> Iterable[tuple]:
    u, du, ddu = profile.u, profile.du, profile.ddu
    R = -4.0 * ddu / u + 2.0 * (1.0 - du * du) / (u * u)
    ric = -2.0 * ddu / u
    H = 2.0 * NORMAL_SIGN * du / u
    K = 1.0 / u ** 2
    area = 2.0 * np.pi * u * u
    for row in zip(profile.s_grid, u, du, ddu, R, ric, H, K, area):
        yield tuple(float(x) for x in row)


def write_profile_csv(profile: WarpProfile, path) -> None:
    """Write one row per sample; ``repr`` keeps IEEE-754 round-trip digits."""
    with text_sink(path) as fh:
        writer = csv.writer(fh)
        writer.writerow(PROFILE_CSV_HEADER)
        for row in profile_rows(profile):
            writer.writerow([repr(x) for x in row])
