"""Geometry of normal graphs ``{(s0 + w(x), x)}`` over hemisphere slices.

The ambient metric is ``ds^2 + u(s)^2 (dtheta^2 + sin^2 theta dphi^2)``.  For
a graph ``s = s0 + w(theta, phi)`` the level function ``F = s - s0 - w`` gives

* induced metric ``g_ij = U^2 ghat_ij + w_i w_j`` with ``U = u(s0 + w)``;
* unit normal ``N = -grad F/|grad F|`` (reduces to ``-d/ds`` on slices);
* second fundamental form ``h_ij = (Hhat(w)_ij - U U' ghat_ij
  - 2 (U'/U) w_i w_j) / sqrt(q)`` with ``q = 1 + |dw|^2_ghat / U^2`` and
  ``Hhat`` the covariant Hessian of the round metric.

Gaussian curvature is computed from the induced metric alone (Brioschi
formula), so comparing it with the Gauss equation is a real cross-check.  The
``sin^2 theta`` factor of ``g_phiphi`` is differentiated analytically, so
slices are reproduced to rounding error.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from ._io import text_sink
from .errors import DomainError, GeometryError
from .grid import HemisphereGrid
from .warp import (NORMAL_SIGN, AmbientCurvature, WarpProfile, ricci_normal,
                   ricci_tangential)


@dataclass(frozen=True)
class GraphSurface:
    """Surface ``s = s0 + w`` over the hemisphere.

    ``neumann`` records whether ``w`` has vanishing ``theta``-derivative on the
    equator; derivative stencils then reflect evenly across it, otherwise they
    extrapolate.
    """

    profile: WarpProfile
    grid: HemisphereGrid
    s0: float
    w: np.ndarray = field(repr=False)
    neumann: bool = True

    def __post_init__(self):
        w = np.broadcast_to(np.asarray(self.w, dtype=float),
                            self.grid.shape).copy()
        w.setflags(write=False)
        object.__setattr__(self, "w", w)

    @property
    def eq_parity(self):
        return 1 if self.neumann else None

    def with_w(self, w, neumann=None) -> "GraphSurface":
        return GraphSurface(self.profile, self.grid, self.s0, w,
                            self.neumann if neumann is None else neumann)


def slice_surface(profile: WarpProfile, grid: HemisphereGrid,
                  s0: float) -> GraphSurface:
    return GraphSurface(profile, grid, float(s0), np.zeros(grid.shape))


@dataclass(frozen=True)
class BoundaryData:
    """Per-equator-node data of ``dSigma`` (arrays of length ``nphi``)."""

    k_g: np.ndarray
    contact_angle: np.ndarray
    conormal: np.ndarray  # (nphi, 3) components on (d/ds, d/dtheta, d/dphi)
    ds: np.ndarray  # boundary length element per unit dphi

    @property
    def length(self) -> float:
        return float(np.sum(self.ds) * (2 * np.pi / len(self.ds)))


@dataclass(frozen=True, eq=False)
class SurfaceGeometry:
    surface: GraphSurface
    s: np.ndarray
    U: np.ndarray
    dU: np.ndarray
    ddU: np.ndarray
    wt: np.ndarray
    wp: np.ndarray
    q: np.ndarray
    E: np.ndarray
    F: np.ndarray
    G: np.ndarray
    det: np.ndarray
    g_inv: tuple
    h: tuple
    H: np.ndarray
    normsq_h: np.ndarray
    K: np.ndarray
    density: np.ndarray  # area element relative to the unit hemisphere

    @property
    def grid(self) -> HemisphereGrid:
        return self.surface.grid

    @cached_property
    def dv(self) -> np.ndarray:
        """Area weight of every node (sums to the area)."""
        return self.density * self.grid.weights

    @cached_property
    def area(self) -> float:
        return self.grid.integrate(self.density)

    def integrate(self, values) -> float:
        return self.grid.integrate(np.asarray(values) * self.density)

    @cached_property
    def normal_s(self) -> np.ndarray:
        """``<N, d/ds>`` at each node."""
        return NORMAL_SIGN / np.sqrt(self.q)

    @cached_property
    def umbilicity(self) -> np.ndarray:
        """``|h|^2 - H^2/2``; non-negative, zero exactly at umbilic points."""
        return self.normsq_h - 0.5 * self.H ** 2

    def gradient_sq(self, f, eq=1) -> np.ndarray:
        """``|grad f|^2`` in the induced metric."""
        grid = self.grid
        ft = grid.d_theta(f, 1, eq)
        fp = grid.d_phi(f)
        gtt, gtp, gpp = self.g_inv
        return gtt * ft * ft + 2 * gtp * ft * fp + gpp * fp * fp

    def laplacian(self, f, eq=1) -> np.ndarray:
        """Pointwise Laplace--Beltrami in divergence form.

        ``eq=1`` assumes ``f`` is even across the equator; pass ``None`` for
        fields without that symmetry.
        """
        grid = self.grid
        eq_s = None if (eq is None or not self.surface.neumann) else 1
        ft = grid.d_theta(f, 1, eq_s)
        fp = grid.d_phi(f)
        gtt, gtp, gpp = self.g_inv
        sqrt_g = grid.sin * self.density
        flux_t = sqrt_g * (gtt * ft + gtp * fp)
        flux_p = sqrt_g * (gtp * ft + gpp * fp)
        eq_flux = None if eq_s is None else -1
        div = grid.d_theta(flux_t, 1, eq_flux) + grid.d_phi(flux_p)
        return div / sqrt_g

    def model_ambient(self, inf_R: float = -6.0) -> AmbientCurvature:
        """Ambient curvature of the warped model at the surface nodes."""
        prof = self.surface.profile
        ric_ss = ricci_normal(prof, self.s)
        ric_hh = ricci_tangential(prof, self.s)
        ns2 = 1.0 / self.q
        ric_NN = ns2 * ric_ss + (1.0 - ns2) * ric_hh
        R = ric_ss + 2.0 * ric_hh
        return AmbientCurvature(R=R, ric_NN=ric_NN, inf_R=inf_R,
                                H_bdy=0.0, h_bdy_NN=0.0)


def surface_geometry(surface: GraphSurface) -> SurfaceGeometry:
    """Fundamental forms, curvatures and area density of a graph surface.

    Raises
    ------
    DomainError
        If ``s0 + w`` leaves the sampled range of the warp profile.
    GeometryError
        If ``w`` is not finite or the induced metric is degenerate.
    """
    grid = surface.grid
    w = surface.w
    if not np.all(np.isfinite(w)):
        raise GeometryError("displacement field has non-finite values")
    s = surface.s0 + w
    try:
        U, dU, ddU = surface.profile.interpolate(s, derivatives=2)
    except DomainError as exc:
        raise DomainError(f"surface leaves the warp profile: {exc}") from exc
    if np.any(U <= 0):
        raise GeometryError("warping factor vanished on the surface")
    eq = surface.eq_parity
    eq_odd = None if eq is None else -1
    sn, cs = grid.sin, grid.cos

    wt = grid.d_theta(w, 1, eq)
    wp = grid.d_phi(w)
    wtt = grid.d2_theta(w, 1, eq)
    wtp = grid.d_phi(wt)
    wpp = grid.d2_phi(w)

    U2 = U * U
    grad_sq = wt * wt + wp * wp / sn ** 2
    q = 1.0 + grad_sq / U2
    E = U2 + wt * wt
    F = wt * wp
    Gt = U2 + wp * wp / sn ** 2
    G = sn ** 2 * Gt
    det = E * G - F * F
    if np.any(~np.isfinite(det)) or np.any(det <= 0):
        raise GeometryError("induced metric is not positive definite")
    gtt, gtp, gpp = G / det, -F / det, E / det

    rq = np.sqrt(q)
    hess_tt = wtt
    hess_tp = wtp - (cs / sn) * wp
    hess_pp = wpp + sn * cs * wt
    k = dU / U
    htt = (hess_tt - U * dU - 2 * k * wt * wt) / rq
    htp = (hess_tp - 2 * k * wt * wp) / rq
    hpp = (hess_pp - U * dU * sn ** 2 - 2 * k * wp * wp) / rq

    H = gtt * htt + 2 * gtp * htp + gpp * hpp
    # mixed tensor S = g^{-1} h; |h|^2 = tr(S^2)
    s11 = gtt * htt + gtp * htp
    s12 = gtt * htp + gtp * hpp
    s21 = gtp * htt + gpp * htp
    s22 = gtp * htp + gpp * hpp
    normsq_h = s11 * s11 + 2 * s12 * s21 + s22 * s22

    K = _brioschi(grid, E, F, Gt, eq, eq_odd)

    density = U2 * rq
    return SurfaceGeometry(surface=surface, s=s, U=U, dU=dU, ddU=ddU, wt=wt,
                           wp=wp, q=q, E=E, F=F, G=G, det=det,
                           g_inv=(gtt, gtp, gpp), h=(htt, htp, hpp), H=H,
                           normsq_h=normsq_h, K=K, density=density)


def _brioschi(grid, E, F, Gt, eq, eq_odd):
    sn, cs = grid.sin, grid.cos
    E_t = grid.d_theta(E, 1, eq)
    E_p = grid.d_phi(E)
    E_pp = grid.d2_phi(E)
    F_t = grid.d_theta(F, -1, eq_odd)
    F_p = grid.d_phi(F)
    F_tp = grid.d_phi(F_t)
    Gt_t = grid.d_theta(Gt, 1, eq)
    Gt_tt = grid.d2_theta(Gt, 1, eq)
    Gt_p = grid.d_phi(Gt)
    s2, sc = sn ** 2, sn * cs
    G = s2 * Gt
    G_t = 2 * sc * Gt + s2 * Gt_t
    G_tt = 2 * (cs ** 2 - s2) * Gt + 4 * sc * Gt_t + s2 * Gt_tt
    G_p = s2 * Gt_p

    a11 = -0.5 * E_pp + F_tp - 0.5 * G_tt
    a12, a13 = 0.5 * E_t, F_t - 0.5 * E_p
    a21, a31 = F_p - 0.5 * G_t, 0.5 * G_p
    det1 = (a11 * (E * G - F * F) - a12 * (a21 * G - F * a31)
            + a13 * (a21 * F - E * a31))
    b12, b13 = 0.5 * E_p, 0.5 * G_t
    det2 = -b12 * (b12 * G - F * b13) + b13 * (b12 * F - E * b13)
    return (det1 - det2) / (E * G - F * F) ** 2


def area(surface: GraphSurface) -> float:
    return surface_geometry(surface).area


def integrate_scalar(surface: GraphSurface, values) -> float:
    return surface_geometry(surface).integrate(values)


def boundary_data(surface: GraphSurface,
                  geometry: SurfaceGeometry | None = None) -> BoundaryData:
    """Geodesic curvature, contact angle and conormal along the equator.

    Derivatives normal to the boundary use one-sided (extrapolated) stencils,
    so a displacement violating the Neumann condition shows up as a contact
    angle different from ``pi/2``.
    """
    geo = geometry if geometry is not None else surface_geometry(surface)
    grid = surface.grid
    w = surface.w
    wt = grid.d_theta(w, 1, None)[-1]
    wp = grid.d_phi(w)[-1]
    U = geo.U[-1]
    U2 = U * U
    # on the equator sin = 1, so ghat is the identity there
    q = 1.0 + (wt * wt + wp * wp) / U2
    cos_angle = np.clip(wt / (U * np.sqrt(q)), -1.0, 1.0)
    contact = np.arccos(cos_angle)

    E, F, G = U2 + wt * wt, wt * wp, U2 + wp * wp
    det = E * G - F * F
    # d/dtheta of G = sin^2 (U^2 + w_p^2/sin^2) and d/dphi of F, G at theta = pi/2
    Gt_full = geo.U ** 2 + geo.wp ** 2 / grid.sin ** 2
    Gt_t = grid.d_theta(Gt_full, 1, None)[-1]
    G_t = 2 * grid.cos[-1, 0] * Gt_full[-1] + Gt_t
    wt_full = grid.d_theta(w, 1, None)
    F_p = grid.d_phi(wt_full * geo.wp)[-1]
    G_p = grid.d_phi(Gt_full)[-1]
    gamma1_22 = (2 * G * F_p - G * G_t - F * G_p) / (2 * det)
    k_g = -gamma1_22 * np.sqrt(det) / G ** 1.5

    gtt, gtp = G / det, -F / det
    norm = np.sqrt(gtt)
    conormal = np.stack([(gtt * wt + gtp * wp) / norm, gtt / norm,
                         gtp / norm], axis=1)
    return BoundaryData(k_g=k_g, contact_angle=contact, conormal=conormal,
                        ds=np.sqrt(G))


def gauss_bonnet_residual(surface: GraphSurface,
                          geometry: SurfaceGeometry | None = None) -> float:
    """``int K dv + int k_g ds - 2 pi chi`` with ``chi = 1`` (a disk)."""
    geo = geometry if geometry is not None else surface_geometry(surface)
    bd = boundary_data(surface, geo)
    total_k = geo.integrate(geo.K)
    total_kg = surface.grid.boundary_integrate(bd.k_g * bd.ds)
    return total_k + total_kg - 2 * np.pi


SURFACE_CSV_HEADER = ("theta", "phi", "w", "H", "K", "normsq_h", "dv")


def write_surface_csv(geometry: SurfaceGeometry, path) -> None:
    grid = geometry.grid
    cols = [grid.TH, grid.PH, geometry.surface.w, geometry.H, geometry.K,
            geometry.normsq_h, geometry.dv]
    with text_sink(path) as fh:
        writer = csv.writer(fh)
        writer.writerow(SURFACE_CSV_HEADER)
        for row in zip(*(np.asarray(c).ravel() for c in cols)):
            writer.writerow([repr(float(x)) for x in row])
