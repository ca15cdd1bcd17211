"""Modified Hawking mass of free boundary disks and its foliation derivative.

For a disk ``Sigma`` (Euler characteristic 1)

    m(Sigma) = sqrt(A/8pi) * (chi - (1/8pi) int (H^2 + (2/3) inf R) dv).

Along a free boundary CMC foliation with lapse ``rho`` the derivative splits
into terms that each have a sign once ``R >= inf R``, ``H^dM >= 0``,
``|h|^2 >= H^2/2`` and ``|grad rho|^2 >= 0`` are known; they are exposed
separately by :func:`mass_derivative_terms`.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from ._io import text_sink
from .errors import ContractError, DomainError
from .geometry import GraphSurface, SurfaceGeometry, surface_geometry
from .warp import AmbientCurvature

EIGHT_PI = 8.0 * math.pi


@dataclass(frozen=True)
class MassReport:
    area: float
    integral_term: float
    chi: int
    mass: float
    inf_R: float = -6.0


def mass_from_parts(area: float, integral_term: float, chi: int = 1) -> float:
    return math.sqrt(area / EIGHT_PI) * (chi - integral_term / EIGHT_PI)


def modified_hawking_mass(surface: GraphSurface, inf_R: float = -6.0,
                          geometry: SurfaceGeometry | None = None,
                          chi: int = 1) -> MassReport:
    """Modified Hawking mass of a graph disk over the hemisphere."""
    geo = geometry if geometry is not None else surface_geometry(surface)
    A = geo.area
    integral = geo.integrate(geo.H ** 2 + (2.0 / 3.0) * inf_R)
    return MassReport(area=A, integral_term=integral, chi=chi,
                      mass=mass_from_parts(A, integral, chi), inf_R=inf_R)


def minimal_disk_mass(area: float) -> float:
    """Mass of a minimal disk of the given area when ``inf R = -6``."""
    if not area > 0:
        raise DomainError(f"area must be positive, got {area!r}")
    x = area / EIGHT_PI
    return math.sqrt(x) + 4.0 * x ** 1.5


@dataclass(frozen=True)
class MassDerivativeTerms:
    """Signed contributions to ``d/dt m`` along a CMC foliation.

    Each ``*_deficit``/``*_term`` field is the full contribution including the
    prefactor ``-c H rho_bar`` with ``c = A^{1/2}/(8pi)^{3/2}``; the raw
    integrals (all non-negative under the geometric hypotheses) are kept in
    ``scalar_integral`` and friends.  ``theta_term`` is ``None`` unless the
    function ``theta`` was supplied.
    """

    scalar_deficit: float
    trace_deficit: float
    lapse_gradient: float
    boundary_term: float
    theta_term: float | None
    scalar_integral: float
    trace_integral: float
    gradient_integral: float
    boundary_integral: float
    H: float
    area: float
    rho_bar: float

    @property
    def predicted(self) -> float:
        """Sum of the evaluable terms (the predicted ``d/dt m``)."""
        total = (self.scalar_deficit + self.trace_deficit
                 + self.lapse_gradient + self.boundary_term)
        if self.theta_term is not None:
            total += self.theta_term
        return total

    def evaluable(self) -> dict:
        out = {"scalar_deficit": self.scalar_deficit,
               "trace_deficit": self.trace_deficit,
               "lapse_gradient": self.lapse_gradient,
               "boundary_term": self.boundary_term}
        if self.theta_term is not None:
            out["theta_term"] = self.theta_term
        return out


def mass_derivative_terms(geometry: SurfaceGeometry, rho,
                          ambient: AmbientCurvature | None = None,
                          H: float | None = None, h_prime: float | None = None,
                          theta: float | None = None,
                          rho_neumann: bool = True) -> MassDerivativeTerms:
    """Term-by-term derivative of the mass along a CMC foliation.

    Parameters
    ----------
    geometry : SurfaceGeometry
        Geometry of the leaf.
    rho : array_like
        Nodal lapse of the foliation on the leaf.
    ambient : AmbientCurvature, optional
        Defaults to the warped model.
    H : float, optional
        The constant mean curvature of the leaf; defaults to the quadrature
        mean of the nodal values.
    h_prime, theta : float, optional
        ``H'(t)`` and the externally supplied function ``theta``; the term
        ``-2 c H H' theta`` is only formed when both are given.
    rho_neumann : bool
        Whether ``rho`` is even across the equator (Neumann).

    Raises
    ------
    ContractError
        If the lapse is missing, non-finite or not positive.
    """
    if rho is None:
        raise ContractError("mass derivative needs the lapse of the foliation")
    grid = geometry.grid
    rho = np.broadcast_to(np.asarray(rho, dtype=float), grid.shape)
    if not np.all(np.isfinite(rho)) or np.any(rho <= 0):
        raise ContractError("lapse must be finite and positive")
    amb = ambient if ambient is not None else geometry.model_ambient()
    A = geometry.area
    if H is None:
        H = geometry.integrate(geometry.H) / A
    rho_bar = geometry.integrate(rho) / A
    c = math.sqrt(A) / EIGHT_PI ** 1.5
    pref = -c * H * rho_bar

    scalar = geometry.integrate(np.asarray(amb.R) - amb.inf_R)
    trace = geometry.integrate(geometry.normsq_h - 0.5 * geometry.H ** 2)
    grad = geometry.integrate(
        geometry.gradient_sq(rho, eq=1 if rho_neumann else None) / rho ** 2)
    ds = np.sqrt(geometry.G[-1])
    bdy = grid.boundary_integrate(
        np.broadcast_to(np.asarray(amb.H_bdy, dtype=float), (grid.nphi,)) * ds)
    theta_term = None
    if h_prime is not None and theta is not None:
        theta_term = -2.0 * c * H * h_prime * theta
    return MassDerivativeTerms(
        scalar_deficit=pref * scalar, trace_deficit=pref * trace,
        lapse_gradient=2.0 * pref * grad, boundary_term=2.0 * pref * bdy,
        theta_term=theta_term, scalar_integral=scalar, trace_integral=trace,
        gradient_integral=grad, boundary_integral=bdy, H=float(H), area=A,
        rho_bar=rho_bar)


def mass_report(surface: GraphSurface, inf_R: float = -6.0) -> dict:
    """Mass of ``surface`` next to the model parameter ``m``."""
    rep = modified_hawking_mass(surface, inf_R)
    expected = surface.profile.params.m
    return {
        "a": surface.profile.params.a,
        "s0": surface.s0,
        "area": rep.area,
        "mass": rep.mass,
        "expected_mass": expected,
        "abs_error": abs(rep.mass - expected),
    }


def write_mass_json(report: dict, path) -> None:
    with text_sink(path) as fh:
        json.dump(report, fh, indent=2)
        fh.write("\n")
