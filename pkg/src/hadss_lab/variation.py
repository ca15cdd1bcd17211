"""Normal variations of graph surfaces and the variation formulas they test.

A variation with speed ``phi`` moves the surface along ``phi N``.  The area
changes at rate ``int phi H dv`` and, at a free boundary minimal surface, has
second derivative ``Q(phi, phi)`` (index form).  The first derivative of the
modified Hawking mass along ``phi N`` is

    c [ 2 int H Delta phi + int (R - inf R) H phi
        - int (2K - 4 pi chi/A - |h|^2 + (1/2A) int H^2) H phi ],

with ``c = A^{1/2}/(8pi)^{3/2}``; it follows from the area variation,
``H' = -L phi`` and the Gauss equation.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from typing import Callable, NamedTuple, Sequence

import numpy as np

from ._io import text_sink
from .errors import ContractError, PreconditionError
from .geometry import GraphSurface, SurfaceGeometry, surface_geometry
from .jacobi import OperatorAssembly, assemble, index_form
from .mass import EIGHT_PI
from .warp import AmbientCurvature

DEFAULT_FD_STEP = 1e-3
MINIMAL_TOL = 1e-6
_OFFSETS = np.array([-2.0, -1.0, 0.0, 1.0, 2.0])


@dataclass(frozen=True, eq=False)
class VariationFamily:
    """Surfaces ``Sigma_s`` moved with normal speed ``phi`` from ``base``.

    The graph displacement is ``w - s phi sqrt(q)`` where ``q`` is the tilt
    factor of the base; the vertical speed ``phi sqrt(q)`` has normal component
    exactly ``phi``.
    """

    base: GraphSurface
    phi: np.ndarray = field(repr=False)
    steps: np.ndarray
    surfaces: tuple = field(repr=False)

    @property
    def step(self) -> float:
        return float(self.steps[3] - self.steps[2])


def variation_family(base: GraphSurface, phi, h: float = DEFAULT_FD_STEP,
                     steps: Sequence[float] | None = None) -> VariationFamily:
    """Family sampled at ``s in {-2h, -h, 0, h, 2h}`` (or explicit ``steps``)."""
    phi = np.broadcast_to(np.asarray(phi, dtype=float), base.grid.shape).copy()
    steps = h * _OFFSETS if steps is None else np.asarray(steps, dtype=float)
    speed = phi * np.sqrt(surface_geometry(base).q)
    members = tuple(base if s == 0.0 else base.with_w(base.w - s * speed)
                    for s in steps)
    return VariationFamily(base=base, phi=phi, steps=steps, surfaces=members)


def fd_derivative(functional: Callable, family, h: float | None = None):
    """First and second derivative at ``s = 0`` from five samples.

    ``family`` is a :class:`VariationFamily` (``functional`` receives each
    member surface) or a plain sequence of parameter values (``functional``
    receives the value).  The stencils are the Richardson combinations of the
    ``h`` and ``2h`` central differences, exact for quartics.

    Raises
    ------
    ContractError
        Unless the samples are exactly ``{-2h, -h, 0, h, 2h}``.
    """
    if isinstance(family, VariationFamily):
        steps, members = family.steps, family.surfaces
    else:
        steps = np.asarray(family, dtype=float)
        members = steps
    steps = np.asarray(steps, dtype=float)
    if steps.shape != (5,):
        raise ContractError("finite differences need exactly five samples")
    step = steps[3] if h is None else h
    if not step > 0 or not np.allclose(steps, step * _OFFSETS, rtol=0,
                                       atol=1e-12 * step):
        raise ContractError("samples must sit at s = -2h, -h, 0, h, 2h")
    f = np.array([functional(m) for m in members], dtype=float)
    d1 = (f[0] - 8 * f[1] + 8 * f[3] - f[4]) / (12 * step)
    d2 = (-f[0] + 16 * f[1] - 30 * f[2] + 16 * f[3] - f[4]) / (12 * step ** 2)
    return float(d1), float(d2)


def first_variation_area_rhs(surface: GraphSurface, phi,
                             geometry: SurfaceGeometry | None = None) -> float:
    """``int phi H dv``."""
    geo = geometry if geometry is not None else surface_geometry(surface)
    return geo.integrate(np.asarray(phi) * geo.H)


def first_variation_mass_rhs(surface: GraphSurface, phi,
                             ambient: AmbientCurvature | None = None,
                             geometry: SurfaceGeometry | None = None,
                             chi: int = 1) -> float:
    """Analytic derivative of the modified Hawking mass along ``phi N``."""
    geo = geometry if geometry is not None else surface_geometry(surface)
    amb = ambient if ambient is not None else geo.model_ambient()
    phi = np.broadcast_to(np.asarray(phi, dtype=float), geo.grid.shape)
    A = geo.area
    c = math.sqrt(A) / EIGHT_PI ** 1.5
    H = geo.H
    lap = geo.laplacian(phi, eq=1 if surface.neumann else None)
    mean_h2 = geo.integrate(H * H) / (2 * A)
    bracket = (2 * geo.K - 4 * math.pi * chi / A - geo.normsq_h + mean_h2)
    integrand = (2 * H * lap + (np.asarray(amb.R) - amb.inf_R) * H * phi
                 - bracket * H * phi)
    return c * geo.integrate(integrand)


def second_variation_area_check(surface: GraphSurface, phi,
                                h: float = DEFAULT_FD_STEP,
                                assembly: OperatorAssembly | None = None):
    """Finite-difference ``d^2 A`` and ``Q(phi, phi)`` at a minimal surface.

    Raises
    ------
    PreconditionError
        If the base is not minimal (``max |H| > 1e-6``).
    """
    geo = surface_geometry(surface)
    if np.max(np.abs(geo.H)) > MINIMAL_TOL:
        raise PreconditionError(
            f"base surface is not minimal (max |H| = {np.max(np.abs(geo.H)):.3g})")
    asm = assembly if assembly is not None else assemble(surface, geometry=geo)
    fam = variation_family(surface, phi, h)
    _, d2 = fd_derivative(lambda s: surface_geometry(s).area, fam)
    return d2, index_form(asm, phi, phi)


class StabilityValue(NamedTuple):
    full: float
    normalized: float
    reduced: float


def stability_inequality_value(lambda1: float, area: float,
                               mass: float) -> StabilityValue:
    """Right-hand side of the stability inequality for maximisers of the mass.

    ``full`` is ``-2c lambda^2 + 4c lambda + m lambda/(2A)`` with
    ``c = A^{1/2}/(8pi)^{3/2}``; ``normalized`` is ``full/c`` and ``reduced`` the
    form ``lambda^2 - 3 lambda - 2 pi lambda/A`` obtained after inserting the
    minimal disk mass ``m = sqrt(A/8pi) + 4 (A/8pi)^{3/2}``, for which
    ``full = -2c reduced``.  All three vanish at the model horizon.  A negative
    reduced value means the inequality ``0 >= full`` fails for a minimal disk.
    """
    c = math.sqrt(area) / EIGHT_PI ** 1.5
    lam = lambda1
    full = -2 * c * lam ** 2 + 4 * c * lam + mass * lam / (2 * area)
    normalized = (-2 * lam ** 2 + 4 * lam
                  + EIGHT_PI ** 1.5 * mass * lam / (2 * area ** 1.5))
    reduced = lam ** 2 - 3 * lam - 2 * math.pi * lam / area
    return StabilityValue(full, normalized, reduced)


VARIATION_CSV_HEADER = ("test_id", "base_s0", "a", "phi_label", "fd_value",
                        "analytic_value", "abs_err", "rel_err")


def variation_row(test_id: str, surface: GraphSurface, phi_label: str,
                  fd_value: float, analytic: float) -> dict:
    err = abs(fd_value - analytic)
    rel = err / abs(analytic) if analytic != 0 else float("inf") if err else 0.0
    return {"test_id": test_id, "base_s0": surface.s0,
            "a": surface.profile.params.a, "phi_label": phi_label,
            "fd_value": fd_value, "analytic_value": analytic,
            "abs_err": err, "rel_err": rel}


def write_variation_csv(rows, path) -> None:
    with text_sink(path) as fh:
        writer = csv.DictWriter(fh, fieldnames=VARIATION_CSV_HEADER)
        writer.writeheader()
        for row in rows:
            writer.writerow({k: (repr(v) if isinstance(v, float) else v)
                             for k, v in row.items()})
