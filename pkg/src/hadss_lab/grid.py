"""Tensor grid on the closed upper hemisphere and its difference operators.

Nodes sit at ``theta_i = (i + 1/2) dtheta`` with ``dtheta = pi/(2 ntheta - 1)``
so that the pole is never a node while the last row lies exactly on the
equator ``theta = pi/2``.  Reflecting this row set through the equator and
through the pole reproduces a uniform grid on the whole meridian circle, which
is what the ghost-node stencils below rely on:

* across the pole a node ``(theta, phi)`` is mirrored to ``(-theta, phi+pi)``;
* across the equator a node ``(pi/2 - x, phi)`` is mirrored to ``(pi/2 + x, phi)``.

Each reflection multiplies the field by a parity (+1 even, -1 odd) that the
caller states; ``None`` at the equator switches to polynomial extrapolation
for fields without a definite parity there.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
from scipy.special import eval_legendre, lpmv

from .errors import ConfigError

MIN_NTHETA = 8
MIN_NPHI = 8
#: Number of end-corrected nodes at each end of the colatitude rule.
GREGORY_NODES = 5


def _colatitude_weights(n: int, h: float, ncorr: int) -> np.ndarray:
    """Weights for ``int_0^{pi/2} f(theta) dtheta`` on the half-shifted grid.

    Composite rule with uniform interior weights ``h`` (``h/2`` on the equator
    node) and end corrections on ``ncorr`` nodes at either end, chosen so that
    every polynomial of degree ``< 2 ncorr`` is integrated exactly.
    """
    theta = (np.arange(n) + 0.5) * h
    w = np.full(n, h)
    w[-1] = 0.5 * h
    if ncorr == 0:
        return w
    idx = np.r_[np.arange(ncorr), np.arange(n - ncorr, n)]
    c = np.pi / 4
    deg = np.arange(2 * ncorr)
    x = (theta - c) / c
    moments = c * (1.0 - (-1.0) ** (deg + 1)) / (deg + 1)
    vander = x[idx][None, :] ** deg[:, None]
    base = (x[None, :] ** deg[:, None]) @ w
    w[idx] += np.linalg.solve(vander, moments - base)
    return w


@dataclass(frozen=True)
class HemisphereGrid:
    """Colatitude/longitude tensor grid with quadrature weights.

    ``weights[i, j]`` integrates over the unit hemisphere (they include the
    ``sin(theta)`` Jacobian and sum to ``2 pi``).
    """

    ntheta: int
    nphi: int
    theta: np.ndarray = field(repr=False)
    phi: np.ndarray = field(repr=False)
    dtheta: float
    dphi: float
    theta_weights: np.ndarray = field(repr=False)

    @cached_property
    def TH(self) -> np.ndarray:
        return np.broadcast_to(self.theta[:, None], self.shape)

    @cached_property
    def PH(self) -> np.ndarray:
        return np.broadcast_to(self.phi[None, :], self.shape)

    @property
    def shape(self):
        return (self.ntheta, self.nphi)

    @cached_property
    def sin(self) -> np.ndarray:
        return np.sin(self.theta)[:, None]

    @cached_property
    def cos(self) -> np.ndarray:
        c = np.cos(self.theta)
        c[-1] = 0.0
        return c[:, None]

    @cached_property
    def weights(self) -> np.ndarray:
        w = self.theta_weights * np.sin(self.theta) * self.dphi
        return np.broadcast_to(w[:, None], self.shape).copy()

    @cached_property
    def row_lengths(self) -> np.ndarray:
        """Colatitude quadrature weights without the ``sin`` factor."""
        return self.theta_weights

    def integrate(self, values) -> float:
        """Quadrature of a nodal field over the unit hemisphere."""
        vals = np.broadcast_to(np.asarray(values, dtype=float), self.shape)
        return float(np.sum((vals * self.weights).ravel()))

    def boundary_integrate(self, values) -> float:
        """Periodic trapezoid rule over the equator row (``d phi`` measure)."""
        vals = np.broadcast_to(np.asarray(values, dtype=float), (self.nphi,))
        return float(np.sum(vals) * self.dphi)

    # -- difference operators ------------------------------------------------

    def _pad(self, f, pole, eq):
        n, p = f.shape
        half = p // 2
        top = np.roll(f[[1, 0]], half, axis=1)
        top = top * (1.0 if pole is None else pole)
        if eq is None:
            g0 = 5 * f[-1] - 10 * f[-2] + 10 * f[-3] - 5 * f[-4] + f[-5]
            g1 = 5 * g0 - 10 * f[-1] + 10 * f[-2] - 5 * f[-3] + f[-4]
            bottom = np.stack([g0, g1])
        else:
            bottom = eq * f[[n - 2, n - 3]]
        return np.concatenate([top, f, bottom], axis=0)

    def d_theta(self, f, pole=1, eq=1):
        """Fourth-order centred ``d/dtheta`` with reflection ghost rows."""
        g = self._pad(np.asarray(f, dtype=float), pole, eq)
        return (g[:-4] - 8 * g[1:-3] + 8 * g[3:-1] - g[4:]) / (12 * self.dtheta)

    def d2_theta(self, f, pole=1, eq=1):
        """Fourth-order centred ``d^2/dtheta^2``."""
        g = self._pad(np.asarray(f, dtype=float), pole, eq)
        return (-g[:-4] + 16 * g[1:-3] - 30 * g[2:-2] + 16 * g[3:-1]
                - g[4:]) / (12 * self.dtheta ** 2)

    def d_phi(self, f):
        f = np.asarray(f, dtype=float)
        r = lambda k: np.roll(f, -k, axis=1)
        return (r(-2) - 8 * r(-1) + 8 * r(1) - r(2)) / (12 * self.dphi)

    def d2_phi(self, f):
        f = np.asarray(f, dtype=float)
        r = lambda k: np.roll(f, -k, axis=1)
        return (-r(-2) + 16 * r(-1) - 30 * f + 16 * r(1)
                - r(2)) / (12 * self.dphi ** 2)


def build_grid(ntheta: int = 64, nphi: int = 128) -> HemisphereGrid:
    """Build the hemisphere grid with end-corrected colatitude quadrature."""
    if int(ntheta) != ntheta or int(nphi) != nphi:
        raise ConfigError("resolutions must be integers")
    ntheta, nphi = int(ntheta), int(nphi)
    if ntheta < MIN_NTHETA or nphi < MIN_NPHI or nphi % 2:
        raise ConfigError(
            f"need ntheta >= {MIN_NTHETA}, even nphi >= {MIN_NPHI}; "
            f"got ({ntheta}, {nphi})")
    h = np.pi / (2 * ntheta - 1)
    theta = (np.arange(ntheta) + 0.5) * h
    theta[-1] = 0.5 * np.pi
    ncorr = min(GREGORY_NODES, ntheta // 2)
    while True:
        tw = _colatitude_weights(ntheta, h, ncorr)
        if np.all(tw > 0) or ncorr == 0:
            break
        ncorr -= 1
    phi = np.arange(nphi) * (2 * np.pi / nphi)
    return HemisphereGrid(ntheta=ntheta, nphi=nphi, theta=theta, phi=phi,
                          dtheta=h, dphi=2 * np.pi / nphi, theta_weights=tw)


# -- test fields ---------------------------------------------------------------

def legendre_field(grid: HemisphereGrid, degree: int) -> np.ndarray:
    """Zonal field ``P_l(cos theta)``; Neumann at the equator for even ``l``."""
    return eval_legendre(degree, np.cos(grid.TH))


def real_harmonic(grid: HemisphereGrid, l: int, m: int) -> np.ndarray:
    """Unnormalised real spherical harmonic ``P_l^|m|(cos theta) trig(m phi)``.

    ``m >= 0`` uses ``cos(m phi)``, ``m < 0`` uses ``sin(|m| phi)``.  The field
    is even across the equator (hence Neumann there) iff ``l + m`` is even.
    """
    if abs(m) > l:
        raise ValueError("|m| must not exceed l")
    radial = lpmv(abs(m), l, np.cos(grid.TH))
    trig = np.cos(m * grid.PH) if m >= 0 else np.sin(-m * grid.PH)
    return radial * trig


def neumann_modes(max_degree: int):
    """All ``(l, m)`` with ``l <= max_degree`` and ``l + m`` even."""
    return [(l, m) for l in range(max_degree + 1)
            for m in range(-l, l + 1) if (l + m) % 2 == 0]


def random_neumann_field(grid: HemisphereGrid, rng: np.random.Generator,
                         max_degree: int = 4, include_constant: bool = True):
    """Random band-limited field built from equator-even harmonics."""
    out = np.zeros(grid.shape)
    for l, m in neumann_modes(max_degree):
        if l == 0 and not include_constant:
            continue
        y = real_harmonic(grid, l, m)
        y = y / np.sqrt(grid.integrate(y * y))
        out += rng.standard_normal() * y
    return out
