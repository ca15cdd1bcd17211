"""Acceptance suite: every quantitative identity of the toolkit in one report.

Each criterion produces an entry with a list of measured items, their
tolerances and a pass flag.  Module errors are captured per criterion.  The
report contains no timestamps or timings unless ``record_timing`` is set, so
two runs with the same configuration serialise to identical bytes.
"""

from __future__ import annotations

import copy
import hashlib
import json
import logging
import math
import time
import traceback
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError
from .foliation import (cmc_flow, h_prime_at_zero, lapse_identity_check,
                        mean_curvature_sign_check, normalisation_check)
from .geometry import (GraphSurface, boundary_data, gauss_bonnet_residual,
                       slice_surface, surface_geometry)
from .grid import build_grid, legendre_field, random_neumann_field
from .jacobi import assemble, first_eigenpair, spectrum
from .mass import minimal_disk_mass, modified_hawking_mass
from .variation import (first_variation_mass_rhs, fd_derivative,
                        second_variation_area_check,
                        stability_inequality_value, variation_family)
from .warp import (AmbientCurvature, horizon_radius, integrate_warp,
                   mass_from_radius)

log = logging.getLogger(__name__)

DEFAULT_CONFIG = {
    "a_values": [1.0, 1.5, 2.0],
    "m_values": None,
    "s_max": 2.0,
    "step": 1e-4,
    "ntheta": 64,
    "nphi": 128,
    "mass_a_values": [1.0, 2.0],
    "mass_leaves": 50,
    "mass_t_max": 0.5,
    "stability_samples": 20,
    "variation_a": 1.0,
    "variation_samples": 20,
    "variation_max_degree": 4,
    "variation_base_s0": 0.2,
    "variation_base_amplitude": 0.05,
    "fd_h": 1e-3,
    "foliation_a_values": [1.0, 2.0],
    "eps": 0.5,
    "flow_step": 1e-3,
    "lemma_t_values": [-0.4, -0.2, 0.0, 0.2, 0.4],
    "lemma_rho_amplitude": 0.1,
    "seed": 20240601,
    "determinism_check": True,
    "record_timing": False,
    "tolerances": {},
}

DEFAULT_TOLERANCES = {
    "scalar_curvature": 1e-8,
    "first_integral": 1e-10,
    "root_residual": 1e-12,
    "round_trip": 1e-10,
    "lambda1": 1e-3,
    "area_identity": 1e-3,
    "convergence_ratio": 3.5,
    "machine_floor": 1e-10,
    "hemisphere_spectrum": 5e-3,
    "mass_constancy": 1e-6,
    "minimal_disk": 1e-8,
    "normsq_h": 1e-9,
    "ricci_lambda": 2e-3,
    "gauss_curvature": 1e-6,
    "geodesic_curvature": 1e-6,
    "contact_angle": 1e-8,
    "gauss_bonnet": 1e-6,
    "stability": 1e-10,
    "second_variation": 1e-3,
    "mass_first_variation": 1e-3,
    "h_prime": 5e-4,
    "reconstruction": 1e-6,
    "normalisation": 1e-12,
    "lemma_residual": 1e-6,
}

HEMISPHERE_SPECTRUM = [0.0, 2.0, 2.0, 6.0, 6.0, 6.0]


def resolve_config(overrides: dict | None = None) -> dict:
    """Merge ``overrides`` into the defaults and validate.

    Exactly one of ``a_values`` and ``m_values`` may be given; ``m_values`` is
    converted to horizon radii.
    """
    cfg = copy.deepcopy(DEFAULT_CONFIG)
    overrides = dict(overrides or {})
    unknown = set(overrides) - set(cfg)
    if unknown:
        raise ConfigError(f"unknown configuration keys: {sorted(unknown)}")
    if overrides.get("m_values") is not None:
        if "a_values" in overrides and overrides["a_values"] is not None:
            raise ConfigError("give either a_values or m_values, not both")
        overrides["a_values"] = [horizon_radius(float(m))
                                 for m in overrides["m_values"]]
    cfg.update(overrides)
    tol = dict(DEFAULT_TOLERANCES)
    bad = set(cfg["tolerances"]) - set(tol)
    if bad:
        raise ConfigError(f"unknown tolerance keys: {sorted(bad)}")
    tol.update(cfg["tolerances"])
    cfg["tolerances"] = tol
    if not cfg["a_values"]:
        raise ConfigError("a_values must not be empty")
    for key in ("ntheta", "nphi"):
        if int(cfg[key]) != cfg[key] or cfg[key] <= 0:
            raise ConfigError(f"{key} must be a positive integer")
    return cfg


def _item(label, value, tolerance, relation="<", expected=None):
    if relation == "<":
        passed = bool(value < tolerance)
    elif relation == ">=":
        passed = bool(value >= tolerance)
    elif relation == ">":
        passed = bool(value > tolerance)
    elif relation == "==":
        passed = bool(value == tolerance)
    else:
        raise ValueError(relation)
    if isinstance(value, (np.floating, np.integer)):
        value = value.item()
    out = {"label": label, "measured": value, "relation": relation,
           "tolerance": tolerance, "passed": passed}
    if expected is not None:
        out["expected"] = expected
    return out


@dataclass
class _Context:
    cfg: dict
    profiles: dict = field(default_factory=dict)
    grids: dict = field(default_factory=dict)
    lambdas: dict = field(default_factory=dict)
    traces: dict = field(default_factory=dict)

    @property
    def tol(self):
        return self.cfg["tolerances"]

    def profile(self, a):
        key = float(a)
        if key not in self.profiles:
            self.profiles[key] = integrate_warp(key, self.cfg["s_max"],
                                                self.cfg["step"])
        return self.profiles[key]

    def grid(self, ntheta=None, nphi=None):
        key = (ntheta or self.cfg["ntheta"], nphi or self.cfg["nphi"])
        if key not in self.grids:
            self.grids[key] = build_grid(*key)
        return self.grids[key]

    def horizon_lambda(self, a, ntheta=None, nphi=None):
        grid = self.grid(ntheta, nphi)
        key = (float(a), grid.ntheta, grid.nphi)
        if key not in self.lambdas:
            surf = slice_surface(self.profile(a), grid, 0.0)
            self.lambdas[key] = first_eigenpair(assemble(surf))[0]
        return self.lambdas[key]


def _c1_scalar_curvature(ctx):
    items = []
    for a in ctx.cfg["a_values"]:
        p = ctx.profile(a)
        u, du, ddu = p.u, p.du, p.ddu
        R = -4.0 * ddu / u + 2.0 * (1.0 - du * du) / (u * u)
        items.append(_item(f"max|R+6| a={a!r}", float(np.max(np.abs(R + 6))),
                           ctx.tol["scalar_curvature"]))
    return items


def _c2_first_integral(ctx):
    return [_item(f"max first-integral residual a={a!r}",
                  float(np.max(np.abs(ctx.profile(a).first_integral_residual()))),
                  ctx.tol["first_integral"]) for a in ctx.cfg["a_values"]]


def _c3_horizon_root(ctx):
    a1 = horizon_radius(1.0)
    ms = np.logspace(-1, 2, 20)
    trip_m = max(abs(mass_from_radius(horizon_radius(m)) - m) / m for m in ms)
    trip_a = max(abs(horizon_radius(mass_from_radius(horizon_radius(m)))
                     - horizon_radius(m)) for m in ms)
    return [
        _item("|a(m=1) - 1|", abs(a1 - 1.0), ctx.tol["root_residual"]),
        _item("|a^3 + a - 2| at m=1", abs(a1 ** 3 + a1 - 2.0),
              ctx.tol["root_residual"]),
        _item("max relative m->a->m error", trip_m, ctx.tol["round_trip"]),
        _item("max a->m->a error", trip_a, ctx.tol["round_trip"]),
    ]


def _slice_spectrum(ctx, a, ntheta, nphi, k):
    surf = slice_surface(ctx.profile(a), ctx.grid(ntheta, nphi), 0.0)
    return spectrum(assemble(surf), k)


def _convergence_item(label, e_coarse, e_fine, ctx):
    floor = ctx.tol["machine_floor"]
    if e_coarse < floor and e_fine < floor:
        return _item(label + " (both at machine floor)", max(e_coarse, e_fine),
                     floor)
    ratio = e_coarse / e_fine if e_fine > 0 else math.inf
    return _item(label, ratio, ctx.tol["convergence_ratio"], ">=")


def _c4_area_eigenvalue(ctx):
    items = []
    nt, npf = ctx.cfg["ntheta"], ctx.cfg["nphi"]
    for a in ctx.cfg["a_values"]:
        fine = _slice_spectrum(ctx, a, nt, npf, 3)
        coarse = _slice_spectrum(ctx, a, nt // 2, npf // 2, 3)
        lam1 = fine[0]
        ctx.lambdas[(float(a), nt, npf)] = lam1
        area = 2 * math.pi * ctx.profile(a).interpolate(0.0)[0] ** 2
        exact1, exact2 = 3 + 1 / a ** 2, 3 + 3 / a ** 2
        items.append(_item(f"|lambda1 - (3 + 1/a^2)| a={a!r}",
                           abs(lam1 - exact1), ctx.tol["lambda1"],
                           expected=exact1))
        items.append(_item(f"|A (lambda1 - 3)/2pi - 1| a={a!r}",
                           abs(area * (lam1 - 3) / (2 * math.pi) - 1),
                           ctx.tol["area_identity"]))
        items.append(_convergence_item(
            f"lambda1 error decrease on refinement a={a!r}",
            abs(coarse[0] - exact1), abs(lam1 - exact1), ctx))
        items.append(_convergence_item(
            f"lambda2 error decrease on refinement a={a!r}",
            abs(coarse[1] - exact2), abs(fine[1] - exact2), ctx))
    return items


def _c5_hemisphere(ctx):
    surf = slice_surface(ctx.profile(1.0), ctx.grid(), 0.0)
    asm = assemble(surf, AmbientCurvature(R=-6.0, ric_NN=0.0))
    ev = spectrum(asm, len(HEMISPHERE_SPECTRUM))
    err = float(np.max(np.abs(ev - np.array(HEMISPHERE_SPECTRUM))))
    return [_item("max |mu_k - l(l+1)| for the first six modes", err,
                  ctx.tol["hemisphere_spectrum"],
                  expected=HEMISPHERE_SPECTRUM)]


def _c6_mass(ctx):
    items = []
    grid = ctx.grid()
    T = ctx.cfg["mass_t_max"]
    ts = np.linspace(-T, T, ctx.cfg["mass_leaves"])
    for a in ctx.cfg["mass_a_values"]:
        p = ctx.profile(a)
        err = max(abs(modified_hawking_mass(slice_surface(p, grid, t)).mass
                      - p.params.m) for t in ts)
        items.append(_item(f"max_t |m(Sigma_t) - m| a={a!r}", err,
                           ctx.tol["mass_constancy"]))
    for a in ctx.cfg["a_values"]:
        rep = modified_hawking_mass(slice_surface(ctx.profile(a), grid, 0.0))
        items.append(_item(f"|minimal disk formula - m(horizon)| a={a!r}",
                           abs(minimal_disk_mass(rep.area) - rep.mass),
                           ctx.tol["minimal_disk"]))
    return items


def _c7_equality_clauses(ctx):
    items = []
    grid = ctx.grid()
    for a in ctx.cfg["a_values"]:
        surf = slice_surface(ctx.profile(a), grid, 0.0)
        geo = surface_geometry(surf)
        bd = boundary_data(surf, geo)
        amb = geo.model_ambient()
        lam1 = ctx.horizon_lambda(a)
        A = geo.area
        items += [
            _item(f"max |h|^2 a={a!r}", float(np.max(geo.normsq_h)),
                  ctx.tol["normsq_h"]),
            _item(f"max |Ric(N,N) + lambda1| a={a!r}",
                  float(np.max(np.abs(amb.ric_NN + lam1))),
                  ctx.tol["ricci_lambda"]),
            _item(f"max |K - 2pi/A| a={a!r}",
                  float(np.max(np.abs(geo.K - 2 * math.pi / A))),
                  ctx.tol["gauss_curvature"]),
            _item(f"max |k_g| a={a!r}", float(np.max(np.abs(bd.k_g))),
                  ctx.tol["geodesic_curvature"]),
            _item(f"max |contact angle - pi/2| a={a!r}",
                  float(np.max(np.abs(bd.contact_angle - math.pi / 2))),
                  ctx.tol["contact_angle"]),
            _item(f"|Gauss-Bonnet residual| a={a!r}",
                  abs(gauss_bonnet_residual(surf, geo)),
                  ctx.tol["gauss_bonnet"]),
        ]
    return items


def _c8_stability(ctx):
    rng = np.random.default_rng(ctx.cfg["seed"])
    a_s = rng.uniform(1.0, 5.0, ctx.cfg["stability_samples"])
    norm = red = 0.0
    for a in a_s:
        val = stability_inequality_value(3 + 1 / a ** 2, 2 * math.pi * a ** 2,
                                         mass_from_radius(a))
        norm = max(norm, abs(val.normalized))
        red = max(red, abs(val.reduced))
    return [_item("max |normalised stability RHS|", norm, ctx.tol["stability"]),
            _item("max |reduced stability form|", red, ctx.tol["stability"])]


def _c9_variation(ctx):
    cfg = ctx.cfg
    grid = ctx.grid()
    prof = ctx.profile(cfg["variation_a"])
    rng = np.random.default_rng(cfg["seed"] + 1)
    surf = slice_surface(prof, grid, 0.0)
    asm = assemble(surf)
    worst = 0.0
    for _ in range(cfg["variation_samples"]):
        phi = random_neumann_field(grid, rng, cfg["variation_max_degree"])
        fd, q = second_variation_area_check(surf, phi, cfg["fd_h"], asm)
        worst = max(worst, abs(fd - q) / abs(q))
    items = [_item("max relative |d^2A - Q(phi,phi)| over random phi", worst,
                   ctx.tol["second_variation"])]
    base = GraphSurface(prof, grid, cfg["variation_base_s0"],
                        cfg["variation_base_amplitude"] * legendre_field(grid, 2))
    fields = {"1": np.ones(grid.shape),
              "P2": legendre_field(grid, 2),
              "random": 1.0 + 0.3 * random_neumann_field(grid, rng, 4)}
    for label, phi in fields.items():
        fam = variation_family(base, phi, cfg["fd_h"])
        fd, _ = fd_derivative(lambda s: modified_hawking_mass(s).mass, fam)
        rhs = first_variation_mass_rhs(base, phi)
        items.append(_item(f"relative |dm/ds - formula| phi={label}",
                           abs(fd - rhs) / abs(rhs),
                           ctx.tol["mass_first_variation"]))
    return items


def _c10_foliation(ctx):
    items = []
    for a in ctx.cfg["foliation_a_values"]:
        trace = cmc_flow(a, ctx.cfg["eps"], ctx.cfg["flow_step"],
                         profile=ctx.profile(a))
        lam1 = ctx.horizon_lambda(a)
        u_exact = trace.profile.interpolate(trace.t_grid)[0]
        items += [
            _item(f"|H'(0) + lambda1| a={a!r}",
                  abs(h_prime_at_zero(trace) + lam1), ctx.tol["h_prime"]),
            _item(f"mean curvature sign pattern a={a!r}",
                  mean_curvature_sign_check(trace).passed, True, "=="),
            _item(f"max |u_t - u(t)| a={a!r}",
                  float(np.max(np.abs(trace.u_t - u_exact))),
                  ctx.tol["reconstruction"]),
            _item(f"max |a exp(-int H/2) - u(t)| a={a!r}",
                  float(np.max(np.abs(trace.u_exp - u_exact))),
                  ctx.tol["reconstruction"]),
            _item(f"normalisation clauses a={a!r}",
                  normalisation_check(trace).max_error(),
                  ctx.tol["normalisation"]),
        ]
        ctx.traces[float(a)] = trace
    return items


def _c11_lemma(ctx):
    a = ctx.cfg["foliation_a_values"][0]
    trace = ctx.traces.get(float(a))
    if trace is None:
        trace = cmc_flow(a, ctx.cfg["eps"], ctx.cfg["flow_step"],
                         profile=ctx.profile(a))
    grid = ctx.grid()
    worst = max(abs(lapse_identity_check(trace, t, grid=grid).residual)
                for t in ctx.cfg["lemma_t_values"])
    rho = 1.0 + ctx.cfg["lemma_rho_amplitude"] * legendre_field(grid, 2)
    synth = lapse_identity_check(trace, 0.0, rho, grid=grid)
    return [_item("max |LHS - RHS without theta| for rho = 1", worst,
                  ctx.tol["lemma_residual"]),
            _item("lapse-gradient term for rho = 1 + eps P2",
                  synth.lapse_gradient, 0.0, ">")]


CRITERIA = [
    (1, "scalar curvature", _c1_scalar_curvature),
    (2, "first integral", _c2_first_integral),
    (3, "horizon root", _c3_horizon_root),
    (4, "area-eigenvalue identity", _c4_area_eigenvalue),
    (5, "hemisphere Laplace spectrum", _c5_hemisphere),
    (6, "mass constancy", _c6_mass),
    (7, "horizon equality clauses", _c7_equality_clauses),
    (8, "stability inequality equality case", _c8_stability),
    (9, "variation formulas", _c9_variation),
    (10, "CMC foliation", _c10_foliation),
    (11, "lapse identity residual", _c11_lemma),
]


def _run_checks(cfg, only=None):
    ctx = _Context(cfg)
    entries = []
    for cid, name, fn in CRITERIA:
        if only is not None and cid not in only:
            continue
        t0 = time.perf_counter()
        entry = {"id": cid, "name": name}
        try:
            items = fn(ctx)
            entry["items"] = items
            entry["passed"] = all(it["passed"] for it in items)
        except Exception as exc:  # captured per check by design
            log.debug("criterion %s failed:\n%s", cid, traceback.format_exc())
            entry["items"] = []
            entry["passed"] = False
            entry["error"] = f"{type(exc).__name__}: {exc}"
        if cfg["record_timing"]:
            entry["wall_time"] = time.perf_counter() - t0
        entries.append(entry)
    return entries


def dumps_report(report: dict) -> str:
    return json.dumps(report, indent=2, sort_keys=False, allow_nan=True) + "\n"


def run_suite(config: dict | None = None, only=None) -> dict:
    """Run the acceptance criteria and return the report dictionary.

    ``only`` restricts the run to the given criterion ids (the determinism
    check then re-runs that subset).
    """
    cfg = resolve_config(config)
    entries = _run_checks(cfg, only)
    if cfg["determinism_check"] and (only is None or 12 in only):
        first = _strip_timing(entries)
        subset = None if only is None else [c for c in only if c != 12]
        second = _strip_timing(_run_checks(cfg, subset))
        h1 = hashlib.sha256(dumps_report({"c": first}).encode()).hexdigest()
        h2 = hashlib.sha256(dumps_report({"c": second}).encode()).hexdigest()
        entries.append({"id": 12, "name": "determinism",
                        "items": [_item("identical serialised checks on rerun",
                                        h1 == h2, True, "==")],
                        "digest": h1, "passed": h1 == h2})
    report = {
        "config": cfg,
        "checks": entries,
        "n_checks": len(entries),
        "n_passed": sum(e["passed"] for e in entries),
        "passed": all(e["passed"] for e in entries),
    }
    return report


def _strip_timing(entries):
    return [{k: v for k, v in e.items() if k != "wall_time"} for e in entries]


def summary_lines(report: dict):
    for e in report["checks"]:
        status = "PASS" if e["passed"] else "FAIL"
        detail = e.get("error")
        if detail is None:
            worst = [it for it in e["items"] if not it["passed"]]
            detail = (f"{len(e['items'])} items" if not worst
                      else f"failed: {worst[0]['label']} = {worst[0]['measured']!r}")
        yield f"[{status}] criterion {e['id']:>2} {e['name']}: {detail}"
