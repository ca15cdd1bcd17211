"""Command line interface: thin adapters around the library modules.

Every subcommand accepts ``--config file.json``; keys in the file use the
flag names with dashes replaced by underscores, and explicit flags win.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from .errors import ConfigError, HadssError
from .foliation import cmc_flow, write_foliation_csv
from .geometry import GraphSurface, slice_surface, surface_geometry
from .grid import (build_grid, legendre_field, random_neumann_field,
                   real_harmonic)
from .jacobi import eigen_report
from .mass import mass_report, modified_hawking_mass
from .suite import dumps_report, run_suite, summary_lines
from .variation import (first_variation_area_rhs, first_variation_mass_rhs,
                        fd_derivative, second_variation_area_check,
                        variation_family, variation_row, write_variation_csv)
from .warp import (DEFAULT_S_MAX, DEFAULT_STEP, horizon_radius,
                   integrate_warp, write_profile_csv)

log = logging.getLogger("hadss_lab")

THREADS_ENV = "HADSS_LAB_THREADS"

COMMAND_DEFAULTS = {
    "warp": {"s_max": DEFAULT_S_MAX, "step": DEFAULT_STEP},
    "eigen": {"s0": 0.0, "ntheta": 64, "nphi": 128, "modes": 6,
              "s_max": DEFAULT_S_MAX, "step": DEFAULT_STEP},
    "mass": {"s0": 0.0, "ntheta": 64, "nphi": 128, "s_max": DEFAULT_S_MAX,
             "step": DEFAULT_STEP},
    "variation": {"s0": 0.0, "phi": "legendre:2", "fd_h": 1e-3, "ntheta": 64,
                  "nphi": 128, "base_amplitude": 0.0, "s_max": DEFAULT_S_MAX,
                  "step": DEFAULT_STEP},
    "foliate": {"eps": 0.5, "step": 1e-3, "s_max": DEFAULT_S_MAX,
                "warp_step": DEFAULT_STEP},
    "sweep": {"a_values": [1.0], "s0": 0.0, "resolutions": ["16x32", "32x64",
                                                           "64x128"],
              "modes": 6},
}


def _add_param(p):
    g = p.add_mutually_exclusive_group()
    g.add_argument("--a", type=float, help="horizon radius")
    g.add_argument("--m", type=float, help="mass parameter")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hadss-lab",
        description="Numerical checks in the half AdS-Schwarzschild model.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("warp", help="integrate the warping function")
    _add_param(p)
    p.add_argument("--s-max", type=float)
    p.add_argument("--step", type=float)

    p = sub.add_parser("eigen", help="Jacobi spectrum of a slice")
    _add_param(p)
    p.add_argument("--s0", type=float)
    p.add_argument("--ntheta", type=int)
    p.add_argument("--nphi", type=int)
    p.add_argument("--modes", type=int)

    p = sub.add_parser("mass", help="modified Hawking mass of a slice")
    _add_param(p)
    p.add_argument("--s0", type=float)
    p.add_argument("--ntheta", type=int)
    p.add_argument("--nphi", type=int)

    p = sub.add_parser("variation", help="check variation formulas")
    _add_param(p)
    p.add_argument("--s0", type=float)
    p.add_argument("--phi", help="const:C, legendre:L, harmonic:L,M or "
                                 "random:SEED")
    p.add_argument("--fd-h", type=float)
    p.add_argument("--base-amplitude", type=float,
                   help="amplitude of a P2 perturbation of the base slice")
    p.add_argument("--ntheta", type=int)
    p.add_argument("--nphi", type=int)

    p = sub.add_parser("foliate", help="trace the CMC foliation")
    _add_param(p)
    p.add_argument("--eps", type=float)
    p.add_argument("--step", type=float)

    p = sub.add_parser("verify", help="run the acceptance suite")
    p.add_argument("--ntheta", type=int)
    p.add_argument("--nphi", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--a-values", type=float, nargs="+")
    p.add_argument("--m-values", type=float, nargs="+")
    p.add_argument("--only", type=int, nargs="+",
                   help="run only these criterion ids")
    p.add_argument("--no-determinism", action="store_true",
                   help="skip the rerun comparison")
    p.add_argument("--timing", action="store_true",
                   help="record wall times (reports are then not byte-stable)")

    p = sub.add_parser("sweep", help="Jacobi spectra over a parameter grid")
    p.add_argument("--a-values", type=float, nargs="+")
    p.add_argument("--s0", type=float)
    p.add_argument("--resolutions", nargs="+", help="entries like 32x64")
    p.add_argument("--modes", type=int)
    p.add_argument("--workers", type=int)

    for p in sub.choices.values():
        p.add_argument("--config", help="JSON file with default parameters")
        p.add_argument("--out", help="output path (stdout if omitted)")
    return parser


def _load_config(path):
    if path is None:
        return {}
    try:
        with open(path) as fh:
            cfg = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    if not isinstance(cfg, dict):
        raise ConfigError("config file must hold a JSON object")
    return cfg


def _merge(args, command):
    """Defaults < config file < explicit flags."""
    params = dict(COMMAND_DEFAULTS.get(command, {}))
    params.update(_load_config(args.config))
    for key, value in vars(args).items():
        if key in ("config", "command", "verbose") or value is None:
            continue
        if value is False:
            continue
        params[key] = value
    if command != "sweep":
        a, m = params.get("a"), params.get("m")
        if args.a is not None:
            m = None
        elif args.m is not None:
            a = None
        if (a is None) == (m is None):
            raise ConfigError("give exactly one of --a and --m")
        params["a"] = float(a) if a is not None else horizon_radius(float(m))
        params.pop("m", None)
    return params


def _emit(text, out):
    if out is None:
        sys.stdout.write(text)
    else:
        with open(out, "w", newline="") as fh:
            fh.write(text)


def _profile(params, step_key="step"):
    return integrate_warp(params["a"], params["s_max"], params[step_key])


def cmd_warp(params):
    write_profile_csv(_profile(params), params.get("out") or sys.stdout)
    return 0


def cmd_eigen(params):
    grid = build_grid(params["ntheta"], params["nphi"])
    surf = slice_surface(_profile(params), grid, params["s0"])
    report = eigen_report(surf, params["modes"])
    _emit(json.dumps(report, indent=2) + "\n", params.get("out"))
    return 0


def cmd_mass(params):
    grid = build_grid(params["ntheta"], params["nphi"])
    surf = slice_surface(_profile(params), grid, params["s0"])
    _emit(json.dumps(mass_report(surf), indent=2) + "\n", params.get("out"))
    return 0


def parse_field(spec: str, grid):
    """Nodal field from ``const:C``, ``legendre:L``, ``harmonic:L,M`` or
    ``random:SEED``."""
    kind, _, arg = spec.partition(":")
    try:
        if kind == "const":
            return np.full(grid.shape, float(arg or 1.0))
        if kind == "legendre":
            return legendre_field(grid, int(arg))
        if kind == "harmonic":
            l, m = (int(x) for x in arg.split(","))
            return real_harmonic(grid, l, m)
        if kind == "random":
            rng = np.random.default_rng(int(arg or 0))
            return 1.0 + 0.3 * random_neumann_field(grid, rng, 4)
    except ValueError as exc:
        raise ConfigError(f"bad field specification {spec!r}: {exc}") from exc
    raise ConfigError(f"unknown field kind {kind!r}")


def cmd_variation(params):
    grid = build_grid(params["ntheta"], params["nphi"])
    prof = _profile(params)
    w = params["base_amplitude"] * legendre_field(grid, 2)
    base = GraphSurface(prof, grid, params["s0"], w)
    label = params["phi"]
    phi = parse_field(label, grid)
    h = params["fd_h"]
    fam = variation_family(base, phi, h)
    rows = []
    dA, _ = fd_derivative(lambda s: surface_geometry(s).area, fam)
    rows.append(variation_row("area_first", base, label, dA,
                              first_variation_area_rhs(base, phi)))
    dm, _ = fd_derivative(lambda s: modified_hawking_mass(s).mass, fam)
    rows.append(variation_row("mass_first", base, label, dm,
                              first_variation_mass_rhs(base, phi)))
    if np.max(np.abs(surface_geometry(base).H)) <= 1e-6:
        d2, q = second_variation_area_check(base, phi, h)
        rows.append(variation_row("area_second", base, label, d2, q))
    write_variation_csv(rows, params.get("out") or sys.stdout)
    return 0


def cmd_foliate(params):
    prof = integrate_warp(params["a"], max(params["s_max"], params["eps"]),
                          params["warp_step"])
    trace = cmc_flow(params["a"], params["eps"], params["step"], profile=prof)
    write_foliation_csv(trace, params.get("out") or sys.stdout)
    return 0


VERIFY_FLAG_KEYS = {"ntheta": "ntheta", "nphi": "nphi", "seed": "seed",
                    "a_values": "a_values", "m_values": "m_values"}


def cmd_verify(args):
    cfg = _load_config(args.config)
    for flag, key in VERIFY_FLAG_KEYS.items():
        value = getattr(args, flag)
        if value is not None:
            cfg[key] = value
    if args.m_values is not None:
        cfg.pop("a_values", None)
    elif args.a_values is not None:
        cfg.pop("m_values", None)
    if args.no_determinism:
        cfg["determinism_check"] = False
    if args.timing:
        cfg["record_timing"] = True
    report = run_suite(cfg, only=args.only)
    text = dumps_report(report)
    if args.out is None:
        sys.stdout.write(text)
    else:
        with open(args.out, "w") as fh:
            fh.write(text)
    for line in summary_lines(report):
        print(line, file=sys.stderr)
    return 0 if report["passed"] else 1


def _sweep_entry(job):
    a, s0, (nt, npf), modes = job
    grid = build_grid(nt, npf)
    surf = slice_surface(integrate_warp(a), grid, s0)
    return eigen_report(surf, modes)


def worker_count(requested=None, jobs=1):
    env = os.environ.get(THREADS_ENV)
    limit = os.cpu_count() or 1
    if env:
        try:
            limit = max(1, int(env))
        except ValueError as exc:
            raise ConfigError(f"{THREADS_ENV} must be an integer") from exc
    if requested is not None:
        limit = min(limit, max(1, int(requested)))
    return max(1, min(limit, jobs))


def _parse_resolution(text):
    if isinstance(text, (list, tuple)):
        return int(text[0]), int(text[1])
    try:
        nt, npf = str(text).lower().split("x")
        return int(nt), int(npf)
    except ValueError as exc:
        raise ConfigError(f"bad resolution {text!r}; use e.g. 32x64") from exc


def cmd_sweep(params):
    res = [_parse_resolution(r) for r in params["resolutions"]]
    jobs = [(float(a), float(params["s0"]), r, int(params["modes"]))
            for a in params["a_values"] for r in res]
    workers = worker_count(params.get("workers"), len(jobs))
    if workers == 1:
        results = [_sweep_entry(j) for j in jobs]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_sweep_entry, jobs))
    _emit(json.dumps({"entries": results}, indent=2) + "\n", params.get("out"))
    return 0


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.command == "verify":
            return cmd_verify(args)
        params = _merge(args, args.command)
        return {"warp": cmd_warp, "eigen": cmd_eigen, "mass": cmd_mass,
                "variation": cmd_variation, "foliate": cmd_foliate,
                "sweep": cmd_sweep}[args.command](params)
    except HadssError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
