"""Command-line entry point: ``mk <command> [flags]``.

Exit status is 0 when every check of the selected suite passes, 1 when a
check fails and 2 for configuration errors.  Each run writes
``report.json`` (and any tables as CSV) into ``--out``.
"""
from __future__ import annotations

import argparse
import csv
import json
import os
import sys
import time
from dataclasses import fields
from pathlib import Path

from threadpoolctl import threadpool_limits

from . import __version__
from .errors import ConfigError, InsufficientSizes, ManifoldKineticsError
from .experiments import SUITES, TOLERANCES, CONVERGENCE_TARGETS, ExperimentOptions, run_suite
from .solver import SimulationConfig

EXIT_OK, EXIT_FAIL, EXIT_CONFIG = 0, 1, 2

#: keys accepted at the top level of a ``--config`` JSON file
CONFIG_KEYS = {"command", "chart", "chart_params", "grid", "sizes", "quad_order", "tau", "dt",
               "steps", "seed", "states", "target", "out", "threads", "simulation", "tolerances"}


def _grid(text: str) -> tuple:
    parts = text.lower().replace(",", "x").split("x")
    try:
        sizes = tuple(int(p) for p in parts if p)
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad grid {text!r}; use N or N1xN2") from None
    if len(sizes) == 1:
        sizes = sizes * 2
    if len(sizes) != 2 or min(sizes) < 1:
        raise argparse.ArgumentTypeError(f"bad grid {text!r}; use N or N1xN2")
    return sizes


def _sizes(text: str) -> tuple:
    try:
        return tuple(int(p) for p in text.split(",") if p.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad size list {text!r}; use e.g. 32,64,128") from None


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mk", description="Kinetic gas dynamics on parametrized surfaces: "
                               "verification suites and simulations.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, metavar="command")
    helps = {
        "verify-geometry": "Christoffel contraction identity, metric compatibility, geodesics",
        "verify-moments": "quadrature moments of the Maxwellian vs closed forms",
        "verify-ce": "Chapman-Enskog solvability and viscous-stress closure",
        "taylor-green": "macro Taylor-Green vortex decay",
        "shear-kinetic": "kinetic BGK shear-layer viscosity",
        "euler-sphere-band": "temperature transport by solid rotation on a sphere band",
        "convergence": "error-vs-grid table for one target",
        "conservation": "mass drift of the macro and kinetic solvers",
    }
    for name in SUITES:
        p = sub.add_parser(name, help=helps[name], description=helps[name])
        p.add_argument("--config", type=Path, help="JSON experiment file; flags override its keys")
        p.add_argument("--chart", help="chart name, e.g. flat, sphere, torus, monge:saddle")
        p.add_argument("--grid", type=_grid, help="grid size N or N1xN2")
        p.add_argument("--quad-order", type=int, dest="quad_order", help="Gauss-Hermite points per axis")
        p.add_argument("--tau", type=float, help="BGK relaxation time")
        p.add_argument("--dt", type=float, help="time step (default: from the CFL bound)")
        p.add_argument("--steps", type=int, help="number of time steps")
        p.add_argument("--out", type=Path, help="output directory (default results/<command>)")
        p.add_argument("--threads", type=int, help="BLAS/FFT thread cap (env MK_THREADS)")
        p.add_argument("--sizes", type=_sizes, help="comma-separated grid sizes for convergence")
        p.add_argument("--seed", type=int, help="seed for random test states")
        if name == "convergence":
            p.add_argument("--target", choices=CONVERGENCE_TARGETS, help="quantity to refine")
    return parser


def load_config(path: Path) -> dict:
    try:
        data = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    if not isinstance(data, dict):
        raise ConfigError("config must be a JSON object")
    unknown = set(data) - CONFIG_KEYS
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    sim = data.get("simulation", {})
    known_sim = {f.name for f in fields(SimulationConfig)}
    if not isinstance(sim, dict) or set(sim) - known_sim:
        raise ConfigError(f"unknown simulation keys: {sorted(set(sim) - known_sim)}")
    tol = data.get("tolerances", {})
    if not isinstance(tol, dict) or set(tol) - set(TOLERANCES):
        raise ConfigError(f"unknown tolerance keys: {sorted(set(tol) - set(TOLERANCES))}")
    return data


def resolve_options(args: argparse.Namespace) -> tuple:
    """Merge config file and flags into :class:`ExperimentOptions`; returns ``(opts, threads)``."""
    data = load_config(args.config) if args.config else {}
    if data.get("command", args.command) != args.command:
        raise ConfigError(f"config is for {data['command']!r}, not {args.command!r}")
    for key in ("chart", "grid", "quad_order", "tau", "dt", "steps", "out", "threads", "sizes",
                "seed", "target"):
        value = getattr(args, key, None)
        if value is not None:
            data[key] = value
    tolerances = dict(TOLERANCES)
    tolerances.update(data.get("tolerances", {}))
    opts = ExperimentOptions(
        chart=data.get("chart"),
        chart_params=dict(data.get("chart_params", {})),
        grid=tuple(data["grid"]) if data.get("grid") is not None else None,
        sizes=tuple(data["sizes"]) if data.get("sizes") is not None else None,
        quad_order=int(data.get("quad_order", 8)),
        tau=data.get("tau"),
        dt=data.get("dt"),
        steps=data.get("steps"),
        seed=int(data.get("seed", 0)),
        states=int(data.get("states", 100)),
        target=data.get("target"),
        out=Path(data.get("out") or Path("results") / args.command),
        simulation=dict(data.get("simulation", {})),
        tolerances=tolerances,
    )
    if opts.grid is not None and len(opts.grid) != 2:
        raise ConfigError("grid must have two sizes")
    threads = data.get("threads")
    if threads is None and os.environ.get("MK_THREADS"):
        try:
            threads = int(os.environ["MK_THREADS"])
        except ValueError:
            raise ConfigError("MK_THREADS must be an integer") from None
    if threads is not None and int(threads) < 1:
        raise ConfigError("threads must be >= 1")
    return opts, threads


def write_report(result, opts: ExperimentOptions, out: Path) -> Path:
    out.mkdir(parents=True, exist_ok=True)
    for name, rows in result.tables.items():
        if not rows:
            continue
        columns = list(rows[0])
        with open(out / f"{name}.csv", "w", newline="") as fh:
            w = csv.DictWriter(fh, fieldnames=columns)
            w.writeheader()
            w.writerows(rows)
    report = {
        "command": result.command,
        "pass": bool(result.passed),
        "checks": [c.to_dict() for c in result.checks],
        "tolerances": opts.tolerances,
        "tables": sorted(f"{name}.csv" for name, rows in result.tables.items() if rows),
    }
    path = out / "report.json"
    path.write_text(json.dumps(report, indent=2, sort_keys=True) + "\n")
    return path


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        opts, threads = resolve_options(args)
        start = time.perf_counter()
        with threadpool_limits(limits=threads):
            result = run_suite(args.command, opts)
        elapsed = time.perf_counter() - start
        report = write_report(result, opts, opts.out)
    except (ConfigError, InsufficientSizes) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ManifoldKineticsError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_FAIL
    for check in result.checks:
        print(check.summary())
    failed = [c.name for c in result.checks if not c.passed]
    status = "PASS" if not failed else f"FAIL ({len(failed)} of {len(result.checks)} checks)"
    print(f"{args.command}: {status} in {elapsed:.1f} s; report {report}")
    for name in failed:
        print(f"  failing invariant: {name}", file=sys.stderr)
    return EXIT_OK if not failed else EXIT_FAIL


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
