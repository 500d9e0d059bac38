"""Run driver: initial condition, time loop, diagnostics and snapshots."""
from __future__ import annotations

import json
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Optional

import numpy as np

from ..geometry import ChartGrid, covariant_div_vector
from ..kinetic import (DistributionField, ce_first_order, equilibrium, field_moments,
                       state_from_moments)
from ..quadrature import VelocityQuadrature
from ..state import FluidState
from .config import SimulationConfig, cfl_limit, check_cfl, initial_state, mode_shape
from .io import DiagnosticsWriter, write_distribution, write_snapshot
from .kinetic import Streamer, kinetic_step
from .macro import macro_step

KINETIC_DT_FRACTION = 0.25  # dt <= tau / 4 keeps the splitting error in nu below 1%
AUTO_DT_SAFETY = 0.8  # headroom below the initial CFL bound for flows that speed up


@dataclass
class RunResult:
    config: SimulationConfig
    grid: ChartGrid
    diagnostics: list
    state: FluidState
    distribution: Optional[DistributionField] = None

    def series(self, column: str) -> np.ndarray:
        return np.array([row[column] for row in self.diagnostics])


def diagnostics(state: FluidState, grid: ChartGrid, step: int, time: float,
                shape: Optional[np.ndarray] = None) -> dict:
    """Conserved totals, tracked-mode amplitude and the largest velocity divergence."""
    md = grid.metric
    rho = state.rho
    u_low = md.lower(state.u)
    mom = [grid.integrate(rho * u_low[..., i]) for i in range(2)]
    if shape is None:
        amp = float("nan")
    else:
        w = grid.cell_area
        amp = (np.sum(w * np.einsum("...i,...i->...", u_low, shape))
               / np.sum(w * np.einsum("...ij,...i,...j->...", md.g, shape, shape)))
    return {
        "step": int(step),
        "time": float(time),
        "M": grid.integrate(rho),
        "P1": mom[0],
        "P2": mom[1],
        "E": grid.integrate(state.energy_density(md)),
        "mode_amp": float(amp),
        "max_div": float(np.max(np.abs(covariant_div_vector(grid, state.u)))),
    }


def resolve_dt(cfg: SimulationConfig, state: FluidState, grid: ChartGrid) -> float:
    """Configured ``dt`` or, if unset, a fraction of the CFL bound (and ``tau / 4`` for kinetic runs)."""
    if cfg.dt is not None:
        return float(cfg.dt)
    dt = AUTO_DT_SAFETY * cfl_limit(state, grid)
    if cfg.solver == "kinetic-bgk":
        dt = min(dt, KINETIC_DT_FRACTION * cfg.tau)
    return dt


def _snapshot(out, step, state, grid, f=None):
    if out is None:
        return
    write_snapshot(out / f"snapshot_{step:06d}", {"rho": state.rho, "u": state.u, "T": state.T},
                   grid, {"step": step})
    if f is not None:
        write_distribution(out / f"distribution_{step:06d}", f)


def run(cfg: SimulationConfig, out_dir=None) -> RunResult:
    """Integrate ``cfg.steps`` steps; deterministic for a given config.

    With ``out_dir`` set, ``diagnostics.csv`` is streamed row by row (so an
    aborted run keeps its history), snapshots are written every
    ``snapshot_every`` steps plus at the end, and ``config.json`` records the
    resolved configuration.
    """
    grid = cfg.build_grid()
    state = initial_state(cfg, grid)
    cfg = replace(cfg, dt=resolve_dt(cfg, state, grid))
    check_cfl(cfg.dt, state, grid)
    shape = mode_shape(grid, cfg.initial)

    f = streamer = None
    if cfg.solver == "kinetic-bgk":
        quad = VelocityQuadrature(cfg.quad_order, cfg.theta0)
        f = equilibrium(state, grid, quad, cfg.tau, node_theta=cfg.theta0)
        if cfg.ce_init:
            f1 = ce_first_order(state, grid, quad, cfg.tau, node_theta=cfg.theta0,
                                energy=cfg.energy)
            f = f.with_values(f.values + f1.values)
        streamer = Streamer(grid, quad, cfg.theta0, cfg.dt)

    out = None if out_dir is None else Path(out_dir)
    writer = None
    if out is not None:
        out.mkdir(parents=True, exist_ok=True)
        (out / "config.json").write_text(json.dumps(cfg.to_dict(), indent=2, sort_keys=True))
        writer = DiagnosticsWriter(out / "diagnostics.csv")

    rows = []

    def record(step):
        row = diagnostics(state, grid, step, step * cfg.dt, shape)
        rows.append(row)
        if writer is not None:
            writer.write(row)

    try:
        record(0)
        for n in range(1, cfg.steps + 1):
            if f is not None:
                f = kinetic_step(f, grid, cfg, streamer, n)
                state = state_from_moments(field_moments(f, higher=False), grid, cfg.m, cfg.k)
            else:
                state = macro_step(state, grid, cfg, n)
            if n % cfg.output_every == 0 or n == cfg.steps:
                record(n)
            if cfg.snapshot_every and n % cfg.snapshot_every == 0:
                _snapshot(out, n, state, grid, f)
    finally:
        if writer is not None:
            writer.close()
    _snapshot(out, cfg.steps, state, grid, f)
    return RunResult(cfg, grid, rows, state, f)


def fit_decay_rate(t: np.ndarray, amp: np.ndarray, t_min: float = 0.0) -> float:
    """Least-squares slope of ``-log |amp|`` against ``t`` for ``t >= t_min``."""
    t = np.asarray(t, dtype=float)
    amp = np.asarray(amp, dtype=float)
    keep = t >= t_min
    return float(-np.polyfit(t[keep], np.log(np.abs(amp[keep])), 1)[0])
