"""Simulation configuration, initial conditions and the CFL bound."""
from __future__ import annotations

from dataclasses import asdict, dataclass, field, fields
from typing import Optional

import numpy as np

from ..constitutive import closure_coefficient
from ..errors import CflViolation, ConfigError
from ..geometry import ChartGrid, chart_from_name
from ..state import FluidState

SOLVERS = ("euler", "navier-stokes", "kinetic-bgk")
INITIAL_CONDITIONS = ("uniform", "taylor-green", "shear-layer", "temperature-bump", "rotation")
CFL_NUMBER = 0.4


@dataclass
class SimulationConfig:
    chart: str = "flat"
    chart_params: dict = field(default_factory=dict)
    grid: tuple = (64, 64)
    dt: Optional[float] = None
    steps: int = 100
    tau: float = 0.02
    quad_order: int = 8
    solver: str = "navier-stokes"
    initial: str = "taylor-green"
    output_every: int = 1
    snapshot_every: int = 0
    amplitude: float = 0.05
    rho0: float = 1.0
    theta0: float = 1.0 / 3.0
    m: float = 1.0
    k: float = 1.0
    energy: str = "kinetic"
    ce_init: bool = True

    def __post_init__(self):
        self.grid = tuple(int(n) for n in self.grid)
        if len(self.grid) != 2:
            raise ConfigError("grid must have two sizes")
        if self.solver not in SOLVERS:
            raise ConfigError(f"solver must be one of {SOLVERS}, got {self.solver!r}")
        if self.initial not in INITIAL_CONDITIONS:
            raise ConfigError(f"initial must be one of {INITIAL_CONDITIONS}, got {self.initial!r}")
        if self.steps < 0 or self.output_every < 1:
            raise ConfigError("steps must be >= 0 and output_every >= 1")
        if self.tau < 0 or (self.solver == "kinetic-bgk" and self.tau == 0):
            raise ConfigError("tau must be positive for kinetic runs and >= 0 otherwise")
        if self.theta0 <= 0 or self.rho0 <= 0:
            raise ConfigError("rho0 and theta0 must be positive")
        closure_coefficient(self.energy)

    @classmethod
    def from_dict(cls, data: dict) -> "SimulationConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ConfigError(f"unknown simulation keys: {sorted(unknown)}")
        return cls(**data)

    def to_dict(self) -> dict:
        out = asdict(self)
        out["grid"] = list(self.grid)
        return out

    def build_grid(self) -> ChartGrid:
        return ChartGrid(chart_from_name(self.chart, **self.chart_params), *self.grid)


def _phases(grid: ChartGrid):
    lo = grid.chart.lower
    L = grid.chart.extent
    return (2 * np.pi * (grid.a1 - lo[0]) / L[0], 2 * np.pi * (grid.a2 - lo[1]) / L[1],
            2 * np.pi / L)


def mode_shape(grid: ChartGrid, initial: str) -> Optional[np.ndarray]:
    """Unit-amplitude velocity pattern tracked in diagnostics (None if untracked)."""
    x1, x2, _ = _phases(grid)
    if initial == "taylor-green":
        return np.stack([np.sin(x1) * np.cos(x2), -np.cos(x1) * np.sin(x2)], axis=-1)
    if initial == "shear-layer":
        return np.stack([np.zeros_like(x1), np.sin(x1)], axis=-1)
    if initial == "rotation":
        return np.stack([np.zeros_like(x1), np.ones_like(x1)], axis=-1)
    return None


def initial_state(cfg: SimulationConfig, grid: ChartGrid) -> FluidState:
    """Build the configured initial condition (deterministic)."""
    A = cfg.amplitude
    T0 = cfg.theta0 * cfg.m / cfg.k
    rho = np.full(grid.shape, cfg.rho0)
    T = np.full(grid.shape, T0)
    u = np.zeros(grid.shape + (2,))
    x1, x2, _ = _phases(grid)
    if cfg.initial in ("taylor-green", "shear-layer", "rotation"):
        u = A * mode_shape(grid, cfg.initial)
    if cfg.initial == "taylor-green":
        # incompressible pressure p = p0 + rho A^2 (cos 2x1 + cos 2x2) / 4, carried by T
        dp = cfg.rho0 * A * A * (np.cos(2 * x1) + np.cos(2 * x2)) / 4.0
        T = T + dp / cfg.rho0 * cfg.m / cfg.k
    elif cfg.initial == "temperature-bump":
        c1 = np.cos(x1 - np.pi)
        c2 = np.cos(x2 - np.pi)
        T = T0 * (1.0 + A * np.exp(2.0 * (c1 + c2 - 2.0)))
    return FluidState(rho, u, T, cfg.m, cfg.k).validate(grid)


def max_signal_speed(state: FluidState, grid: ChartGrid) -> float:
    """``|u|_max + 3 sqrt(kT/m)_max`` in physical units."""
    speed = np.sqrt(grid.metric.norm2(state.u))
    return float(np.max(speed) + 3.0 * np.sqrt(np.max(state.theta)))


def cfl_limit(state: FluidState, grid: ChartGrid) -> float:
    return CFL_NUMBER * grid.physical_spacing / max_signal_speed(state, grid)


def check_cfl(dt: float, state: FluidState, grid: ChartGrid) -> None:
    limit = cfl_limit(state, grid)
    if not 0 < dt <= limit * (1 + 1e-12):
        raise CflViolation(f"dt = {dt:.4g} exceeds CFL bound {limit:.4g}")
