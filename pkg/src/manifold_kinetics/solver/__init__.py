"""Time integration: macroscopic Heun solver and kinetic BGK solver."""
from .config import (CFL_NUMBER, INITIAL_CONDITIONS, SOLVERS, SimulationConfig, cfl_limit,
                     check_cfl, initial_state, max_signal_speed, mode_shape)
from .interpolation import DepartureInterpolator, UniformShiftInterpolator, interpolate
from .io import DIAGNOSTIC_COLUMNS, read_snapshot, write_distribution, write_snapshot
from .kinetic import Streamer, angular_derivative, check_kinetic_cfl, kinetic_step, relaxation_interval
from .macro import advect_temperature, macro_step
from .run import RunResult, diagnostics, fit_decay_rate, resolve_dt, run

__all__ = [
    "CFL_NUMBER", "DIAGNOSTIC_COLUMNS", "DepartureInterpolator", "INITIAL_CONDITIONS",
    "RunResult", "SOLVERS", "SimulationConfig", "Streamer", "UniformShiftInterpolator",
    "advect_temperature", "angular_derivative", "cfl_limit", "check_cfl", "check_kinetic_cfl",
    "diagnostics", "fit_decay_rate", "initial_state", "interpolate", "kinetic_step",
    "macro_step", "max_signal_speed", "mode_shape", "read_snapshot", "resolve_dt", "run",
    "write_distribution", "write_snapshot",
]
