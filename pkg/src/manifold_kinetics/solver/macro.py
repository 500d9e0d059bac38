"""Explicit Heun integration of the covariant Euler / Navier-Stokes equations."""
from __future__ import annotations

import numpy as np

from ..constitutive import closure_coefficient, euler_rhs, navier_stokes_rhs
from ..errors import ConfigError, NanDetected
from ..geometry import ChartGrid, covariant_div_vector
from ..state import FluidState
from .config import SimulationConfig, check_cfl


def _rates(state, grid, cfg):
    if cfg.solver == "euler":
        return euler_rhs(state, grid, cfg.energy)
    return navier_stokes_rhs(state, grid, cfg.tau, cfg.energy)


def _advance(state: FluidState, rates, dt: float) -> FluidState:
    return state.with_fields(rho=state.rho + dt * rates.rho,
                             u=state.u + dt * rates.u,
                             T=state.T + dt * rates.T)


def macro_step(state: FluidState, grid: ChartGrid, cfg: SimulationConfig,
               step_index: int = 0) -> FluidState:
    """One Heun (explicit trapezoid) step."""
    if not all(grid.periodic):
        raise ConfigError("macro solver supports periodic charts only")
    check_cfl(cfg.dt, state, grid)
    dt = cfg.dt
    k1 = _rates(state, grid, cfg)
    predictor = _advance(state, k1, dt)
    if not np.all(np.isfinite(predictor.rho)) or np.any(predictor.rho <= 0) \
            or np.any(predictor.T <= 0):
        raise NanDetected(step_index, f"predictor left the admissible set at step {step_index}")
    k2 = _rates(predictor, grid, cfg)
    new = state.with_fields(rho=state.rho + 0.5 * dt * (k1.rho + k2.rho),
                            u=state.u + 0.5 * dt * (k1.u + k2.u),
                            T=state.T + 0.5 * dt * (k1.T + k2.T))
    if not (np.all(np.isfinite(new.rho)) and np.all(np.isfinite(new.u))
            and np.all(np.isfinite(new.T))):
        raise NanDetected(step_index)
    return new


def advect_temperature(T: np.ndarray, u: np.ndarray, grid: ChartGrid, dt: float, steps: int,
                       energy: str = "kinetic") -> np.ndarray:
    """Heun-integrate only the temperature equation under a frozen velocity field."""
    coef = closure_coefficient(energy)
    div_u = covariant_div_vector(grid, u)

    def rate(T):
        return -np.einsum("...k,...k->...", u, grid.gradient(T)) + coef * T * div_u

    for _ in range(steps):
        k1 = rate(T)
        k2 = rate(T + dt * k1)
        T = T + 0.5 * dt * (k1 + k2)
    return T
