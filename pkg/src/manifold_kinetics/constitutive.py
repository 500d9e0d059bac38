"""
Closed-form constitutive tensors and macroscopic right-hand sides.

Zeroth order (ideal gas, ``p = rho k T / m``)::

    P0^ij  = p g^ij + rho u^i u^j
    q0^i   = rho u^i [ (D + 2) kT / 2m + |u|^2 / 2 ]
    Q0^ijk = p (u^i g^jk + u^j g^ik + u^k g^ij) + rho u^i u^j u^k

First order viscous stress, covariant Newtonian form::

    P1^ij = -(tau p) [ g^lj u^i_{:l} + g^il u^j_{:l} ]

The evolution operators come in two flavours.  :func:`euler_rhs` and
:func:`navier_stokes_rhs` use conservative flux forms on a grid and drive
the macroscopic solver.  :func:`euler_rates` evaluates the same Euler
equations pointwise from given primitive gradients; the Chapman-Enskog
correction uses it so that the solvability constraints hold to rounding.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import ConfigError

from .geometry.grid import (ChartGrid, covariant_div_tensor2, covariant_div_vector,
                            covariant_grad_vector)
from .state import DIM, FluidState

#: temperature closures: coefficient of ``T u^k_{:k}`` in dT/dt + u.grad T
ENERGY_CLOSURES = {"kinetic": -2.0 / DIM, "printed": 1.0}


def closure_coefficient(energy: str) -> float:
    try:
        return ENERGY_CLOSURES[energy]
    except (KeyError, TypeError):
        raise ConfigError(f"unknown energy closure {energy!r}; "
                          f"choose from {sorted(ENERGY_CLOSURES)}") from None


@dataclass(frozen=True)
class ConstitutiveTensors:
    P0: np.ndarray
    q0: np.ndarray
    Q0: np.ndarray
    p: np.ndarray
    P1: Optional[np.ndarray] = None


@dataclass(frozen=True)
class Rates:
    """Time derivatives of the primitive fields."""

    rho: np.ndarray
    u: np.ndarray
    T: np.ndarray


def zeroth_order_tensors(rho, u, theta, g, g_inv):
    """Pointwise ``(P0, q0, Q0)`` for arrays of states and metrics (``theta = kT/m``)."""
    rho = np.asarray(rho, dtype=float)
    theta = np.asarray(theta, dtype=float)
    u = np.asarray(u, dtype=float)
    p = rho * theta
    P0 = p[..., None, None] * g_inv + rho[..., None, None] * np.einsum("...i,...j->...ij", u, u)
    u2 = np.einsum("...ij,...i,...j->...", g, u, u)
    q0 = (rho * (0.5 * (DIM + 2) * theta + 0.5 * u2))[..., None] * u
    sym = (np.einsum("...i,...jk->...ijk", u, g_inv)
           + np.einsum("...j,...ik->...ijk", u, g_inv)
           + np.einsum("...k,...ij->...ijk", u, g_inv))
    Q0 = p[..., None, None, None] * sym + \
        rho[..., None, None, None] * np.einsum("...i,...j,...k->...ijk", u, u, u)
    return P0, q0, Q0


def tensors0(state: FluidState, grid: ChartGrid) -> ConstitutiveTensors:
    state.validate(grid)
    md = grid.metric
    P0, q0, Q0 = zeroth_order_tensors(state.rho, state.u, state.theta, md.g, md.g_inv)
    return ConstitutiveTensors(P0=P0, q0=q0, Q0=Q0, p=state.pressure)


def viscous_stress1(state: FluidState, grid: ChartGrid, tau: float) -> np.ndarray:
    """Covariant Newtonian stress ``-(tau p)(g^lj u^i_{:l} + g^il u^j_{:l})``."""
    state.validate(grid)
    grad = covariant_grad_vector(grid, state.u)
    G = np.einsum("...il,...lj->...ij", grad, grid.metric.g_inv)
    eta = tau * state.pressure
    return -eta[..., None, None] * (G + np.swapaxes(G, -1, -2))


def euler_rates(rho, u, theta, metric, d_rho, d_u, d_theta, energy: str = "kinetic"):
    """Euler time derivatives from pointwise values and primitive gradients.

    ``d_u[..., i, k]`` is ``d_k u^i``.  Returns ``(rho_t, u_t, theta_t)``.  The
    pressure gradient is expanded as ``theta d rho + rho d theta`` so that the
    result is algebraically consistent with the moment integrals of the
    Maxwellian.
    """
    coef = closure_coefficient(energy)
    gam = metric.christoffel
    div_u = np.einsum("...ii->...", d_u) + np.einsum("...jji,...i->...", gam, u)
    rho_t = -np.einsum("...i,...i->...", u, d_rho) - rho * div_u
    grad_p = theta[..., None] * d_rho + rho[..., None] * d_theta
    u_t = (-np.einsum("...ij,...j->...i", metric.g_inv, grad_p) / rho[..., None]
           - np.einsum("...j,...ij->...i", u, d_u)
           - np.einsum("...ijk,...j,...k->...i", gam, u, u))
    theta_t = -np.einsum("...k,...k->...", u, d_theta) + coef * theta * div_u
    return rho_t, u_t, theta_t


def _macro_rhs(state: FluidState, grid: ChartGrid, tau: float, energy: str) -> Rates:
    state.validate(grid)
    coef = closure_coefficient(energy)
    rho, u, T = state.rho, state.u, state.T
    rho_t = -covariant_div_vector(grid, rho[..., None] * u)
    P = tensors0(state, grid).P0
    if tau != 0.0:
        P = P + viscous_stress1(state, grid, tau)
    mom_t = -covariant_div_tensor2(grid, P)
    u_t = (mom_t - u * rho_t[..., None]) / rho[..., None]
    div_u = covariant_div_vector(grid, u)
    T_t = -np.einsum("...k,...k->...", u, grid.gradient(T)) + coef * T * div_u
    return Rates(rho=rho_t, u=u_t, T=T_t)


def euler_rhs(state: FluidState, grid: ChartGrid, energy: str = "kinetic") -> Rates:
    """Covariant Euler equations (continuity, momentum, temperature) in flux form."""
    return _macro_rhs(state, grid, 0.0, energy)


def navier_stokes_rhs(state: FluidState, grid: ChartGrid, tau: float,
                      energy: str = "kinetic") -> Rates:
    """Euler plus the covariant viscous stress; the temperature equation stays Euler-order."""
    return _macro_rhs(state, grid, float(tau), energy)
