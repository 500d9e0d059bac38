"""
Distribution functions, the manifold Maxwellian, BGK relaxation and the
first-order Chapman-Enskog correction.

Distributions are stored in orthonormal frame velocity coordinates ``c``
(``v^i = e^i_a c^a``) as densities per unit surface area per ``d^2 c``.  In
those variables the manifold Maxwellian is the ordinary flat one, the
``J`` prefactor of the coordinate-velocity form being absorbed by
``d^2 v = d^2 c / J``.  This density is also the quantity conserved along
geodesics, which is what the kinetic solver streams.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np

from .constitutive import euler_rates
from .errors import GridMismatch, InvalidState
from .geometry.grid import ChartGrid
from .quadrature import VelocityQuadrature
from .state import DIM, FluidState

__all__ = [
    "DistributionField", "FluidState", "Moments", "bgk_collide", "ce_first_order",
    "coordinate_maxwellian", "equilibrium", "field_moments", "maxwellian_values",
    "nodal_moments", "state_from_moments",
]


@dataclass(frozen=True)
class DistributionField:
    """Values ``f[i1, i2, a]`` at grid node ``(i1, i2)`` and velocity node ``a``.

    Velocity node ``a`` at grid node ``x`` sits at frame velocity
    ``sqrt(2 node_theta[x]) * xi_a`` with ``xi_a`` the standard Hermite nodes.
    """

    values: np.ndarray
    quad: VelocityQuadrature
    node_theta: np.ndarray
    grid: ChartGrid
    tau: Optional[float] = None
    m: float = 1.0

    def with_values(self, values) -> "DistributionField":
        return replace(self, values=values)

    def frame_nodes(self) -> np.ndarray:
        return self.quad.scaled_nodes(self.node_theta)

    def coordinate_velocities(self) -> np.ndarray:
        """Contravariant node velocities ``v^i``, shape ``grid + (Q^2, 2)``."""
        return np.einsum("...ia,...na->...ni", self.grid.metric.frame, self.frame_nodes())

    def moments(self) -> "Moments":
        return field_moments(self)


@dataclass(frozen=True)
class Moments:
    """Mass-weighted velocity moments of a distribution (contravariant)."""

    rho: np.ndarray
    momentum: np.ndarray
    energy: np.ndarray
    P: np.ndarray
    q: np.ndarray
    Q: np.ndarray = field(repr=False)


def _check_state(state: FluidState, grid: ChartGrid):
    try:
        state.validate(grid)
    except InvalidState:
        raise
    except Exception as exc:  # pragma: no cover - defensive
        raise InvalidState(str(exc)) from exc


def nodal_moments(values, quad: VelocityQuadrature, node_theta, metric, m: float = 1.0,
                  higher: bool = True) -> Moments:
    """Mass-weighted moments of nodal values ``values[..., a]`` at points described by ``metric``.

    Summation over velocity nodes is a fixed-order reduction, so repeated
    evaluations are bit-identical.
    """
    W = quad.measure_weights(node_theta) * values * m
    c = quad.scaled_nodes(node_theta)
    v = np.einsum("...ia,...na->...ni", metric.frame, c)
    speed2 = np.sum(c * c, axis=-1)
    rho = W.sum(axis=-1)
    momentum = np.einsum("...n,...ni->...i", W, v)
    energy = 0.5 * np.einsum("...n,...n->...", W, speed2)
    if not higher:
        return Moments(rho, momentum, energy, None, None, None)
    P = np.einsum("...n,...ni,...nj->...ij", W, v, v)
    q = 0.5 * np.einsum("...n,...n,...ni->...i", W, speed2, v)
    Q = np.einsum("...n,...ni,...nj,...nk->...ijk", W, v, v, v)
    return Moments(rho, momentum, energy, P, q, Q)


def field_moments(f: DistributionField, higher: bool = True) -> Moments:
    """All moments up to third order at every grid node."""
    return nodal_moments(f.values, f.quad, f.node_theta, f.grid.metric, f.m, higher)


def state_from_moments(mom: Moments, grid: ChartGrid, m: float = 1.0, k: float = 1.0) -> FluidState:
    """Invert ``(rho, rho u, rho E)`` to primitive variables."""
    rho = mom.rho
    u = mom.momentum / rho[..., None]
    u2 = grid.metric.norm2(u)
    theta = (2.0 * mom.energy / rho - u2) / DIM
    return FluidState(rho, u, theta * m / k, m, k)


def maxwellian_values(state: FluidState, metric, quad: VelocityQuadrature, node_theta) -> np.ndarray:
    """Frame-space Maxwellian ``(n / 2 pi theta) exp(-|c - u_hat|^2 / 2 theta)`` at the nodes.

    ``u_hat`` are the frame components of ``u``; node velocities are scaled to
    ``node_theta``.  Pointwise, so ``metric`` may describe any set of points.
    """
    theta = state.theta
    c = quad.scaled_nodes(node_theta)
    u_hat = np.einsum("...ai,...i->...a", metric.frame_inv, state.u)
    d2 = np.sum((c - u_hat[..., None, :]) ** 2, axis=-1)
    return (state.number_density / (2 * np.pi * theta))[..., None] * np.exp(-d2 / (2 * theta[..., None]))


def equilibrium(state: FluidState, grid: ChartGrid, quad: VelocityQuadrature,
                tau: Optional[float] = None, node_theta=None) -> DistributionField:
    """Local Maxwellian on a grid (see :func:`maxwellian_values`).

    By default nodes are scaled to the local temperature; pass ``node_theta``
    to pin them (the kinetic solver needs a fixed velocity set).
    """
    _check_state(state, grid)
    if node_theta is None:
        node_theta = state.theta
    node_theta = np.broadcast_to(np.asarray(node_theta, dtype=float), grid.shape).copy()
    values = maxwellian_values(state, grid.metric, quad, node_theta)
    return DistributionField(values, quad, node_theta, grid, tau, state.m)


def coordinate_maxwellian(state: FluidState, metric, v) -> np.ndarray:
    """Maxwellian as a density per coordinate velocity ``d^2 v``, including its ``J`` prefactor.

    ``v`` has shape ``S + (N, 2)``; ``metric`` and the state fields shape ``S``.
    """
    theta = state.theta[..., None]
    w = v - state.u[..., None, :]
    q = np.einsum("...ij,...ni,...nj->...n", metric.g, w, w)
    pref = state.number_density * metric.jacobian / (2 * np.pi * state.theta)
    return pref[..., None] * np.exp(-q / (2 * theta))


def bgk_collide(f: DistributionField, f0: DistributionField, dt: float) -> DistributionField:
    """Explicit relaxation step ``f + (dt / tau)(f0 - f)``."""
    if (f.values.shape != f0.values.shape or f.quad != f0.quad or f.grid is not f0.grid
            or not np.array_equal(f.node_theta, f0.node_theta)):
        raise GridMismatch("f and f0 must share grid, quadrature and node temperatures")
    if not dt > 0:
        raise ValueError("dt must be positive")
    if f.tau is None or not f.tau > 0:
        raise ValueError("distribution has no positive relaxation time tau")
    return f.with_values(f.values + (dt / f.tau) * (f0.values - f.values))


def ce_first_order(state: FluidState, grid: ChartGrid, quad: VelocityQuadrature, tau: float,
                   node_theta=None, energy: str = "kinetic") -> DistributionField:
    """First Chapman-Enskog correction ``f1 = -tau D1 f0`` on the manifold.

    The streaming operator acts on the coordinate-velocity Maxwellian as::

        D1 f = d_t f + v^i d_i f + Gamma^j_ji v^i f + d/dv^j (a^j f),
        a^j = -Gamma^j_ik v^i v^k

    where the last term carries the geodesic change of molecular velocity.
    ``d_t`` is eliminated through the Euler equations; spatial derivatives act
    through grid gradients of ``(rho, u, theta)`` and the pointwise metric
    derivatives.  Returned values are per ``d^2 c`` like :func:`equilibrium`.
    """
    f0 = equilibrium(state, grid, quad, tau, node_theta)
    md = grid.metric
    rho, u, theta = state.rho, state.u, state.theta

    d_rho = grid.gradient(rho)
    d_u = grid.gradient(u)
    d_theta = grid.gradient(theta)
    rho_t, u_t, theta_t = euler_rates(rho, u, theta, md, d_rho, d_u, d_theta, energy)

    v = f0.coordinate_velocities()
    w = v - u[..., None, :]
    gw = np.einsum("...ij,...nj->...ni", md.g, w)
    w2 = np.einsum("...ni,...ni->...n", gw, w)
    th = theta[..., None]

    # d_t log f at fixed v
    d_t = ((rho_t / rho - theta_t / theta)[..., None]
           + np.einsum("...ni,...i->...n", gw, u_t) / th
           + w2 * (theta_t / (2 * theta ** 2))[..., None])

    # d_i log f at fixed v, contracted with v^i
    dlogJ = md.dlog_jacobian
    scalar_i = d_rho / rho[..., None] - d_theta / theta[..., None] + dlogJ
    spatial = (np.einsum("...ni,...i->...n", v, scalar_i)
               - np.einsum("...ni,...ikl,...nk,...nl->...n", v, md.dg, w, w) / (2 * th)
               + np.einsum("...ni,...nl,...li->...n", v, gw, d_u) / th
               + w2 * np.einsum("...ni,...i->...n", v, d_theta) / (2 * th ** 2))

    gam = md.christoffel
    contracted = np.einsum("...jji->...i", gam)
    volume = np.einsum("...i,...ni->...n", contracted, v)

    # (1/f) d/dv^j (a^j f) = -2 Gamma^j_jk v^k + Gamma_ljk v^j v^k w^l / theta
    gam_low = np.einsum("...lm,...mjk->...ljk", md.g, gam)
    geodesic = (-2.0 * np.einsum("...k,...nk->...n", contracted, v)
                + np.einsum("...ljk,...nj,...nk,...nl->...n", gam_low, v, v, w) / th)

    values = -tau * f0.values * (d_t + spatial + volume + geodesic)
    return f0.with_values(values)
