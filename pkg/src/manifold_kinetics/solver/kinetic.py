"""Kinetic BGK solver: geodesic semi-Lagrangian streaming with Strang-split collisions."""
from __future__ import annotations

import numpy as np

from ..errors import InterpolationOutOfDomain, NanDetected
from ..geometry import ChartGrid, geodesic_step, metric_fields
from ..kinetic import DistributionField, bgk_collide, equilibrium, field_moments, state_from_moments
from ..quadrature import VelocityQuadrature
from .config import SimulationConfig, check_cfl
from .interpolation import DepartureInterpolator, UniformShiftInterpolator


def angular_derivative(quad: VelocityQuadrature, values: np.ndarray) -> np.ndarray:
    """``(c_x d/dc_y - c_y d/dc_x) f`` at the nodes via the Hermite-polynomial representation.

    ``f`` is written as ``exp(-|xi|^2) p(xi)`` with ``p`` the tensor Lagrange
    interpolant through the nodes; the Gaussian factor is rotation invariant.
    """
    Q = quad.order
    xi = quad.axis_nodes
    D = quad.differentiation_matrix
    gauss = np.exp(-np.sum(quad.standard_nodes ** 2, axis=-1))
    p = (values / gauss).reshape(values.shape[:-1] + (Q, Q))
    dp_dy = np.einsum("jl,...il->...ij", D, p)
    dp_dx = np.einsum("il,...lj->...ij", D, p)
    Lp = xi[:, None] * dp_dy - xi[None, :] * dp_dx
    return Lp.reshape(values.shape) * gauss


class Streamer:
    """Precomputed streaming operator for one grid, velocity set and time step.

    For each arrival node and velocity node the geodesic is integrated back by
    ``dt``; the distribution is interpolated at the departure point and the
    departure velocity, re-expressed in the departure frame, differs from the
    node velocity by a rotation.  That rotation is applied in two halves
    around the spatial transport.
    """

    def __init__(self, grid: ChartGrid, quad: VelocityQuadrature, node_theta: float, dt: float):
        if not all(grid.periodic):
            raise InterpolationOutOfDomain(
                "kinetic streaming needs periodic axes; characteristics would leave the chart")
        self.grid = grid
        self.quad = quad
        self.dt = float(dt)
        md = grid.metric
        c = quad.scaled_nodes(node_theta)
        v = np.einsum("...ia,na->...ni", md.frame, c)
        h = np.array(grid.spacing)
        flat_geometry = (not np.any(md.christoffel)
                         and np.all(md.frame == md.frame[:1, :1]))
        if flat_geometry:
            shift = -self.dt * v[0, 0] / h
            self.transport = UniformShiftInterpolator(grid.shape, shift[:, 0], shift[:, 1])
            self.half_angle = None
            return
        a = np.stack(np.broadcast_arrays(grid.a1[..., None], grid.a2[..., None]), axis=-1)
        a = np.broadcast_to(a, v.shape)
        a_dep, v_back = geodesic_step(grid.chart, a, -v, self.dt)
        v_dep = -v_back
        md_dep = metric_fields(grid.chart, *np.moveaxis(grid.chart.wrap(a_dep), -1, 0))
        c_dep = np.einsum("...ai,...i->...a", md_dep.frame_inv, v_dep)
        c_node = np.broadcast_to(c, c_dep.shape)
        cross = c_node[..., 0] * c_dep[..., 1] - c_node[..., 1] * c_dep[..., 0]
        dot = np.sum(c_node * c_dep, axis=-1)
        self.half_angle = 0.5 * np.arctan2(cross, dot)
        lo = grid.chart.lower
        s = (a_dep - lo) / h
        self.transport = DepartureInterpolator(s[..., 0], s[..., 1])

    def _rotate(self, values: np.ndarray) -> np.ndarray:
        phi = self.half_angle
        Lf = angular_derivative(self.quad, values)
        LLf = angular_derivative(self.quad, Lf)
        return values + phi * Lf + 0.5 * phi * phi * LLf

    def __call__(self, values: np.ndarray) -> np.ndarray:
        if self.half_angle is None:
            return self.transport(values)
        return self._rotate(self.transport(self._rotate(values)))


def relaxation_interval(dt: float, tau: float) -> float:
    """Interval ``tau (1 - exp(-dt / tau))`` for which the explicit BGK update is exact."""
    return -tau * np.expm1(-dt / tau)


def _relax(f: DistributionField, dt: float) -> DistributionField:
    state = state_from_moments(field_moments(f, higher=False), f.grid, f.m)
    f0 = equilibrium(state, f.grid, f.quad, f.tau, node_theta=f.node_theta)
    return bgk_collide(f, f0, relaxation_interval(dt, f.tau))


def kinetic_step(f: DistributionField, grid: ChartGrid, cfg: SimulationConfig,
                 streamer: Streamer = None, step_index: int = 0) -> DistributionField:
    """Half collision, geodesic streaming, half collision.

    Each half collision integrates the relaxation ``df/dt = -(f - f0)/tau``
    exactly (``f0`` is fixed during collisions because they conserve its
    moments), by calling :func:`bgk_collide` with the matching interval.
    """
    dt = cfg.dt
    if not dt <= f.tau:
        raise ValueError(f"kinetic step needs dt <= tau (dt={dt}, tau={f.tau})")
    if streamer is None:
        theta_ref = float(np.unique(f.node_theta)[0])
        streamer = Streamer(grid, f.quad, theta_ref, dt)
    _check_finite(f, step_index)
    f = _relax(f, 0.5 * dt)
    f = f.with_values(streamer(f.values))
    _check_finite(f, step_index)
    f = _relax(f, 0.5 * dt)
    _check_finite(f, step_index)
    return f


def _check_finite(f: DistributionField, step_index: int) -> None:
    if not np.all(np.isfinite(f.values)):
        raise NanDetected(step_index)


def check_kinetic_cfl(f: DistributionField, cfg: SimulationConfig) -> None:
    state = state_from_moments(field_moments(f, higher=False), f.grid, f.m)
    check_cfl(cfg.dt, state, f.grid)
