"""Geodesic flow ``d a^i/dt = v^i``, ``d v^j/dt = -Gamma^j_ik v^i v^k``."""
from __future__ import annotations

import numpy as np

from .metric import SurfaceChart, metric_at


def _rhs(chart: SurfaceChart, a, v):
    gam = metric_at(chart, chart.wrap(a)).christoffel
    return v, -np.einsum("...jik,...i,...k->...j", gam, v, v)


def geodesic_step(chart: SurfaceChart, a, v, dt: float):
    """One classical RK4 step of the geodesic equations.

    ``a`` and ``v`` may be single points (shape ``(2,)``) or batches
    (``(..., 2)``).  Positions are returned unwrapped so trajectories stay
    continuous; use ``chart.wrap`` to fold them back into the domain.
    """
    if not dt > 0:
        raise ValueError("dt must be positive")
    a = np.asarray(a, dtype=float)
    v = np.asarray(v, dtype=float)
    k1a, k1v = _rhs(chart, a, v)
    k2a, k2v = _rhs(chart, a + 0.5 * dt * k1a, v + 0.5 * dt * k1v)
    k3a, k3v = _rhs(chart, a + 0.5 * dt * k2a, v + 0.5 * dt * k2v)
    k4a, k4v = _rhs(chart, a + dt * k3a, v + dt * k3v)
    a_new = a + dt / 6.0 * (k1a + 2 * k2a + 2 * k3a + k4a)
    v_new = v + dt / 6.0 * (k1v + 2 * k2v + 2 * k3v + k4v)
    return a_new, v_new


def integrate_geodesic(chart: SurfaceChart, a, v, dt: float, steps: int):
    """Trajectory of ``steps`` RK4 steps; returns arrays of shape ``(steps + 1, ..., 2)``."""
    path_a = [np.asarray(a, dtype=float)]
    path_v = [np.asarray(v, dtype=float)]
    for _ in range(steps):
        a, v = geodesic_step(chart, a, v, dt)
        path_a.append(a)
        path_v.append(v)
    return np.stack(path_a), np.stack(path_v)
