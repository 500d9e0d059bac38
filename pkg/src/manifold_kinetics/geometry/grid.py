"""Uniform chart grids and covariant finite-difference operators.

Field arrays carry the two grid axes first: a scalar field has shape
``(n1, n2)``, a contravariant vector ``(n1, n2, 2)``, a rank-2 tensor
``(n1, n2, 2, 2)``.  Derivative indices are appended last.
"""
from __future__ import annotations

from functools import cached_property

import numpy as np

from ..errors import BoundaryUnderflow, NonPositiveMetric, ShapeMismatch
from .metric import DET_G_MIN, MetricData, SurfaceChart, metric_fields


class ChartGrid:
    """``n1 x n2`` uniform nodes on a chart with cached metric data.

    Periodic axes hold ``n`` nodes with spacing ``L/n`` (the end point is the
    image of the first); non-periodic axes include both end points.
    """

    def __init__(self, chart: SurfaceChart, n1: int, n2: int):
        self.chart = chart
        self.shape = (int(n1), int(n2))
        axes, spacing = [], []
        for k, n in enumerate(self.shape):
            lo, hi = chart.domain[k]
            if chart.periodic[k]:
                if n < 3:
                    raise BoundaryUnderflow(f"axis {k}: need >= 3 periodic nodes")
                h = (hi - lo) / n
                axes.append(lo + h * np.arange(n))
            else:
                if n < 3:
                    raise BoundaryUnderflow(
                        f"axis {k}: one-sided second-order stencil needs >= 3 nodes")
                h = (hi - lo) / (n - 1)
                axes.append(np.linspace(lo, hi, n))
            spacing.append(h)
        self.axes = tuple(axes)
        self.spacing = tuple(spacing)
        self.a1, self.a2 = np.meshgrid(*axes, indexing="ij")
        self.metric: MetricData = metric_fields(chart, self.a1, self.a2)
        if np.min(self.metric.det_g) < DET_G_MIN:
            raise NonPositiveMetric(
                f"grid on {chart.name!r} touches a degenerate point "
                f"(min det g = {np.min(self.metric.det_g):.3e})")

    def __repr__(self):
        return f"ChartGrid({self.chart.name!r}, {self.shape[0]}x{self.shape[1]})"

    @property
    def periodic(self):
        return self.chart.periodic

    @property
    def cell_area(self) -> np.ndarray:
        """Quadrature weights ``J h1 h2`` (trapezoid ends on open axes)."""
        w = self.metric.jacobian * self.spacing[0] * self.spacing[1]
        for k in range(2):
            if not self.periodic[k]:
                edge = [slice(None)] * 2
                edge[k] = [0, -1]
                w = w.copy()
                w[tuple(edge)] *= 0.5
        return w

    @cached_property
    def physical_spacing(self) -> float:
        """Smallest physical node separation ``h_k sqrt(g_kk)``."""
        g = self.metric.g
        return float(min(np.min(self.spacing[0] * np.sqrt(g[..., 0, 0])),
                         np.min(self.spacing[1] * np.sqrt(g[..., 1, 1]))))

    def check(self, field: np.ndarray, rank: int = 0) -> np.ndarray:
        field = np.asarray(field, dtype=float)
        expect = self.shape + (2,) * rank
        if field.shape[:2] != self.shape or field.shape[2:2 + rank] != (2,) * rank:
            raise ShapeMismatch(f"field shape {field.shape} does not match grid {expect}")
        return field

    def partial(self, field: np.ndarray, axis: int) -> np.ndarray:
        """Second-order central difference along a grid axis."""
        h = self.spacing[axis]
        if self.periodic[axis]:
            return (np.roll(field, -1, axis=axis) - np.roll(field, 1, axis=axis)) / (2 * h)
        return np.gradient(field, h, axis=axis, edge_order=2)

    def gradient(self, field: np.ndarray) -> np.ndarray:
        """Partial derivatives of any field, derivative index appended last."""
        field = np.asarray(field, dtype=float)
        if field.shape[:2] != self.shape:
            raise ShapeMismatch(f"field shape {field.shape} does not match grid {self.shape}")
        return np.stack([self.partial(field, 0), self.partial(field, 1)], axis=-1)

    def integrate(self, field: np.ndarray) -> float:
        """Surface integral of a scalar density, ``sum field * J h1 h2``."""
        return float(np.sum(field * self.cell_area))


def covariant_div_vector(grid: ChartGrid, v: np.ndarray, form: str = "conservative") -> np.ndarray:
    """``v^i_{:i}`` of a contravariant vector field.

    ``form="conservative"`` evaluates ``(1/J) d_i (J v^i)``, which telescopes on
    periodic grids; ``form="christoffel"`` evaluates ``d_i v^i + Gamma^j_ji v^i``.
    """
    v = grid.check(v, rank=1)
    md = grid.metric
    if form == "conservative":
        J = md.jacobian
        return (grid.partial(J * v[..., 0], 0) + grid.partial(J * v[..., 1], 1)) / J
    if form == "christoffel":
        contracted = np.einsum("...jji->...i", md.christoffel)
        return grid.partial(v[..., 0], 0) + grid.partial(v[..., 1], 1) + \
            np.einsum("...i,...i->...", contracted, v)
    raise ValueError(f"unknown form {form!r}")


def covariant_div_tensor2(grid: ChartGrid, P: np.ndarray, form: str = "conservative") -> np.ndarray:
    """``P^ij_{:i} = d_i P^ij + Gamma^i_ik P^kj + Gamma^j_ik P^ik``.

    The conservative form folds the first two terms into ``(1/J) d_i (J P^ij)``.
    """
    P = grid.check(P, rank=2)
    md = grid.metric
    gam = md.christoffel
    geodesic = np.einsum("...jik,...ik->...j", gam, P)
    if form == "conservative":
        J = md.jacobian[..., None]
        flux = (grid.partial(J * P[..., 0, :], 0) + grid.partial(J * P[..., 1, :], 1)) / J
        return flux + geodesic
    if form == "christoffel":
        contracted = np.einsum("...iik->...k", gam)
        return (grid.partial(P[..., 0, :], 0) + grid.partial(P[..., 1, :], 1)
                + np.einsum("...k,...kj->...j", contracted, P) + geodesic)
    raise ValueError(f"unknown form {form!r}")


def covariant_grad_vector(grid: ChartGrid, u: np.ndarray) -> np.ndarray:
    """Mixed tensor ``u^i_{:j} = d_j u^i + Gamma^i_jk u^k``, indexed ``[..., i, j]``."""
    u = grid.check(u, rank=1)
    return grid.gradient(u) + np.einsum("...ijk,...k->...ij", grid.metric.christoffel, u)
