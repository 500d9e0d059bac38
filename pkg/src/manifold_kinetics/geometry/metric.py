"""
Pointwise metric quantities of a parametrized surface.

A :class:`SurfaceChart` maps chart coordinates ``(a1, a2)`` into R^3.  From it
we derive the induced metric ``g_ij``, its inverse, ``J = sqrt(det g)``, the
Christoffel symbols ``Gamma^i_jk`` and a lower-triangular orthonormal frame
``e^i_a`` with ``g^ij = sum_a e^i_a e^j_a``.

All routines are vectorized: coordinate arrays of any (common) shape ``S``
give fields of shape ``S + (2, 2)`` etc.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from ..errors import NonPositiveMetric

#: smallest det g accepted on a grid; degenerate parametrizations are rejected
DET_G_MIN = 1e-10

#: relative step for finite-difference metric derivatives
METRIC_STEP = 1e-5

Embedding = Callable[[np.ndarray, np.ndarray], tuple]
AnalyticMetric = Callable[[np.ndarray, np.ndarray], tuple]


@dataclass(frozen=True)
class SurfaceChart:
    """Parametrized embedding ``(a1, a2) -> (x, y, z)``.

    Parameters
    ----------
    name : str
        Identifier used in reports and snapshot headers.
    embedding : callable
        ``embedding(a1, a2) -> (x, y, z)``; must accept numpy arrays.  If it
        also accepts complex input, tangent vectors are computed by complex
        step and are exact to rounding.
    domain : ((a1_lo, a1_hi), (a2_lo, a2_hi))
    periodic : (bool, bool)
    analytic_metric : callable, optional
        ``analytic_metric(a1, a2) -> (g, dg)`` with ``g[..., i, j]`` and
        ``dg[..., k, i, j] = d g_ij / d a^k``.  Overrides the embedding for all
        metric quantities.
    """

    name: str
    embedding: Embedding
    domain: tuple
    periodic: tuple = (False, False)
    analytic_metric: Optional[AnalyticMetric] = None
    params: dict = field(default_factory=dict)

    @property
    def extent(self) -> np.ndarray:
        return np.array([hi - lo for lo, hi in self.domain], dtype=float)

    @property
    def lower(self) -> np.ndarray:
        return np.array([lo for lo, _ in self.domain], dtype=float)

    def wrap(self, a):
        """Map coordinates on periodic axes back into the domain."""
        a = np.array(a, dtype=float, copy=True)
        for k in range(2):
            if self.periodic[k]:
                lo = self.domain[k][0]
                a[..., k] = lo + np.mod(a[..., k] - lo, self.extent[k])
        return a

    def points(self, a1, a2) -> np.ndarray:
        x = self.embedding(np.asarray(a1), np.asarray(a2))
        return np.stack(np.broadcast_arrays(*x), axis=-1)

    def validate(self, samples: int = 9) -> None:
        """Sample the chart and check positivity and smoothness.

        Raises NonPositiveMetric on a degenerate metric; ValueError if the
        embedding's second differences are not finite/bounded.
        """
        t1 = np.linspace(*self.domain[0], samples)
        t2 = np.linspace(*self.domain[1], samples)
        a1, a2 = np.meshgrid(t1, t2, indexing="ij")
        md = metric_fields(self, a1, a2)
        _check_positive(md.g, md.det_g)
        h = 1e-3 * self.extent
        for k in range(2):
            da = np.zeros(2)
            da[k] = h[k]
            xp = self.points(a1 + da[0], a2 + da[1])
            x0 = self.points(a1, a2)
            xm = self.points(a1 - da[0], a2 - da[1])
            second = (xp - 2 * x0 + xm) / h[k] ** 2
            if not np.all(np.isfinite(second)):
                raise ValueError(f"chart {self.name!r}: embedding not twice differentiable")
            scale = 1.0 + np.max(np.abs(x0)) / max(self.extent.min(), 1e-300) ** 2
            if np.max(np.abs(second)) > 1e8 * scale:
                raise ValueError(f"chart {self.name!r}: unbounded second derivatives")


@dataclass(frozen=True)
class MetricData:
    """Metric quantities at one point or on an array of points.

    ``christoffel[..., i, j, k]`` is ``Gamma^i_jk``; ``frame[..., i, a]`` is the
    contravariant component ``i`` of orthonormal frame vector ``a``.
    ``dg[..., k, i, j]`` holds the metric derivatives the symbols came from.
    """

    g: np.ndarray
    g_inv: np.ndarray
    det_g: np.ndarray
    jacobian: np.ndarray
    christoffel: np.ndarray
    frame: np.ndarray
    dg: np.ndarray

    @property
    def frame_inv(self) -> np.ndarray:
        """Inverse frame mapping contravariant components to frame components."""
        e = self.frame
        det = e[..., 0, 0] * e[..., 1, 1] - e[..., 0, 1] * e[..., 1, 0]
        out = np.empty_like(e)
        out[..., 0, 0] = e[..., 1, 1] / det
        out[..., 1, 1] = e[..., 0, 0] / det
        out[..., 0, 1] = -e[..., 0, 1] / det
        out[..., 1, 0] = -e[..., 1, 0] / det
        return out

    @property
    def dlog_jacobian(self) -> np.ndarray:
        """``d_k log J = 1/2 g^ij d_k g_ij`` from the stored metric derivatives."""
        return 0.5 * np.einsum("...ij,...kij->...k", self.g_inv, self.dg)

    def lower(self, v: np.ndarray) -> np.ndarray:
        return np.einsum("...ij,...j->...i", self.g, v)

    def norm2(self, v: np.ndarray) -> np.ndarray:
        return np.einsum("...ij,...i,...j->...", self.g, v, v)


def _check_positive(g, det_g):
    bad = ~((det_g > 0) & (g[..., 0, 0] > 0))
    if np.any(bad):
        raise NonPositiveMetric(
            f"metric not positive definite at {int(bad.sum())} point(s); "
            f"min det g = {float(np.min(det_g)):.3e}"
        )


def _tangents(chart: SurfaceChart, a1, a2) -> np.ndarray:
    """Coordinate tangent vectors ``d x / d a^k``, shape ``S + (2, 3)``."""
    h_complex = 1e-20
    try:
        t = []
        for k in range(2):
            z1 = a1 + (1j * h_complex if k == 0 else 0)
            z2 = a2 + (1j * h_complex if k == 1 else 0)
            x = chart.points(z1, z2)
            if not np.iscomplexobj(x) or not np.any(x.imag):
                # constant direction is legitimate only if the real FD agrees
                raise TypeError
            t.append(x.imag / h_complex)
        return np.stack(t, axis=-2)
    except (TypeError, ValueError):
        pass
    h = METRIC_STEP * chart.extent
    t = []
    for k in range(2):
        d = np.zeros(2)
        d[k] = h[k]
        xp = chart.points(a1 + d[0], a2 + d[1])
        xm = chart.points(a1 - d[0], a2 - d[1])
        t.append((xp - xm) / (2 * h[k]))
    return np.stack(t, axis=-2)


def embedding_metric(chart: SurfaceChart, a1, a2) -> np.ndarray:
    """``g_ij = sum_l dx^l/da^i dx^l/da^j`` from the embedding alone."""
    t = _tangents(chart, np.asarray(a1, dtype=float), np.asarray(a2, dtype=float))
    return np.einsum("...il,...jl->...ij", t, t)


def metric_and_derivatives(chart: SurfaceChart, a1, a2):
    """Return ``(g, dg)``; central differences of step ``1e-5 * extent`` for dg."""
    a1 = np.asarray(a1, dtype=float)
    a2 = np.asarray(a2, dtype=float)
    if chart.analytic_metric is not None:
        g, dg = chart.analytic_metric(a1, a2)
        shape = np.broadcast(a1, a2).shape
        return (np.broadcast_to(g, shape + (2, 2)).copy(),
                np.broadcast_to(dg, shape + (2, 2, 2)).copy())
    g = embedding_metric(chart, a1, a2)
    h = METRIC_STEP * chart.extent
    dg = np.empty(g.shape[:-2] + (2, 2, 2))
    dg[..., 0, :, :] = (embedding_metric(chart, a1 + h[0], a2)
                        - embedding_metric(chart, a1 - h[0], a2)) / (2 * h[0])
    dg[..., 1, :, :] = (embedding_metric(chart, a1, a2 + h[1])
                        - embedding_metric(chart, a1, a2 - h[1])) / (2 * h[1])
    return g, dg


def christoffel_from(g_inv: np.ndarray, dg: np.ndarray) -> np.ndarray:
    """``Gamma^i_jk = 1/2 g^im (d_k g_mj + d_j g_mk - d_m g_jk)``."""
    # lowered symbols Gamma_mjk, symmetric in (j, k) by construction
    low = 0.5 * (np.einsum("...kmj->...mjk", dg)
                 + np.einsum("...jmk->...mjk", dg)
                 - dg)
    gam = np.einsum("...im,...mjk->...ijk", g_inv, low)
    return 0.5 * (gam + np.swapaxes(gam, -1, -2))


def cholesky_frame(g_inv: np.ndarray) -> np.ndarray:
    """Lower-triangular ``e`` with ``e e^T = g^-1``."""
    e = np.zeros_like(g_inv)
    e11 = np.sqrt(g_inv[..., 0, 0])
    e21 = g_inv[..., 1, 0] / e11
    e[..., 0, 0] = e11
    e[..., 1, 0] = e21
    e[..., 1, 1] = np.sqrt(g_inv[..., 1, 1] - e21 * e21)
    return e


def metric_fields(chart: SurfaceChart, a1, a2) -> MetricData:
    """Vectorized :func:`metric_at` over coordinate arrays."""
    g, dg = metric_and_derivatives(chart, a1, a2)
    g = 0.5 * (g + np.swapaxes(g, -1, -2))
    det_g = g[..., 0, 0] * g[..., 1, 1] - g[..., 0, 1] * g[..., 1, 0]
    _check_positive(g, det_g)
    g_inv = np.empty_like(g)
    g_inv[..., 0, 0] = g[..., 1, 1] / det_g
    g_inv[..., 1, 1] = g[..., 0, 0] / det_g
    g_inv[..., 0, 1] = g_inv[..., 1, 0] = -g[..., 0, 1] / det_g
    return MetricData(
        g=g,
        g_inv=g_inv,
        det_g=det_g,
        jacobian=np.sqrt(det_g),
        christoffel=christoffel_from(g_inv, dg),
        frame=cholesky_frame(g_inv),
        dg=dg,
    )


def metric_at(chart: SurfaceChart, a) -> MetricData:
    """Metric data at a single chart point ``a = (a1, a2)``."""
    a = np.asarray(a, dtype=float)
    return metric_fields(chart, a[..., 0], a[..., 1])
