"""
Gauss-Hermite velocity quadrature in orthonormal frame coordinates.

Nodes come from the Golub-Welsch eigenvalue construction.  A
:class:`VelocityQuadrature` integrates against the normalized Maxwellian at
the reference temperature ``theta0 = k T0 / m``; :meth:`measure_weights`
turns those into weights for the plain measure ``d^2 c`` at any node
temperature, which is what distribution moments need.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np
from scipy.linalg import eigh_tridiagonal

from .errors import OrderOutOfRange, UnsupportedPolynomial

MAX_ORDER = 32

#: velocity polynomials accepted by :func:`moment`
POLYNOMIALS = ("1", "v", "|v|2", "vv", "|v|2v", "vvv")


def gauss_hermite(order: int):
    """Nodes and weights for ``int f(x) exp(-x^2) dx`` with ``order`` points.

    Golub-Welsch: the nodes are eigenvalues of the symmetric Jacobi matrix of
    the Hermite recurrence, the weights ``sqrt(pi)`` times the squared first
    eigenvector components.
    """
    if not (isinstance(order, (int, np.integer)) and 1 <= order <= MAX_ORDER):
        raise OrderOutOfRange(f"quadrature order must be in [1, {MAX_ORDER}], got {order!r}")
    if order == 1:
        return np.zeros(1), np.array([np.sqrt(np.pi)])
    off = np.sqrt(np.arange(1, order) / 2.0)
    x, vecs = eigh_tridiagonal(np.zeros(order), off)
    w = np.sqrt(np.pi) * vecs[0] ** 2
    # exact mirror symmetry
    x = 0.5 * (x - x[::-1])
    w = 0.5 * (w + w[::-1])
    return x, w


@dataclass(frozen=True)
class VelocityQuadrature:
    """Tensor-product Gauss-Hermite rule on the 2D tangent velocity space.

    ``nodes`` are frame velocities at ``reference_theta``; ``weights`` sum to
    one and integrate against the reference Maxwellian.
    """

    order: int = 8
    reference_theta: float = 1.0

    def __post_init__(self):
        gauss_hermite(self.order)  # range check
        if not self.reference_theta > 0:
            raise ValueError("reference_theta must be positive")

    @cached_property
    def _rule(self):
        x, w = gauss_hermite(self.order)
        X1, X2 = np.meshgrid(x, x, indexing="ij")
        W = np.outer(w, w) / np.pi
        return np.stack([X1.ravel(), X2.ravel()], axis=-1), W.ravel(), x, w

    @property
    def size(self) -> int:
        return self.order * self.order

    @property
    def standard_nodes(self) -> np.ndarray:
        """Nodes of the ``exp(-|x|^2)`` rule, shape ``(Q^2, 2)``."""
        return self._rule[0]

    @property
    def axis_nodes(self) -> np.ndarray:
        """1D standard nodes; node ``a = i1 * Q + i2`` is ``(axis_nodes[i1], axis_nodes[i2])``."""
        return self._rule[2]

    @property
    def weights(self) -> np.ndarray:
        return self._rule[1]

    @property
    def nodes(self) -> np.ndarray:
        return self.scaled_nodes(self.reference_theta)

    def scaled_nodes(self, theta) -> np.ndarray:
        """Frame velocities for node temperature ``theta`` (any shape ``S``) -> ``S + (Q^2, 2)``."""
        s = np.sqrt(2.0 * np.asarray(theta, dtype=float))
        return s[..., None, None] * self.standard_nodes

    def measure_weights(self, theta) -> np.ndarray:
        """Weights ``W_a`` with ``sum_a W_a f(c_a) ~ int f d^2c`` at node temperature ``theta``."""
        theta = np.asarray(theta, dtype=float)
        xi2 = np.sum(self.standard_nodes ** 2, axis=-1)
        return (2.0 * np.pi * theta)[..., None] * (self.weights * np.exp(xi2))

    @cached_property
    def differentiation_matrix(self) -> np.ndarray:
        """1D Lagrange differentiation matrix on the standard nodes, ``D[i, j] = l_j'(x_i)``."""
        x = self.axis_nodes
        n = len(x)
        diff = x[:, None] - x[None, :]
        np.fill_diagonal(diff, 1.0)
        bary = 1.0 / np.prod(diff, axis=1)
        D = (bary[None, :] / bary[:, None]) / diff
        np.fill_diagonal(D, 0.0)
        D[np.arange(n), np.arange(n)] = -D.sum(axis=1)
        return D


def frame_velocities(quad: VelocityQuadrature, theta) -> np.ndarray:
    return quad.scaled_nodes(theta)


def moment(f, quad: VelocityQuadrature, metric, poly: str, theta=None):
    """Velocity moment ``sum_a W_a f_a poly(v_a)`` at one grid point.

    ``f`` holds distribution values at the quadrature nodes (scaled to node
    temperature ``theta``, default the reference).  Velocities are mapped to
    contravariant components ``v^i = e^i_a c^a`` through the metric's frame and
    ``|v|^2 = g_ij v^i v^j``.  No particle mass is applied.
    """
    if poly not in POLYNOMIALS:
        raise UnsupportedPolynomial(f"{poly!r} not in {POLYNOMIALS}")
    theta = quad.reference_theta if theta is None else float(theta)
    f = np.asarray(f, dtype=float)
    c = quad.scaled_nodes(theta)
    W = quad.measure_weights(theta) * f
    v = c @ np.asarray(metric.frame).T
    speed2 = np.sum(c * c, axis=-1)
    if poly == "1":
        return W.sum()
    if poly == "v":
        return W @ v
    if poly == "|v|2":
        return W @ speed2
    if poly == "vv":
        return np.einsum("a,ai,aj->ij", W, v, v)
    if poly == "|v|2v":
        return np.einsum("a,a,ai->i", W, speed2, v)
    return np.einsum("a,ai,aj,ak->ijk", W, v, v, v)
