"""Macroscopic fluid state on a chart grid."""
from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .errors import InvalidState

#: spatial (and velocity-space) dimension
DIM = 2


@dataclass(frozen=True)
class FluidState:
    """Density ``rho``, contravariant velocity ``u^i`` and temperature ``T``.

    ``m`` is the particle mass and ``k`` Boltzmann's constant; ``theta = kT/m``
    is the squared thermal speed.
    """

    rho: np.ndarray
    u: np.ndarray
    T: np.ndarray
    m: float = 1.0
    k: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "rho", np.asarray(self.rho, dtype=float))
        object.__setattr__(self, "u", np.asarray(self.u, dtype=float))
        object.__setattr__(self, "T", np.asarray(self.T, dtype=float))

    def validate(self, grid=None) -> "FluidState":
        shape = self.rho.shape
        if self.T.shape != shape or self.u.shape != shape + (DIM,):
            raise InvalidState(
                f"inconsistent field shapes rho{self.rho.shape} u{self.u.shape} T{self.T.shape}")
        if grid is not None and shape != grid.shape:
            raise InvalidState(f"state shape {shape} does not match grid {grid.shape}")
        if not (np.all(np.isfinite(self.rho)) and np.all(np.isfinite(self.T))
                and np.all(np.isfinite(self.u))):
            raise InvalidState("non-finite values in state")
        if np.any(self.rho <= 0):
            raise InvalidState("density must be positive")
        if np.any(self.T <= 0):
            raise InvalidState("temperature must be positive")
        if not (self.m > 0 and self.k > 0):
            raise InvalidState("m and k must be positive")
        return self

    @property
    def theta(self) -> np.ndarray:
        return self.k * self.T / self.m

    @property
    def number_density(self) -> np.ndarray:
        return self.rho / self.m

    @property
    def pressure(self) -> np.ndarray:
        return self.rho * self.theta

    def energy_density(self, metric) -> np.ndarray:
        """``rho E = D k T rho / 2m + rho |u|^2 / 2``."""
        u2 = np.einsum("...ij,...i,...j->...", metric.g, self.u, self.u)
        return 0.5 * DIM * self.rho * self.theta + 0.5 * self.rho * u2

    def with_fields(self, **changes) -> "FluidState":
        return replace(self, **changes)

    @classmethod
    def uniform(cls, shape, rho=1.0, u=(0.0, 0.0), T=1.0, m=1.0, k=1.0) -> "FluidState":
        return cls(np.full(shape, float(rho)),
                   np.broadcast_to(np.asarray(u, dtype=float), tuple(shape) + (DIM,)).copy(),
                   np.full(shape, float(T)), m, k)
