"""Built-in surface charts: flat, cylinder, sphere band, torus and Monge patches."""
from __future__ import annotations

import numpy as np

from ..errors import ConfigError
from .metric import SurfaceChart

TWO_PI = 2.0 * np.pi


def _zeros_like(a1, a2):
    return np.zeros(np.broadcast(a1, a2).shape)


def _diag_metric(g11, g22, d1g11=0.0, d1g22=0.0, d2g11=0.0, d2g22=0.0):
    shape = np.broadcast(g11, g22, d1g11, d1g22, d2g11, d2g22).shape
    g = np.zeros(shape + (2, 2))
    g[..., 0, 0] = g11
    g[..., 1, 1] = g22
    dg = np.zeros(shape + (2, 2, 2))
    dg[..., 0, 0, 0] = d1g11
    dg[..., 0, 1, 1] = d1g22
    dg[..., 1, 0, 0] = d2g11
    dg[..., 1, 1, 1] = d2g22
    return g, dg


def flat(L1: float = TWO_PI, L2: float = TWO_PI, periodic=(True, True),
         origin=(0.0, 0.0)) -> SurfaceChart:
    """Identity embedding of a rectangle; g = identity, all Gamma = 0."""

    def embedding(a1, a2):
        return a1, a2, 0 * a1

    def metric(a1, a2):
        z = _zeros_like(a1, a2)
        return _diag_metric(z + 1.0, z + 1.0)

    o1, o2 = origin
    return SurfaceChart("flat", embedding, ((o1, o1 + L1), (o2, o2 + L2)),
                        tuple(periodic), metric, {"L1": L1, "L2": L2})


def cylinder(R: float = 1.0, height: float = TWO_PI) -> SurfaceChart:
    """a1 = axial position, a2 = azimuth; both periodic (a periodic segment)."""

    def embedding(a1, a2):
        return R * np.cos(a2), R * np.sin(a2), a1

    def metric(a1, a2):
        z = _zeros_like(a1, a2)
        return _diag_metric(z + 1.0, z + R * R)

    return SurfaceChart("cylinder", embedding, ((0.0, height), (0.0, TWO_PI)),
                        (True, True), metric, {"R": R, "height": height})


def sphere(R: float = 1.0, band=(np.pi / 4, 3 * np.pi / 4)) -> SurfaceChart:
    """a1 = polar angle theta (restricted to ``band``), a2 = azimuth phi."""

    def embedding(a1, a2):
        s = np.sin(a1)
        return R * s * np.cos(a2), R * s * np.sin(a2), R * np.cos(a1)

    def metric(a1, a2):
        z = _zeros_like(a1, a2)
        s, c = np.sin(a1) + z, np.cos(a1) + z
        return _diag_metric(z + R * R, R * R * s * s, d1g22=2 * R * R * s * c)

    return SurfaceChart("sphere", embedding, (tuple(band), (0.0, TWO_PI)),
                        (False, True), metric, {"R": R, "band": tuple(band)})


def torus(R: float = 2.0, r: float = 1.0) -> SurfaceChart:
    """a1 = poloidal angle, a2 = toroidal angle; both periodic."""

    def embedding(a1, a2):
        rho = R + r * np.cos(a1)
        return rho * np.cos(a2), rho * np.sin(a2), r * np.sin(a1)

    def metric(a1, a2):
        z = _zeros_like(a1, a2)
        rho = R + r * np.cos(a1) + z
        return _diag_metric(z + r * r, rho * rho, d1g22=-2 * r * np.sin(a1) * rho)

    return SurfaceChart("torus", embedding, ((0.0, TWO_PI), (0.0, TWO_PI)),
                        (True, True), metric, {"R": R, "r": r})


# Monge patches z = h(x, y); metric derived from the embedding by differentiation
MONGE_CATALOG = {
    "eggcrate": dict(domain=((0.0, TWO_PI), (0.0, TWO_PI)), periodic=(True, True),
                     height=lambda x, y, A: A * np.sin(x) * np.sin(y)),
    "ripple": dict(domain=((0.0, TWO_PI), (0.0, TWO_PI)), periodic=(True, True),
                   height=lambda x, y, A: A * np.cos(x + 2 * y)),
    "gaussian": dict(domain=((-2.0, 2.0), (-2.0, 2.0)), periodic=(False, False),
                     height=lambda x, y, A: A * np.exp(-(x * x + y * y) / 2)),
    "saddle": dict(domain=((-1.0, 1.0), (-1.0, 1.0)), periodic=(False, False),
                   height=lambda x, y, A: 0.5 * A * (x * x - y * y)),
}


def monge(expr_id: str, A: float = 0.3) -> SurfaceChart:
    try:
        entry = MONGE_CATALOG[expr_id]
    except KeyError:
        raise ConfigError(f"unknown Monge height function {expr_id!r}; "
                          f"choose from {sorted(MONGE_CATALOG)}") from None
    h = entry["height"]

    def embedding(a1, a2):
        return a1, a2, h(a1, a2, A)

    return SurfaceChart(f"monge:{expr_id}", embedding, entry["domain"],
                        entry["periodic"], None, {"A": A})


_BUILDERS = {"flat": flat, "cylinder": cylinder, "sphere": sphere, "torus": torus}


def chart_from_name(name: str, **params) -> SurfaceChart:
    """Build a chart from its CLI name, e.g. ``"torus"`` or ``"monge:saddle"``."""
    if name.startswith("monge:"):
        return monge(name.split(":", 1)[1], **params)
    try:
        builder = _BUILDERS[name]
    except KeyError:
        raise ConfigError(f"unknown chart {name!r}") from None
    try:
        return builder(**params)
    except TypeError as exc:
        raise ConfigError(f"bad parameters for chart {name!r}: {exc}") from None


BUILTIN_CHARTS = ("flat", "cylinder", "sphere", "torus",
                  *(f"monge:{k}" for k in MONGE_CATALOG))
