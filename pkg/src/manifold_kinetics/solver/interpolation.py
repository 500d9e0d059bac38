"""Periodic bicubic B-spline interpolation on uniform grids.

Values are prefiltered into spline coefficients with an FFT (the periodic
tridiagonal system ``(1, 4, 1)/6`` is diagonal in Fourier space) and then
evaluated with the 4x4 tensor-product cubic B-spline stencil.  A fixed set
of evaluation points becomes a sparse matrix, so repeated streaming costs one
FFT pair plus one sparse product.
"""
from __future__ import annotations

import numpy as np
from scipy import sparse


def _bspline_symbol(n: int, real: bool = False) -> np.ndarray:
    freq = np.fft.rfftfreq(n) if real else np.fft.fftfreq(n)
    return (4.0 + 2.0 * np.cos(2 * np.pi * freq)) / 6.0


def bspline_weights(t: np.ndarray) -> np.ndarray:
    """Cubic B-spline weights for offsets ``-1, 0, 1, 2`` at fraction ``t``; shape ``(4,) + t.shape``."""
    t = np.asarray(t, dtype=float)
    t2, t3 = t * t, t * t * t
    return np.stack([
        (1.0 - t) ** 3 / 6.0,
        (3 * t3 - 6 * t2 + 4.0) / 6.0,
        (-3 * t3 + 3 * t2 + 3 * t + 1.0) / 6.0,
        t3 / 6.0,
    ])


def prefilter(values: np.ndarray) -> np.ndarray:
    """Spline coefficients of data periodic in its first two axes."""
    n1, n2 = values.shape[:2]
    spectrum = np.fft.rfftn(values, axes=(0, 1))
    sym = _bspline_symbol(n1)[:, None] * _bspline_symbol(n2, real=True)[None, :]
    spectrum /= sym.reshape(sym.shape + (1,) * (values.ndim - 2))
    return np.fft.irfftn(spectrum, s=(n1, n2), axes=(0, 1))


def evaluate(coeffs: np.ndarray, s1: np.ndarray, s2: np.ndarray) -> np.ndarray:
    """Evaluate a scalar periodic spline at fractional index positions."""
    n1, n2 = coeffs.shape
    i1 = np.floor(s1).astype(int)
    i2 = np.floor(s2).astype(int)
    w1 = bspline_weights(s1 - i1)
    w2 = bspline_weights(s2 - i2)
    out = np.zeros(np.shape(s1))
    for j in range(4):
        for l in range(4):
            out += w1[j] * w2[l] * coeffs[(i1 + j - 1) % n1, (i2 + l - 1) % n2]
    return out


def interpolate(values: np.ndarray, s1, s2) -> np.ndarray:
    """Periodic spline interpolant of a scalar field at index positions ``(s1, s2)``."""
    return evaluate(prefilter(values), np.asarray(s1, float), np.asarray(s2, float))


class DepartureInterpolator:
    """Spline evaluation of ``f[x, a]`` at per-(node, velocity) departure points.

    ``s1, s2`` have the full field shape ``(n1, n2, Nv)`` and give the
    departure index coordinates for arrival node ``(i1, i2)`` and velocity
    node ``a``; velocity node ``a`` is always read from the same velocity
    slot.
    """

    def __init__(self, s1: np.ndarray, s2: np.ndarray):
        n1, n2, nv = s1.shape
        self.shape = (n1, n2, nv)
        i1 = np.floor(s1).astype(np.int64)
        i2 = np.floor(s2).astype(np.int64)
        w1 = bspline_weights(s1 - i1)
        w2 = bspline_weights(s2 - i2)
        a = np.broadcast_to(np.arange(nv), s1.shape)
        rows = np.arange(s1.size).reshape(s1.shape)
        r, c, d = [], [], []
        for j in range(4):
            for l in range(4):
                col = (((i1 + j - 1) % n1) * n2 + (i2 + l - 1) % n2) * nv + a
                r.append(rows.ravel())
                c.append(col.ravel())
                d.append((w1[j] * w2[l]).ravel())
        size = s1.size
        self.matrix = sparse.csr_matrix(
            (np.concatenate(d), (np.concatenate(r), np.concatenate(c))), shape=(size, size))

    def __call__(self, values: np.ndarray) -> np.ndarray:
        coeffs = prefilter(values)
        return (self.matrix @ coeffs.ravel()).reshape(self.shape)


class UniformShiftInterpolator:
    """Same spline interpolant when each velocity slot shifts by one grid-wide offset.

    Applied in Fourier space: shift ``s = i0 + t`` multiplies mode ``theta`` by
    ``exp(i theta i0) sum_j w_j(t) exp(i theta j) / B(theta)``.
    """

    def __init__(self, shape, shift1: np.ndarray, shift2: np.ndarray):
        n1, n2 = shape
        self.shape = (n1, n2)
        th1 = 2 * np.pi * np.fft.fftfreq(n1)
        th2 = 2 * np.pi * np.fft.rfftfreq(n2)
        self.transfer = (self._axis_symbol(th1, shift1)[:, None, :]
                         * self._axis_symbol(th2, shift2)[None, :, :])
        self.transfer /= (_bspline_symbol(n1)[:, None] * _bspline_symbol(n2, real=True)[None, :])[..., None]

    @staticmethod
    def _axis_symbol(theta: np.ndarray, shift: np.ndarray) -> np.ndarray:
        shift = np.asarray(shift, dtype=float)
        i0 = np.floor(shift)
        w = bspline_weights(shift - i0)
        offsets = np.arange(-1, 3)
        phase = np.exp(1j * theta[:, None, None] * (i0[None, None, :] + offsets[None, :, None]))
        return np.einsum("tjn,jn->tn", phase, w)

    def __call__(self, values: np.ndarray) -> np.ndarray:
        spectrum = np.fft.rfftn(values, axes=(0, 1))
        return np.fft.irfftn(spectrum * self.transfer, s=self.shape, axes=(0, 1))
