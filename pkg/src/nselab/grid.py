"""Periodic Fourier grid on [0, 2pi)^3.

Coefficients are indexed in numpy FFT layout along each axis. The
retained ("active") spectrum is the cube |k_i| <= k_da with k = 0
excluded, where k_da = (n - 1) // 3. That radius satisfies
3*k_da < n, so pointwise products of two retained fields alias only
into modes outside the cube and the 2/3-rule filter removes them
exactly; the pseudospectral convective term then matches the direct
convolution on retained modes to round-off.
"""

from __future__ import annotations

import numpy as np

_cache: dict[int, "Grid"] = {}


class Grid:
    """Wavevector bookkeeping for an n^3 grid (n even, >= 4)."""

    def __init__(self, n: int):
        if n < 4 or n % 2 != 0:
            raise ValueError(f"grid size must be an even integer >= 4, got {n}")
        self.n = int(n)
        freq = np.fft.fftfreq(self.n) * self.n  # [0, 1, ..., n/2-1, -n/2, ..., -1]
        k = freq.astype(np.int64)
        kx, ky, kz = np.meshgrid(k, k, k, indexing="ij")
        self.kvec = np.stack([kx, ky, kz])
        self.ksq = kx * kx + ky * ky + kz * kz
        self.k_da = (self.n - 1) // 3
        inside = (np.abs(self.kvec) <= self.k_da).all(axis=0)
        self.cube_mask = inside
        self.active_mask = inside & (self.ksq > 0)
        self.lambda1 = 1  # k = (1,0,0) is always retained since k_da >= 1
        self.k2max = 3 * self.k_da**2
        self.ksq_active = np.unique(self.ksq[self.active_mask])
        # active wavevectors as rows, fixed C-order of the FFT layout
        self.modes = self.kvec[:, self.active_mask].T.astype(np.int32).copy()
        for arr in (self.kvec, self.ksq, self.cube_mask, self.active_mask,
                    self.ksq_active, self.modes):
            arr.setflags(write=False)

    def __eq__(self, other):
        return isinstance(other, Grid) and other.n == self.n

    def __hash__(self):
        return hash(("Grid", self.n))

    def __repr__(self):
        return f"Grid(n={self.n})"


def grid(n: int) -> Grid:
    """Shared cached instance; Grid data is immutable so reuse is safe."""
    g = _cache.get(n)
    if g is None:
        g = _cache[n] = Grid(n)
    return g
