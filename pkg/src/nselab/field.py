"""Divergence-free Fourier vector fields and their binary snapshots.

A field stores complex coefficients of shape (3, n, n, n) in FFT layout.
Invariants (enforced by the constructors in this package, checked by the
test suite): conjugate symmetry u_hat(-k) = conj(u_hat(k)), zero mean,
k . u_hat(k) = 0 on every mode, and support inside the retained cube.

Inner products and norms use the coefficient-sum convention
<u, v> = Re sum_k u_hat(k) . conj(v_hat(k)); physical-space integrals
differ from it by the constant (2 pi)^3 factor only, which cancels in
every inequality handled here.
"""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass

import numpy as np

from .grid import Grid, grid as shared_grid

SNAPSHOT_MAGIC = b"NSFLD1"


@dataclass(frozen=True)
class FourierField:
    grid: Grid
    coeffs: np.ndarray

    def __post_init__(self):
        n = self.grid.n
        if self.coeffs.shape != (3, n, n, n):
            raise ValueError(f"coefficient shape {self.coeffs.shape} does not match grid n={n}")
        if self.coeffs.dtype != np.complex128:
            object.__setattr__(self, "coeffs", self.coeffs.astype(np.complex128))
        self.coeffs.setflags(write=False)

    def with_coeffs(self, coeffs: np.ndarray) -> "FourierField":
        return FourierField(self.grid, coeffs)


def safe_norm(arr) -> float:
    """l2 norm of the raveled array, scaled to survive extreme magnitudes."""
    m = float(np.max(np.abs(arr))) if arr.size else 0.0
    if m == 0.0:
        return 0.0
    if not np.isfinite(m):
        return m
    scaled = np.asarray(arr) / m
    return m * float(np.sqrt(np.vdot(scaled, scaled).real))


def safe_inner(a, b) -> float:
    """Re sum conj(a)*b with the same overflow/underflow guard."""
    ma = float(np.max(np.abs(a))) if a.size else 0.0
    mb = float(np.max(np.abs(b))) if b.size else 0.0
    if ma == 0.0 or mb == 0.0:
        return 0.0
    return ma * mb * float(np.vdot(np.asarray(a) / ma, np.asarray(b) / mb).real)


def conj_reversed(coeffs: np.ndarray) -> np.ndarray:
    """conj(a(-k)) in FFT layout: reverse each axis, then roll by one."""
    axes = (1, 2, 3)
    return np.conj(np.roll(np.flip(coeffs, axis=axes), 1, axis=axes))


def hermitianize(coeffs: np.ndarray) -> np.ndarray:
    """Project onto conjugate-symmetric arrays (real physical fields)."""
    return 0.5 * (coeffs + conj_reversed(coeffs))


def max_divergence(field: FourierField) -> float:
    div = np.einsum("ixyz,ixyz->xyz", field.grid.kvec.astype(np.float64), field.coeffs)
    return float(np.max(np.abs(div)))


def zero_field(g: Grid) -> FourierField:
    return FourierField(g, np.zeros((3, g.n, g.n, g.n), dtype=np.complex128))


def single_mode_field(g: Grid, k, e, amplitude: float = 1.0, phase: str = "sin") -> FourierField:
    """Real field amplitude * e_unit * sin(k.x) (or cos); e must be normal to k.

    The H norm of the result is amplitude / sqrt(2).
    """
    k = np.asarray(k, dtype=np.int64)
    e = np.asarray(e, dtype=np.float64)
    if not (np.abs(k) <= g.k_da).all() or not np.any(k):
        raise ValueError(f"wavevector {k.tolist()} outside the active cube of {g}")
    if abs(float(k @ e)) > 1e-12 * np.linalg.norm(e) * np.linalg.norm(k):
        raise ValueError("polarization must be orthogonal to the wavevector")
    e = e / np.linalg.norm(e)
    coeffs = np.zeros((3, g.n, g.n, g.n), dtype=np.complex128)
    plus = tuple(int(c) % g.n for c in k)
    minus = tuple(int(-c) % g.n for c in k)
    if phase == "sin":
        cp = amplitude * e / 2j
    elif phase == "cos":
        cp = amplitude * e / 2 + 0j
    else:
        raise ValueError(f"unknown phase {phase!r}")
    coeffs[(slice(None),) + plus] = cp
    coeffs[(slice(None),) + minus] = np.conj(cp)
    return FourierField(g, coeffs)


def write_snapshot(field: FourierField, path, manifest: dict | None = None) -> None:
    """Binary dump: magic, n as uint32 LE, then 3*n^3 little-endian
    (re, im) float64 pairs with wavevectors in ascending lexicographic
    order (fftshift layout), component-major. A JSON manifest goes to
    path + ".json" when provided."""
    shifted = np.fft.fftshift(field.coeffs, axes=(1, 2, 3)).astype("<c16")
    with open(path, "wb") as fh:
        fh.write(SNAPSHOT_MAGIC)
        fh.write(struct.pack("<I", field.grid.n))
        fh.write(shifted.tobytes(order="C"))
    if manifest is not None:
        with open(f"{path}.json", "w") as fh:
            json.dump(manifest, fh, indent=2, sort_keys=True)
            fh.write("\n")


def read_snapshot(path) -> FourierField:
    with open(path, "rb") as fh:
        magic = fh.read(6)
        if magic != SNAPSHOT_MAGIC:
            raise ValueError(f"{path}: bad magic {magic!r}")
        (n,) = struct.unpack("<I", fh.read(4))
        payload = fh.read()
    expected = 3 * n**3 * 16
    if len(payload) != expected:
        raise ValueError(f"{path}: payload is {len(payload)} bytes, expected {expected}")
    shifted = np.frombuffer(payload, dtype="<c16").reshape(3, n, n, n)
    coeffs = np.fft.ifftshift(shifted, axes=(1, 2, 3)).astype(np.complex128)
    return FourierField(shared_grid(int(n)), coeffs)
