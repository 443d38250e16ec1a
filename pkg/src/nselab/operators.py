"""Diagonal spectral operators: projection, Stokes operator, semigroups,
fractional powers, Sobolev norms, and the seeded random field factory.

Everything here is a pure function of its inputs; multipliers are even
real functions of k, so conjugate symmetry and divergence-freeness
survive every operation.
"""

from __future__ import annotations

import numpy as np

from .field import FourierField, hermitianize, safe_inner, safe_norm
from .grid import Grid


def _same_grid(u: FourierField, v: FourierField) -> None:
    if u.grid != v.grid:
        raise ValueError(f"grid mismatch: {u.grid} vs {v.grid}")


def inner_h(u: FourierField, v: FourierField) -> float:
    """Base inner product <u, v> = Re sum u_hat . conj(v_hat)."""
    _same_grid(u, v)
    return safe_inner(v.coeffs, u.coeffs)


def norm_h(u: FourierField) -> float:
    return safe_norm(u.coeffs)


def leray_project(g: Grid, raw: np.ndarray) -> FourierField:
    """Remove the gradient part mode-wise: u_hat -= k (k . u_hat) / |k|^2.

    Also zeroes the mean mode and restricts to the retained cube, so the
    result is a valid field. Idempotent.
    """
    raw = np.asarray(raw, dtype=np.complex128)
    k = g.kvec.astype(np.float64)
    ksq = g.ksq.astype(np.float64)
    kdot = np.einsum("ixyz,ixyz->xyz", k, raw)
    with np.errstate(invalid="ignore", divide="ignore"):
        scale = np.where(ksq > 0, kdot / np.where(ksq > 0, ksq, 1.0), 0.0)
    out = raw - k * scale[None]
    out *= g.active_mask[None]
    return FourierField(g, out)


def stokes_apply(u: FourierField) -> FourierField:
    """A u: multiplier |k|^2 (the projection is a no-op on valid fields)."""
    return u.with_coeffs(u.coeffs * u.grid.ksq[None])


def semigroup_apply(u: FourierField, t: float, kind: str, omega: float | None = None) -> FourierField:
    """exp(-t A) (kind "T"), exp(omega t) exp(-t A) (kind "S"), or the
    semigroup of A^(1/2), multiplier exp(-|k| t) (kind "S_half")."""
    if t < 0:
        raise ValueError(f"semigroup time must be nonnegative, got {t}")
    ksq = u.grid.ksq.astype(np.float64)
    if kind == "T":
        mult = np.exp(-ksq * t)
    elif kind == "S":
        if omega is None:
            raise ValueError('kind "S" needs the contraction rate omega')
        mult = np.exp((omega - ksq) * t)
    elif kind == "S_half":
        mult = np.exp(-np.sqrt(ksq) * t)
    else:
        raise ValueError(f"unknown semigroup kind {kind!r}")
    return u.with_coeffs(u.coeffs * mult[None])


def fractional_apply(u: FourierField, z: float) -> FourierField:
    """A^z u: multiplier |k|^(2z), z >= 0."""
    if z < 0:
        raise ValueError(f"fractional power must be nonnegative, got {z}")
    if z == 0:
        return u
    mult = u.grid.ksq.astype(np.float64) ** z
    return u.with_coeffs(u.coeffs * mult[None])


def fractional_solve(u: FourierField, z: float) -> FourierField:
    """A^(-z) u on the active modes (zero elsewhere); z >= 0."""
    if z < 0:
        raise ValueError(f"fractional power must be nonnegative, got {z}")
    ksq = u.grid.ksq.astype(np.float64)
    with np.errstate(divide="ignore"):
        mult = np.where(u.grid.active_mask, ksq ** (-z), 0.0)
    return u.with_coeffs(u.coeffs * mult[None])


def sobolev_norm(u: FourierField, order: int) -> float:
    """(sum (1 + |k|^2)^order |u_hat|^2)^(1/2) for order in {0, 1, 2}."""
    if order not in (0, 1, 2):
        raise ValueError(f"order must be 0, 1 or 2, got {order}")
    w = (1.0 + u.grid.ksq.astype(np.float64)) ** (order / 2.0)
    return safe_norm(u.coeffs * w[None])


def make_field_random(g: Grid, seed, spectrum_decay: float = 2.0) -> FourierField:
    """Seeded divergence-free field with |u_hat| ~ (1 + |k|^2)^(-decay/2).

    Gaussian coefficients are symmetrized, shaped, and projected;
    identical (grid, seed, decay) triples give bitwise-identical output.
    """
    if spectrum_decay < 0:
        raise ValueError(f"spectrum_decay must be nonnegative, got {spectrum_decay}")
    rng = np.random.default_rng(seed)
    n = g.n
    raw = rng.standard_normal((3, n, n, n)) + 1j * rng.standard_normal((3, n, n, n))
    raw = hermitianize(raw)
    profile = (1.0 + g.ksq.astype(np.float64)) ** (-spectrum_decay / 2.0)
    raw *= profile[None]
    return leray_project(g, raw)
