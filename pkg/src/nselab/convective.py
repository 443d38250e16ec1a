"""Projected convective term C(u, v) = P (u . grad) v and the trilinear
forms built on it.

The pseudospectral path transforms to physical space, multiplies, and
transforms back; the convolution path sums over active mode pairs
directly. Retained fields occupy the cube 3*k_da < n, so the pointwise
product on the n^3 grid is alias-free on retained modes and the two
paths agree to round-off. The oracle is O(n_active^2) and refuses
grids beyond n = 16.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import kernels
from .field import FourierField
from .grid import Grid
from .operators import inner_h, leray_project
from .renorm import RenormContext, renormed_inner

ORACLE_MAX_N = 16


def to_physical(u: FourierField) -> np.ndarray:
    """Velocity samples on the n^3 spatial grid, shape (3, n, n, n)."""
    n3 = u.grid.n**3
    return np.real(np.fft.ifftn(u.coeffs, axes=(1, 2, 3))) * n3


def gradient_physical(v: FourierField) -> np.ndarray:
    """grad[i, j] = d_j v_i sampled in physical space, shape (3, 3, n, n, n)."""
    g = v.grid
    n3 = g.n**3
    k = g.kvec.astype(np.float64)
    dv = 1j * k[None, :] * v.coeffs[:, None]
    return np.real(np.fft.ifftn(dv, axes=(2, 3, 4))) * n3


def _check_grids(*fields: FourierField) -> Grid:
    g = fields[0].grid
    for f in fields[1:]:
        if f.grid != g:
            raise ValueError(f"grid mismatch: {f.grid} vs {g}")
    return g


def convective_term(u: FourierField, v: FourierField, method: str = "pseudospectral") -> FourierField:
    g = _check_grids(u, v)
    if method == "pseudospectral":
        w_phys = kernels.contract_velocity_gradient(to_physical(u), gradient_physical(v))
        raw = np.fft.fftn(w_phys, axes=(1, 2, 3)) / g.n**3
    elif method == "convolution_oracle":
        if g.n > ORACLE_MAX_N:
            raise ValueError(
                f"convolution oracle limited to n <= {ORACLE_MAX_N}, got n = {g.n}"
            )
        ucoef = np.ascontiguousarray(u.coeffs[:, g.active_mask].T)
        vcoef = np.ascontiguousarray(v.coeffs[:, g.active_mask].T)
        raw = kernels.convolve_modes(ucoef, vcoef, g.modes, g.n)
    else:
        raise ValueError(f"unknown method {method!r}")
    raw = raw * g.cube_mask[None]
    return leray_project(g, raw)


def advect_adjoint_first_slot(v: FourierField, w: FourierField) -> FourierField:
    """Field G with <(u . grad) v, w> = <u, G>: G_j = P sum_i (d_j v_i) w_i.

    Used when climbing the trilinear ratio in its first argument.
    """
    g = _check_grids(v, w)
    gradv_t = np.ascontiguousarray(gradient_physical(v).transpose(1, 0, 2, 3, 4))
    out_phys = kernels.contract_velocity_gradient(to_physical(w), gradv_t)
    raw = np.fft.fftn(out_phys, axes=(1, 2, 3)) / g.n**3
    raw = raw * g.cube_mask[None]
    return leray_project(g, raw)


def trilinear(u: FourierField, v: FourierField, w: FourierField,
              renormed: bool = False, ctx: RenormContext | None = None) -> float:
    """b(u, v, w) = <C(u, v), w> in the base or renormed inner product."""
    _check_grids(u, v, w)
    c = convective_term(u, v)
    if renormed:
        if ctx is None:
            raise ValueError("renormed trilinear form needs a RenormContext")
        return renormed_inner(c, w, ctx)
    return inner_h(c, w)


@dataclass
class TrilinearSample:
    """One (u, v, w) triple with its form values; the verifier fills in
    bound_rhs and ratio for the inequality under test."""

    u: FourierField
    v: FourierField
    w: FourierField
    b_h: float
    b_h1: float | None = None
    bound_rhs: float | None = None
    ratio: float | None = None


def make_sample(u: FourierField, v: FourierField, w: FourierField,
                ctx: RenormContext | None = None) -> TrilinearSample:
    b_h = trilinear(u, v, w)
    b_h1 = trilinear(u, v, w, renormed=True, ctx=ctx) if ctx is not None else None
    return TrilinearSample(u=u, v=v, w=w, b_h=b_h, b_h1=b_h1)
