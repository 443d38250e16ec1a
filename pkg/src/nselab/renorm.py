"""The equivalent norm ||u||_{H,1} = ||S(r) u||_H with S(t) = e^(wt) e^(-tA).

With the contraction rate w strictly below the first eigenvalue, S(r) is
a strict contraction on mean-zero fields, so ||u||_{H,1} <= ||u||_H and
||u||_H <= M ||u||_{H,1} with M = exp((k2max - w) r) sharp on the
truncated spectrum. M grows with both r and the truncation; all
downstream constants therefore carry their context with them.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .field import FourierField, safe_inner, safe_norm
from .grid import Grid


@dataclass(frozen=True)
class RenormContext:
    grid: Grid
    r: float
    omega: float
    s_weights: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.r <= 0:
            raise ValueError(f"renorming time r must be positive, got {self.r}")
        if not 0 < self.omega < self.grid.lambda1:
            raise ValueError(
                f"omega must lie in (0, lambda1) = (0, {self.grid.lambda1}), got {self.omega}"
            )
        w = np.exp((self.omega - self.grid.ksq.astype(np.float64)) * self.r)
        w.setflags(write=False)
        object.__setattr__(self, "s_weights", w)

    @property
    def lambda1(self) -> float:
        return float(self.grid.lambda1)

    @property
    def k2max(self) -> float:
        return float(self.grid.k2max)

    @property
    def log_m(self) -> float:
        return (self.k2max - self.omega) * self.r

    @property
    def m_equiv(self) -> float:
        """||u||_H <= M ||u||_{H,1}; overflows to inf for extreme r."""
        return float(np.exp(self.log_m))

    @property
    def m1_equiv(self) -> float:
        """||u||_{H,1} <= M1 ||u||_H; equals 1 since omega < lambda1."""
        return 1.0


def make_context(g: Grid, r: float, omega: float | None = None) -> RenormContext:
    """Context with the default contraction rate lambda1 / 2."""
    if omega is None:
        omega = 0.5 * g.lambda1
    return RenormContext(g, float(r), float(omega))


def renormed_norm(u: FourierField, ctx: RenormContext) -> float:
    return safe_norm(u.coeffs * ctx.s_weights[None])


def renormed_inner(u: FourierField, v: FourierField, ctx: RenormContext) -> float:
    w = ctx.s_weights[None]
    return safe_inner(v.coeffs * w, u.coeffs * w)
