"""Divergence-free forcing models with a Holder modulus in time.

f(t) = g(t) * base, where base is a fixed divergence-free field with
||base||_{H,1} = amplitude and g is the scalar modulation:

    zero              g = 0
    constant_field    g = 1
    holder_modulated  g(t) = min(1, d * t^theta)

t^theta is theta-Holder with constant 1 on [0, inf) and clipping is
1-Lipschitz, so |g(t) - g(s)| <= d |t - s|^theta and the field-level
Holder constant is d_eff = d * amplitude. sup_t ||f(t)||_{H,1} is
amplitude for the constant and modulated kinds (the clip saturates at
1), zero otherwise; no time sampling is needed.
"""

from __future__ import annotations

from dataclasses import dataclass

from .field import FourierField, zero_field
from .grid import Grid
from .operators import make_field_random
from .renorm import RenormContext, renormed_norm

KINDS = ("zero", "constant_field", "holder_modulated")


@dataclass(frozen=True)
class ForcingModel:
    kind: str
    base: FourierField
    theta: float
    d_mod: float
    amplitude: float
    d_eff: float
    f_sup: float

    def modulation(self, t: float) -> float:
        if t < 0:
            raise ValueError(f"forcing evaluated at negative time {t}")
        if self.kind == "zero":
            return 0.0
        if self.kind == "constant_field":
            return 1.0
        return min(1.0, self.d_mod * t**self.theta)

    def evaluate(self, t: float) -> FourierField:
        return self.base.with_coeffs(self.base.coeffs * self.modulation(t))

    def as_dict(self) -> dict:
        return {
            "kind": self.kind,
            "theta": self.theta,
            "d_mod": self.d_mod,
            "amplitude": self.amplitude,
            "d_eff": self.d_eff,
            "f_sup": self.f_sup,
        }


def make_forcing(kind: str, g: Grid, ctx: RenormContext, amplitude: float = 0.0,
                 theta: float = 0.5, d: float = 1.0, seed=0,
                 spectrum_decay: float = 2.0) -> ForcingModel:
    """Build a forcing model; base is seeded, projected, and scaled so
    that its renormed norm equals `amplitude`."""
    if kind not in KINDS:
        raise ValueError(f"forcing kind must be one of {KINDS}, got {kind!r}")
    if kind == "zero" or amplitude == 0.0:
        return ForcingModel("zero", zero_field(g), theta, 0.0, 0.0, 0.0, 0.0)
    if amplitude < 0:
        raise ValueError(f"forcing amplitude must be nonnegative, got {amplitude}")
    raw = make_field_random(g, seed, spectrum_decay)
    nrm = renormed_norm(raw, ctx)
    if nrm == 0.0:
        raise ValueError("degenerate forcing base field")
    base = raw.with_coeffs(raw.coeffs * (amplitude / nrm))
    if kind == "constant_field":
        return ForcingModel(kind, base, theta, 0.0, amplitude, 0.0, amplitude)
    if not 0.0 < theta < 1.0:
        raise ValueError(f"Holder exponent must lie in (0, 1), got {theta}")
    if d <= 0.0:
        raise ValueError(f"Holder constant must be positive, got {d}")
    return ForcingModel(kind, base, theta, d, amplitude, d * amplitude, amplitude)
