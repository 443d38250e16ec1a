"""Dissipativity thresholds: the norm levels u-, u+ between which the
nonlinear operator is certified dissipative, the discriminant gamma,
the contraction rate delta, and the admissible-viscosity bound.

The 0-dissipativity bound polynomial in x = ||u||_{H,1} is

    p(x) = -(nu * kappa) x + K x^2 + f,   K = M^4 c c1 c2 / r^(5/4),

with kappa = alpha / r. Its roots are u± = pre * (1 ± sqrt(1 - gamma))
with pre = nu*kappa/(2K) = nu alpha r^(1/4) / (2 M^4 c c1 c2) and
gamma = 4 K f / (nu*kappa)^2 = 4 r^(3/4) f M^4 c c1 c2 / (nu alpha)^2.

delta is the strong-dissipativity rate attached to the report. It is
(nu*kappa/2) sqrt(1 - gamma) for gamma <= 1 and zero otherwise, so that
delta > 0 exactly when gamma < 1 and delta vanishes at the double root.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .constants import ConstantsEstimate
from .field import FourierField
from .renorm import RenormContext, renormed_norm


@dataclass
class ThresholdReport:
    nu: float
    f_sup: float
    gamma: float
    u_plus: float
    u_minus: float
    delta: float
    nu_min: float
    admissible: bool
    complex_roots: bool
    kappa: float
    k_coef: float
    step_cap: float

    def as_dict(self) -> dict:
        return {
            "nu": self.nu,
            "f_sup": self.f_sup,
            "gamma": self.gamma,
            "u_plus": self.u_plus,
            "u_minus": self.u_minus,
            "delta": self.delta,
            "nu_min": self.nu_min,
            "admissible": self.admissible,
            "complex_roots": self.complex_roots,
            "kappa": self.kappa,
            "k_coef": self.k_coef,
            "step_cap": self.step_cap,
        }


def _k_coef(consts: ConstantsEstimate, r: float) -> float:
    """M^4 c c1 c2 / r^(5/4), in log space when the direct product overflows."""
    direct = consts.m_equiv**4 * consts.c * consts.c1 * consts.c2 / r**1.25
    if math.isfinite(direct) and direct > 0.0:
        return direct
    if consts.c <= 0.0 or consts.c1 <= 0.0 or consts.c2 <= 0.0:
        return 0.0
    log_k = (4.0 * consts.log_m + math.log(consts.c) + math.log(consts.c1)
             + math.log(consts.c2) - 1.25 * math.log(r))
    try:
        return math.exp(log_k)
    except OverflowError:
        return math.inf


def compute_thresholds(nu: float, f_sup: float, consts: ConstantsEstimate,
                       ctx: RenormContext) -> ThresholdReport:
    if nu <= 0:
        raise ValueError(f"viscosity must be positive, got {nu}")
    if f_sup < 0:
        raise ValueError(f"forcing bound must be nonnegative, got {f_sup}")
    r = ctx.r
    kappa = consts.alpha / r
    k = _k_coef(consts, r)
    pre = nu * kappa / (2.0 * k) if k > 0 else math.inf
    if f_sup == 0.0:
        gamma = 0.0
        sq = 1.0
        u_minus = 0.0
        # closed-form root, evaluated literally so the no-forcing limit
        # is reproduced to the last bit
        m4ccc = consts.m_equiv**4 * consts.c * consts.c1 * consts.c2
        if math.isfinite(m4ccc) and m4ccc > 0.0:
            u_plus = nu * consts.alpha * r**0.25 / m4ccc
        else:
            u_plus = 2.0 * pre
        complex_roots = False
        nu_min = 0.0
    else:
        gamma = 4.0 * k * f_sup / (nu * kappa) ** 2
        nu_min = (2.0 * consts.m_equiv**2 * r**0.375 / consts.alpha) * math.sqrt(
            f_sup * consts.c * consts.c1 * consts.c2
        )
        if gamma > 1.0:
            sq = 0.0
            u_minus = u_plus = pre
            complex_roots = True
        else:
            sq = math.sqrt(1.0 - gamma)
            u_minus = pre * (1.0 - sq)
            u_plus = pre * (1.0 + sq)
            complex_roots = False
    delta = 0.5 * nu * kappa * sq if not complex_roots else 0.0
    admissible = gamma < 1.0
    # step cap r^(5/4)/(4 M^4 c c1 c2 u_plus) = 1/(4 K u_plus); the stable
    # form below uses K u_plus = nu kappa (1 + sqrt(1-gamma)) / 2
    if complex_roots:
        step_cap = 1.0 / (2.0 * nu * kappa)
    else:
        step_cap = 1.0 / (2.0 * nu * kappa * (1.0 + sq))
    return ThresholdReport(
        nu=nu,
        f_sup=f_sup,
        gamma=gamma,
        u_plus=u_plus,
        u_minus=u_minus,
        delta=delta,
        nu_min=nu_min,
        admissible=admissible,
        complex_roots=complex_roots,
        kappa=kappa,
        k_coef=k,
        step_cap=step_cap,
    )


def quadratic_residual(x: float, report: ThresholdReport) -> float:
    """p(x) of the bound polynomial; vanishes at x = u- and x = u+."""
    return -(report.nu * report.kappa) * x + report.k_coef * x * x + report.f_sup


def bound_polynomial(x: float, report: ThresholdReport) -> float:
    """Right side of the 0-dissipativity estimate at ||u||_{H,1} = x:
    -(nu kappa) x^2 + K x^3 + f x."""
    return x * quadratic_residual(x, report)


def ball_membership(u: FourierField, report: ThresholdReport, ctx: RenormContext) -> str:
    """Classify ||u||_{H,1} against the annulus [u-, u+/2]."""
    x = renormed_norm(u, ctx)
    if x < report.u_minus:
        return "below_u_minus"
    if x > 0.5 * report.u_plus:
        return "above_half_u_plus"
    return "inside_D"
