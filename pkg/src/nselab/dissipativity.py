"""Executable dissipativity predicates on the certified annulus.

All checks work in the renormed inner product. Sampled fields are
random directions rescaled so the renormed norm lands uniformly in
[u-, u+/2]; the certified bounds constrain nothing else about them.
"""

from __future__ import annotations

import numpy as np

from .constants import ConstantsEstimate
from .evolution import NonlinearOperator
from .field import FourierField
from .grid import Grid
from .operators import make_field_random
from .renorm import RenormContext, renormed_inner, renormed_norm
from .seeding import generator, sub_seed
from .thresholds import ThresholdReport, bound_polynomial

REL_SLACK = 1e-8


def sample_annulus(g: Grid, ctx: RenormContext, report: ThresholdReport,
                   master: int, label: str, count: int,
                   spectrum_decay: float = 2.0) -> list[FourierField]:
    lo, hi = report.u_minus, 0.5 * report.u_plus
    if not (hi > 0) or lo > hi:
        raise ValueError(
            f"annulus [{lo:.3e}, {hi:.3e}] is empty; gamma = {report.gamma:.3f} "
            "(needs gamma <= 8/9)"
        )
    out = []
    for i in range(count):
        direction = make_field_random(g, sub_seed(master, f"{label}-dir", i), spectrum_decay)
        nrm = renormed_norm(direction, ctx)
        radius = generator(master, f"{label}-radius", i).uniform(lo, hi)
        out.append(direction.with_coeffs(direction.coeffs * (radius / nrm)))
    return out


def check_zero_dissipative(u: FourierField, t: float, op: NonlinearOperator,
                           report: ThresholdReport, ctx: RenormContext):
    """Returns (value, bound): value = <A(u,t), u>_{H,1} and the bound
    polynomial -(nu kappa) x^2 + K x^3 + f x at x = ||u||_{H,1}.
    Certified behavior: value <= bound, and bound <= 0 on the annulus."""
    value = renormed_inner(op.apply(u, t), u, ctx)
    bound = bound_polynomial(renormed_norm(u, ctx), report)
    return value, bound


def check_strong_dissipative(u: FourierField, v: FourierField, t: float,
                             op: NonlinearOperator, report: ThresholdReport,
                             ctx: RenormContext):
    """Returns (g, bound): g = <A(u,t) - A(v,t), u - v>_{H,1} and
    bound = -delta ||u - v||^2_{H,1}. Certified: g <= bound."""
    diff = u.with_coeffs(op.apply(u, t).coeffs - op.apply(v, t).coeffs)
    uv = u.with_coeffs(u.coeffs - v.coeffs)
    g = renormed_inner(diff, uv, ctx)
    bound = -report.delta * renormed_norm(uv, ctx) ** 2
    return g, bound


def run_zero_dissipativity_check(op: NonlinearOperator, report: ThresholdReport,
                                 ctx: RenormContext, master: int,
                                 count: int = 100, t: float = 0.0) -> dict:
    fields = sample_annulus(ctx.grid, ctx, report, master, "zero-dissipative", count)
    worst_value = -np.inf
    worst_margin = np.inf
    ok = True
    for u in fields:
        value, bound = check_zero_dissipative(u, t, op, report, ctx)
        margin = bound - value
        worst_value = max(worst_value, value)
        worst_margin = min(worst_margin, margin)
        if value > bound + REL_SLACK * abs(bound) or value > 0.0:
            ok = False
    return {
        "check": "zero_dissipative",
        "count": count,
        "seed": {"master": int(master), "label": "zero-dissipative"},
        "worst_value": float(worst_value),
        "worst_margin": float(worst_margin),
        "pass": ok,
    }


def run_strong_dissipativity_check(op: NonlinearOperator, report: ThresholdReport,
                                   ctx: RenormContext, master: int,
                                   count: int = 100, t: float = 0.0) -> dict:
    us = sample_annulus(ctx.grid, ctx, report, master, "strong-dissipative-a", count)
    vs = sample_annulus(ctx.grid, ctx, report, master, "strong-dissipative-b", count)
    worst_excess = -np.inf
    ok = True
    for u, v in zip(us, vs):
        g, bound = check_strong_dissipative(u, v, t, op, report, ctx)
        excess = g - bound * (1.0 - REL_SLACK)
        worst_excess = max(worst_excess, excess)
        if excess > 0.0:
            ok = False
    return {
        "check": "strong_dissipative",
        "count": count,
        "delta": report.delta,
        "seed": {"master": int(master), "labels": ["strong-dissipative-a", "strong-dissipative-b"]},
        "worst_excess": float(worst_excess),
        "pass": ok,
    }


def continuity_bound_coefficient(nu: float, consts: ConstantsEstimate,
                                 report: ThresholdReport, ctx: RenormContext) -> float:
    """nu M c3 / r + M^4 c c1 c2 u_plus / r^(5/4). With the truncation
    value of c3 the first term is exactly nu * k2max."""
    return nu * consts.m_equiv * consts.c3 / ctx.r + report.k_coef * report.u_plus


def make_continuity_samples(ctx: RenormContext, report: ThresholdReport, master: int,
                            bases: int = 8, scales=(1e-1, 1e-2, 1e-3), t: float = 0.25):
    """(u_n, u, t_n, t) tuples with u_n -> u geometrically inside the ball."""
    g = ctx.grid
    hi = 0.5 * report.u_plus
    lo = report.u_minus
    samples = []
    for i in range(bases):
        u = sample_annulus(g, ctx, report, master, f"continuity-base-{i}", 1)[0]
        direction = make_field_random(g, sub_seed(master, "continuity-dir", i), 2.0)
        direction = direction.with_coeffs(
            direction.coeffs / renormed_norm(direction, ctx)
        )
        for eps in scales:
            # keep the perturbed field inside the annulus: shrink toward
            # the midpoint if adding the step would cross the outer radius
            step = min(eps * hi, 0.49 * (hi - lo) if hi > lo else eps * hi)
            un = u.with_coeffs(u.coeffs + step * direction.coeffs)
            if renormed_norm(un, ctx) > hi or renormed_norm(un, ctx) < lo:
                un = u.with_coeffs(u.coeffs - step * direction.coeffs)
            tn = t + eps
            samples.append((un, u, tn, t))
    return samples


def verify_continuity_modulus(op: NonlinearOperator, samples, consts: ConstantsEstimate,
                              report: ThresholdReport, ctx: RenormContext) -> dict:
    """||A(u_n,t_n) - A(u,t)||_{H,1} <= d_eff |t_n - t|^theta
    + [nu M c3 / r + K u_plus] ||u_n - u||_{H,1} on every sample."""
    coef = continuity_bound_coefficient(op.nu, consts, report, ctx)
    d_eff = op.forcing.d_eff
    theta = op.forcing.theta
    worst = 0.0
    ok = True
    checked = 0
    for (un, u, tn, t) in samples:
        lhs = renormed_norm(
            u.with_coeffs(op.apply(un, tn).coeffs - op.apply(u, t).coeffs), ctx
        )
        du = renormed_norm(u.with_coeffs(un.coeffs - u.coeffs), ctx)
        rhs = d_eff * abs(tn - t) ** theta + coef * du
        if rhs == 0.0:
            if lhs > 0.0:
                ok = False
            continue
        ratio = lhs / rhs
        worst = max(worst, ratio)
        checked += 1
        if ratio > 1.0 + REL_SLACK:
            ok = False
    return {
        "check": "continuity_modulus",
        "count": checked,
        "bound_coefficient": coef,
        "worst_ratio": float(worst),
        "pass": ok,
    }
