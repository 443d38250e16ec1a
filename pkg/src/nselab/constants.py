"""Estimation of every constant the dissipativity thresholds consume.

Smoothing constants and the reverse Poincare constant are exact optima
over the retained spectrum. The trilinear constant is empirical: the
max ratio over a seeded corpus, then pushed uphill by exact blockwise
maximization so that fresh samples from the same family stay below it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .convective import advect_adjoint_first_slot, convective_term, trilinear
from .field import FourierField, safe_norm
from .grid import Grid
from .operators import fractional_apply, fractional_solve, make_field_random, norm_h
from .renorm import RenormContext
from .seeding import sub_seed

TRILINEAR_EXPONENTS = (0.0, 1.0, 0.5)  # the (a1, a2, a3) triple driving every bound here


@dataclass
class ConstantsEstimate:
    m_equiv: float
    m1_equiv: float
    c: float
    c1: float
    c2: float
    c3: float
    alpha: float
    alpha_constructive: float
    alpha_sharp: float
    kappa: float
    lambda1: float
    log_m: float
    meta: dict = field(default_factory=dict)

    def as_dict(self) -> dict:
        return {
            "M": self.m_equiv,
            "M1": self.m1_equiv,
            "c": self.c,
            "c1": self.c1,
            "c2": self.c2,
            "c3": self.c3,
            "alpha": self.alpha,
            "alpha_constructive": self.alpha_constructive,
            "alpha_sharp": self.alpha_sharp,
            "kappa": self.kappa,
            "lambda1": self.lambda1,
            "log_M": self.log_m,
            "meta": self.meta,
        }


def estimate_smoothing_constant(ctx: RenormContext, z: float) -> float:
    """Smallest c_z with ||A^z T(r) u|| <= (c_z / r^z) ||u|| on the truncation.

    The per-mode factor is |k|^(2z) e^(-|k|^2 r), so
    c_z = r^z * max over active |k|^2 of (x^z e^(-x r)); the max is
    attained at an actual mode, which makes the bound sharp.
    """
    if z < 0:
        raise ValueError(f"power must be nonnegative, got {z}")
    x = ctx.grid.ksq_active.astype(np.float64)
    vals = x**z * np.exp(-x * ctx.r)
    return float(ctx.r**z * np.max(vals))


def smoothing_argmax_ksq(ctx: RenormContext, z: float) -> int:
    """The active |k|^2 achieving the c_z optimum (for saturation tests)."""
    x = ctx.grid.ksq_active.astype(np.float64)
    vals = x**z * np.exp(-x * ctx.r)
    return int(ctx.grid.ksq_active[int(np.argmax(vals))])


def compute_alpha(ctx: RenormContext, method: str = "lemma7_construction") -> float:
    """Reverse Poincare constant: alpha^(1/2) ||u||_{H,1} <= r^(1/2) ||A^(1/2) u||_{H,1}.

    lemma7_construction: alpha = (1 - max_k exp(-|k| sqrt(r)))^2, the
    value extracted from the semigroup-difference argument; the max of
    the multiplier sits on the lowest mode, so this equals
    (1 - exp(-sqrt(lambda1 r)))^2.
    sharp_spectral: alpha = r * lambda1, the per-mode optimum of
    r |k|^2 over the retained spectrum.
    Both satisfy the inequality mode-wise; construction <= sharp always.
    """
    lam = ctx.lambda1
    if method == "lemma7_construction":
        return (1.0 - math.exp(-math.sqrt(lam * ctx.r))) ** 2
    if method == "sharp_spectral":
        return ctx.r * lam
    raise ValueError(f"unknown alpha method {method!r}")


def compute_c3(ctx: RenormContext) -> float:
    """Constant in ||A u||_{H,1} <= (M c3 / r) ||u||_{H,1}.

    On the truncation ||A u||_{H,1} <= k2max ||u||_{H,1} is sharp, so
    c3 = k2max * r / M; it shrinks with the equivalence constant."""
    return ctx.k2max * ctx.r * math.exp(-ctx.log_m)


def trilinear_ratio(u: FourierField, v: FourierField, w: FourierField) -> float:
    """|b(u,v,w)| / (||u|| ||A v|| ||A^(1/4) w||); 0 on degenerate input."""
    du = norm_h(u)
    dv = norm_h(fractional_apply(v, 1.0))
    dw = norm_h(fractional_apply(w, 0.25))
    if du == 0.0 or dv == 0.0 or dw == 0.0:
        return 0.0
    return abs(trilinear(u, v, w)) / (du * dv * dw)


def _unit(f: FourierField) -> FourierField:
    n = safe_norm(f.coeffs)
    if n == 0.0:
        return f
    return f.with_coeffs(f.coeffs / n)


def refine_trilinear_ratio(u, v, w, iters: int = 200, tol: float = 1e-14):
    """Blockwise exact ascent on the trilinear ratio.

    Each block solves its one-argument maximization in closed form:
    the u slot peaks at the projected advection adjoint of (v, w), the
    v slot at A^(-2) of the w-slot adjoint, the w slot at A^(-1/2) C(u,v).
    The ratio is scale invariant, so every update is renormalized.
    Independent starts land on the same peak to ~1e-9 relative, which
    is what makes the refined constant reproducible across corpora.
    Returns (ratio, u, v, w).
    """
    best = trilinear_ratio(u, v, w)
    for _ in range(iters):
        cand = advect_adjoint_first_slot(v, w)
        if safe_norm(cand.coeffs) > 0:
            u = _unit(cand)
        cand = fractional_solve(convective_term(u, w), 2.0)
        if safe_norm(cand.coeffs) > 0:
            v = _unit(cand)
        cand = fractional_solve(convective_term(u, v), 0.5)
        if safe_norm(cand.coeffs) > 0:
            w = _unit(cand)
        now = trilinear_ratio(u, v, w)
        if now <= best * (1.0 + tol):
            best = max(best, now)
            break
        best = now
    return best, u, v, w


def sample_corpus(g: Grid, master: int, label: str, count: int, spectrum_decay: float = 1.5):
    """Deterministic list of (u, v, w) triples for ratio estimation."""
    triples = []
    for i in range(count):
        seeds = [sub_seed(master, f"{label}-{slot}", i) for slot in ("u", "v", "w")]
        triples.append(tuple(make_field_random(g, s, spectrum_decay) for s in seeds))
    return triples


def estimate_trilinear_constant(g: Grid, master: int, count: int = 200,
                                refine_iters: int = 200, refine_top: int = 3,
                                spectrum_decay: float = 1.5):
    """Empirical constant for |b(u,v,w)| <= c ||u|| ||A v|| ||A^(1/4) w||.

    Max over a seeded corpus, then ascent refinement from the best few
    samples. Returns (c_hat, meta dict with the sampling record).
    """
    triples = sample_corpus(g, master, "trilinear-corpus", count, spectrum_decay)
    ratios = np.array([trilinear_ratio(*t) for t in triples])
    skipped = int(np.sum(ratios == 0.0))
    order = np.argsort(ratios)[::-1]
    c_hat = float(ratios[order[0]]) if len(ratios) else 0.0
    refined_from = []
    for rank in range(min(refine_top, len(order))):
        idx = int(order[rank])
        peak, _, _, _ = refine_trilinear_ratio(*triples[idx], iters=refine_iters)
        refined_from.append({"sample": idx, "start": float(ratios[idx]), "peak": peak})
        c_hat = max(c_hat, peak)
    meta = {
        "corpus_count": count,
        "corpus_skipped": skipped,
        "spectrum_decay": spectrum_decay,
        "master_seed": int(master),
        "seed_labels": ["trilinear-corpus-u", "trilinear-corpus-v", "trilinear-corpus-w"],
        "corpus_max": float(ratios[order[0]]) if len(ratios) else 0.0,
        "refine_iters": refine_iters,
        "refined": refined_from,
        "exponents": list(TRILINEAR_EXPONENTS),
    }
    return c_hat, meta


def estimate_constants(ctx: RenormContext, master: int, corpus_count: int = 200,
                       refine_iters: int = 200, alpha_method: str = "lemma7_construction",
                       spectrum_decay: float = 1.5) -> ConstantsEstimate:
    """All constants for one renorm context, with their sampling record."""
    c_hat, meta = estimate_trilinear_constant(
        ctx.grid, master, corpus_count, refine_iters, spectrum_decay=spectrum_decay
    )
    alpha_cons = compute_alpha(ctx, "lemma7_construction")
    alpha_sharp = compute_alpha(ctx, "sharp_spectral")
    alpha = alpha_cons if alpha_method == "lemma7_construction" else alpha_sharp
    meta["alpha_method"] = alpha_method
    return ConstantsEstimate(
        m_equiv=ctx.m_equiv,
        m1_equiv=ctx.m1_equiv,
        c=c_hat,
        c1=estimate_smoothing_constant(ctx, 1.0),
        c2=estimate_smoothing_constant(ctx, 0.25),
        c3=compute_c3(ctx),
        alpha=alpha,
        alpha_constructive=alpha_cons,
        alpha_sharp=alpha_sharp,
        kappa=alpha / ctx.r,
        lambda1=ctx.lambda1,
        log_m=ctx.log_m,
        meta=meta,
    )
