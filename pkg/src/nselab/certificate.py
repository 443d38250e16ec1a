"""Assembly of the full certificate: constants, thresholds, and the
randomized dissipativity checks, as one JSON-ready report."""

from __future__ import annotations

import dataclasses
import json
from dataclasses import dataclass, field
from datetime import datetime, timezone

import numpy as np

from .constants import ConstantsEstimate, estimate_constants
from .dissipativity import (make_continuity_samples, run_strong_dissipativity_check,
                            run_zero_dissipativity_check, sample_annulus,
                            verify_continuity_modulus)
from .evolution import NonlinearOperator, ResolventError, resolvent_solve, verify_holder_modulus
from .forcing import ForcingModel
from .renorm import RenormContext
from .seeding import generator
from .thresholds import ThresholdReport, compute_thresholds

OVERRIDABLE_CONSTANTS = ("c", "c1", "c2", "alpha")


def plain(obj):
    """Recursively strip numpy scalar types so json.dumps stays happy."""
    if isinstance(obj, dict):
        return {k: plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [plain(v) for v in obj]
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    return obj


@dataclass
class CertificateReport:
    constants: dict
    thresholds: dict
    checks: list
    admissible: bool
    annulus_nonempty: bool
    certified: bool
    meta: dict = field(default_factory=dict)

    def as_dict(self) -> dict:
        return plain({
            "constants": self.constants,
            "thresholds": self.thresholds,
            "checks": self.checks,
            "admissible": self.admissible,
            "annulus_nonempty": self.annulus_nonempty,
            "certified": self.certified,
            "meta": self.meta,
        })

    def to_json(self, indent: int = 2) -> str:
        return json.dumps(self.as_dict(), indent=indent, sort_keys=True)


def apply_constant_overrides(consts: ConstantsEstimate, overrides: dict | None):
    """Replace selected constants (tamper injection / what-if analysis).

    kappa tracks alpha/r, so an alpha override updates it too."""
    if not overrides:
        return consts, {}
    applied = {}
    fields = {}
    for name, value in overrides.items():
        if name not in OVERRIDABLE_CONSTANTS:
            raise ValueError(f"constant {name!r} is not overridable "
                             f"(choose from {OVERRIDABLE_CONSTANTS})")
        if not (value > 0):
            raise ValueError(f"override {name} must be positive, got {value}")
        applied[name] = float(value)
        fields[name] = float(value)
    if "alpha" in fields:
        fields["kappa"] = fields["alpha"] / (consts.alpha / consts.kappa)
    out = dataclasses.replace(consts, **fields)
    meta = dict(out.meta)
    meta["overrides"] = applied
    out = dataclasses.replace(out, meta=meta)
    return out, applied


def resolvent_range_check(op: NonlinearOperator, report: ThresholdReport,
                          ctx: RenormContext, master: int, count: int = 20,
                          tol: float = 1e-12, t: float = 0.0) -> dict:
    """Solvability of (I + beta nu A + beta C)(u) = b across the ball:
    random b with ||b||_{H,1} <= u_plus/2, beta at the certified step cap."""
    fields = sample_annulus(ctx.grid, ctx, report, master, "range", count)
    beta = report.step_cap
    worst_res = 0.0
    max_iters = 0
    failures = []
    for i, b in enumerate(fields):
        try:
            res = resolvent_solve(b, beta, t, op.nu, op.forcing, ctx, tol=tol)
        except ResolventError as exc:
            failures.append({"sample": i, "residual": exc.residual,
                             "iterations": exc.iterations})
            continue
        worst_res = max(worst_res, res.residual)
        max_iters = max(max_iters, res.iterations)
    return {
        "check": "resolvent_range",
        "count": count,
        "beta": beta,
        "tol": tol,
        "seed": {"master": int(master), "label": "range"},
        "worst_residual": float(worst_res),
        "max_iterations": int(max_iters),
        "failures": failures,
        "pass": not failures,
    }


def holder_modulus_check(f: ForcingModel, ctx: RenormContext, master: int,
                         count: int = 64, horizon: float = 4.0) -> dict:
    rng = generator(master, "holder-times", 0)
    pairs = [tuple(sorted(rng.uniform(0.0, horizon, size=2))) for _ in range(count)]
    out = verify_holder_modulus(f, pairs, ctx)
    out["check"] = "holder_modulus"
    out["seed"] = {"master": int(master), "label": "holder-times"}
    return out


def build_certificate(ctx: RenormContext, nu: float, forcing: ForcingModel,
                      master: int, corpus_count: int = 200, refine_iters: int = 200,
                      check_count: int = 100, continuity_bases: int = 8,
                      range_count: int = 20, holder_pairs: int = 64,
                      alpha_method: str = "lemma7_construction",
                      spectrum_decay: float = 1.5,
                      constant_overrides: dict | None = None,
                      consts: ConstantsEstimate | None = None) -> CertificateReport:
    """Estimate constants, compute thresholds, and certify dissipativity
    on the annulus by seeded randomized checks.

    Passing consts skips estimation (reuse across workflows). The checks
    run only when the thresholds are admissible and the annulus
    [u_minus, u_plus/2] is nonempty; otherwise the report carries the
    infeasibility verdict alone.
    """
    if consts is None:
        consts = estimate_constants(ctx, master, corpus_count=corpus_count,
                                    refine_iters=refine_iters,
                                    alpha_method=alpha_method,
                                    spectrum_decay=spectrum_decay)
    consts, applied = apply_constant_overrides(consts, constant_overrides)
    report = compute_thresholds(nu, forcing.f_sup, consts, ctx)
    annulus_nonempty = report.admissible and report.u_minus <= 0.5 * report.u_plus
    checks = []
    if annulus_nonempty:
        op = NonlinearOperator(nu, forcing, ctx)
        checks.append(run_zero_dissipativity_check(op, report, ctx, master, check_count))
        checks.append(run_strong_dissipativity_check(op, report, ctx, master, check_count))
        cont_samples = make_continuity_samples(ctx, report, master, bases=continuity_bases)
        checks.append(verify_continuity_modulus(op, cont_samples, consts, report, ctx))
        checks.append(resolvent_range_check(op, report, ctx, master, range_count))
        checks.append(holder_modulus_check(forcing, ctx, master, holder_pairs))
    all_pass = annulus_nonempty and all(ch["pass"] for ch in checks)
    return CertificateReport(
        constants=consts.as_dict(),
        thresholds=report.as_dict(),
        checks=checks,
        admissible=report.admissible,
        annulus_nonempty=annulus_nonempty,
        certified=bool(report.admissible and all_pass),
        meta={
            "grid_n": ctx.grid.n,
            "r": ctx.r,
            "omega": ctx.omega,
            "nu": nu,
            "forcing": forcing.as_dict(),
            "master_seed": int(master),
            "check_count": check_count,
            "constant_overrides": applied,
            "timestamp": datetime.now(timezone.utc).isoformat(),
        },
    )
