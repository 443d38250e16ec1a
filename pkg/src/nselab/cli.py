"""Command-line front end: certify / verify / simulate / sweep.

Exit codes: 0 success; 1 a verification or ball-membership check
failed; 2 certificate infeasible (gamma >= 1 or empty annulus);
3 integrator failure (resolvent stall or explicit blow-up); 64 usage
(bad flags, bad config, dt above the certified cap).
"""

from __future__ import annotations

import argparse
import itertools
import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor

from .certificate import (apply_constant_overrides, build_certificate,
                          holder_modulus_check, plain)
from .config import (ConfigError, RunConfig, apply_overrides, constant_overrides,
                     load_config)
from .constants import (TRILINEAR_EXPONENTS, compute_alpha, estimate_constants,
                        sample_corpus)
from .convective import convective_term, make_sample
from .evolution import (InstabilityError, ResolventError, evolve_exponential,
                        evolve_implicit_euler, monitor_solution_class)
from .field import read_snapshot, write_snapshot
from .forcing import make_forcing
from .grid import grid
from .operators import make_field_random, norm_h
from .renorm import make_context, renormed_norm
from .seeding import sub_seed
from .thresholds import compute_thresholds
from .verify import (verify_renormed_bounds, verify_reverse_poincare,
                     verify_smoothing_bound, verify_trilinear_estimate)

USAGE_EXIT = 64


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(USAGE_EXIT)


def _build_parser() -> _Parser:
    parser = _Parser(prog="nselab",
                     description="spectral certification lab for the dissipative "
                                 "threshold theory on the periodic 3-torus")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_ in (
        ("certify", "estimate constants, compute thresholds, run dissipativity checks"),
        ("verify", "re-verify every certified inequality on fresh samples"),
        ("simulate", "march the implicit-Euler (or exponential) flow and trace it"),
        ("sweep", "tabulate thresholds over nu/r/f/N axes"),
    ):
        p = sub.add_parser(name, help=help_)
        p.add_argument("--config", default=None, help="path to key=value config file")
        p.add_argument("--seed", type=int, default=None, help="master seed override")
        p.add_argument("--out", default=None, help="output directory override")
        p.add_argument("--override", action="append", default=[],
                       metavar="KEY=VALUE", help="config override (repeatable)")
    return parser


def _load(args) -> RunConfig:
    cfg = load_config(args.config)
    if args.override:
        cfg = apply_overrides(cfg, args.override)
    if args.seed is not None:
        cfg = apply_overrides(cfg, [f"seed={args.seed}"])
    if args.out is not None:
        cfg = apply_overrides(cfg, [f"out={args.out}"])
    return cfg


def _outdir(cfg: RunConfig) -> str:
    os.makedirs(cfg.out, exist_ok=True)
    return cfg.out


def _write_json(path: str, payload: dict) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(plain(payload), fh, indent=2, sort_keys=True)
        fh.write("\n")


def _setting(cfg: RunConfig):
    g = grid(cfg.grid_n)
    ctx = make_context(g, cfg.r, omega=cfg.omega)
    forcing = make_forcing(cfg.forcing_kind, g, ctx, amplitude=cfg.forcing_amplitude,
                           theta=cfg.forcing_theta, d=cfg.forcing_d,
                           seed=sub_seed(cfg.seed, "forcing-base", cfg.forcing_seed),
                           spectrum_decay=cfg.forcing_decay)
    return g, ctx, forcing


def cmd_certify(cfg: RunConfig) -> int:
    out = _outdir(cfg)
    g, ctx, forcing = _setting(cfg)
    cert = build_certificate(
        ctx, cfg.nu, forcing, cfg.seed,
        corpus_count=cfg.corpus_count, refine_iters=cfg.refine_iters,
        check_count=cfg.check_count, continuity_bases=cfg.continuity_bases,
        range_count=cfg.range_count, holder_pairs=cfg.holder_pairs,
        alpha_method=cfg.alpha_method, spectrum_decay=cfg.spectrum_decay,
        constant_overrides=constant_overrides(cfg),
    )
    path = os.path.join(out, "certificate.json")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(cert.to_json())
        fh.write("\n")
    th = cert.thresholds
    print(f"certify: N={cfg.grid_n} nu={cfg.nu:g} r={cfg.r:g} f_sup={forcing.f_sup:g}")
    print(f"  gamma={th['gamma']:.6e} u_minus={th['u_minus']:.6e} "
          f"u_plus={th['u_plus']:.6e} delta={th['delta']:.6e} nu_min={th['nu_min']:.6e}")
    for ch in cert.checks:
        print(f"  check {ch['check']}: {'pass' if ch['pass'] else 'FAIL'}")
    print(f"  admissible={cert.admissible} certified={cert.certified} -> {path}")
    if not cert.admissible or not cert.annulus_nonempty:
        return 2
    return 0 if cert.certified else 1


def _write_witness(report: dict, out: str, name: str) -> None:
    fields = report.pop("_witness_fields", None)
    slots = report.pop("_witness_slots", ("u", "v", "w"))
    if fields is None:
        return
    paths = []
    for slot, fld in zip(slots, fields):
        path = os.path.join(out, f"witness_{name}_{slot}.nsfld")
        write_snapshot(fld, path, {"check": name, "slot": slot,
                                   "norm_H": norm_h(fld)})
        paths.append(path)
    report["witness_paths"] = paths


def cmd_verify(cfg: RunConfig) -> int:
    out = _outdir(cfg)
    g, ctx, forcing = _setting(cfg)
    consts = estimate_constants(ctx, cfg.seed, corpus_count=cfg.corpus_count,
                                refine_iters=cfg.refine_iters,
                                alpha_method=cfg.alpha_method,
                                spectrum_decay=cfg.spectrum_decay)
    consts, _ = apply_constant_overrides(consts, constant_overrides(cfg))
    seeds = {"master": cfg.seed, "label": "verify-corpus", "count": cfg.verify_count}
    triples = sample_corpus(g, cfg.seed, "verify-corpus", cfg.verify_count,
                            spectrum_decay=cfg.spectrum_decay)
    samples = [make_sample(u, v, w, ctx) for (u, v, w) in triples]

    reports = {}
    reports["trilinear"] = verify_trilinear_estimate(
        samples, *TRILINEAR_EXPONENTS, c=consts.c, seeds=seeds,
        search_iters=cfg.search_iters)
    reports["renormed"] = verify_renormed_bounds(
        ctx, consts, samples, seeds=seeds, search_iters=cfg.search_iters)

    fields = [make_field_random(g, sub_seed(cfg.seed, "verify-fields", i), 2.0)
              for i in range(cfg.check_count)]
    field_seeds = {"master": cfg.seed, "label": "verify-fields", "count": cfg.check_count}
    poincare = []
    for method in ("lemma7_construction", "sharp_spectral"):
        poincare.append(verify_reverse_poincare(
            ctx, compute_alpha(ctx, method), fields, method=method, seeds=field_seeds))
    reports["poincare"] = {"check": "reverse_poincare", "methods": poincare,
                           "pass": all(p["pass"] for p in poincare)}
    smoothing = [verify_smoothing_bound(ctx, z, fields, seeds=field_seeds)
                 for z in (1.0, 0.25)]
    reports["smoothing"] = {"check": "smoothing_bound", "orders": smoothing,
                            "pass": all(s["pass"] for s in smoothing)}
    reports["holder"] = holder_modulus_check(forcing, ctx, cfg.seed, cfg.holder_pairs)

    if cfg.grid_n <= 8:
        worst = 0.0
        for i in range(10):
            a = make_field_random(g, sub_seed(cfg.seed, "verify-oracle-a", i), 1.0)
            b = make_field_random(g, sub_seed(cfg.seed, "verify-oracle-b", i), 1.0)
            fast = convective_term(a, b, "pseudospectral")
            slow = convective_term(a, b, "convolution_oracle")
            denom = norm_h(slow)
            if denom > 0:
                worst = max(worst, norm_h(fast.with_coeffs(fast.coeffs - slow.coeffs)) / denom)
        reports["oracle"] = {"check": "convolution_oracle_equivalence",
                             "pairs": 10, "worst_rel_err": worst,
                             "pass": worst < 1e-10}

    failing = []
    for name, rep in reports.items():
        _write_witness(rep, out, name)
        _write_json(os.path.join(out, f"verify_{name}.json"), rep)
        status = "pass" if rep["pass"] else "FAIL"
        print(f"verify {name}: {status}")
        if not rep["pass"]:
            failing.append(name)
    if failing:
        print(f"failed: {', '.join(failing)}")
        for name in failing:
            for p in reports[name].get("witness_paths", []):
                print(f"  witness: {p}")
        return 1
    return 0


def cmd_simulate(cfg: RunConfig) -> int:
    out = _outdir(cfg)
    g, ctx, forcing = _setting(cfg)
    consts = estimate_constants(ctx, cfg.seed, corpus_count=cfg.corpus_count,
                                refine_iters=cfg.refine_iters,
                                alpha_method=cfg.alpha_method,
                                spectrum_decay=cfg.spectrum_decay)
    consts, _ = apply_constant_overrides(consts, constant_overrides(cfg))
    report = compute_thresholds(cfg.nu, forcing.f_sup, consts, ctx)
    if cfg.dt > report.step_cap:
        print(f"nselab simulate: error: config field 'dt': {cfg.dt:g} exceeds the "
              f"certified step cap {report.step_cap:.6e}", file=sys.stderr)
        return USAGE_EXIT

    if cfg.initial_snapshot:
        u0 = read_snapshot(cfg.initial_snapshot)
        if u0.grid.n != cfg.grid_n:
            print(f"nselab simulate: error: config field 'initial_snapshot': grid "
                  f"N={u0.grid.n} does not match grid_n={cfg.grid_n}", file=sys.stderr)
            return USAGE_EXIT
    else:
        u0 = make_field_random(g, sub_seed(cfg.seed, "initial", cfg.initial_seed),
                               cfg.forcing_decay)
        target = cfg.initial_scale
        if target == 0.0:
            half = 0.5 * report.u_plus
            target = 0.5 * (report.u_minus + half) if report.admissible else 1.0
        u0 = u0.with_coeffs(u0.coeffs * (target / renormed_norm(u0, ctx)))

    evolve = evolve_implicit_euler if cfg.integrator == "implicit_euler" \
        else evolve_exponential
    kwargs = {"report": report}
    if cfg.integrator == "implicit_euler":
        kwargs.update(tol=cfg.tol, max_iter=cfg.max_iter,
                      snapshot_every=cfg.snapshot_every, out_dir=out)
    try:
        trace = evolve(u0, cfg.dt, cfg.t_end, cfg.nu, forcing, ctx, **kwargs)
    except ResolventError as exc:
        print(f"simulate: resolvent stalled at step {exc.step}: residual "
              f"{exc.residual:.3e} after {exc.iterations} iterations", file=sys.stderr)
        return 3
    except InstabilityError as exc:
        print(f"simulate: {exc}", file=sys.stderr)
        return 3

    trace_path = os.path.join(out, "trace.csv")
    trace.write_csv(trace_path)
    monitor = monitor_solution_class(trace)
    monitor["thresholds"] = report.as_dict()
    monitor["initial_norm_H1"] = renormed_norm(u0, ctx)
    _write_json(os.path.join(out, "monitor.json"), monitor)
    print(f"simulate: {monitor['rows']} rows -> {trace_path}")
    print(f"  ball exits: {monitor['ball_exit_events']}  "
          f"sup ||u||_V: {monitor['sup_norm_V']:.6e}")
    for w in monitor["warnings"]:
        print(f"  warning: {w}")
    return 1 if monitor["ever_outside_ball"] else 0


def _sweep_axes(cfg: RunConfig):
    return (
        list(cfg.sweep_n) or [cfg.grid_n],
        list(cfg.sweep_r) or [cfg.r],
        list(cfg.sweep_nu) or [cfg.nu],
        list(cfg.sweep_f) or [cfg.forcing_amplitude],
    )


def _worker_cap() -> int:
    env = os.environ.get("NSE_LAB_THREADS", "").strip()
    if env:
        return max(1, int(env))
    return min(4, os.cpu_count() or 1)


def cmd_sweep(cfg: RunConfig) -> int:
    out = _outdir(cfg)
    ns, rs, nus, fs = _sweep_axes(cfg)
    cells = list(itertools.product(ns, rs, nus, fs))
    print(f"sweep: {len(cells)} cells "
          f"({len(ns)} N x {len(rs)} r x {len(nus)} nu x {len(fs)} f)")

    # constants depend on (N, r) only; estimate each combination once
    combos = sorted({(n, r) for (n, r, _, _) in cells})

    def estimate(combo):
        try:
            n, r = combo
            ctx = make_context(grid(n), r, omega=cfg.omega)
            consts = estimate_constants(ctx, cfg.seed, corpus_count=cfg.corpus_count,
                                        refine_iters=cfg.refine_iters,
                                        alpha_method=cfg.alpha_method,
                                        spectrum_decay=cfg.spectrum_decay)
            consts, _ = apply_constant_overrides(consts, constant_overrides(cfg))
            return combo, (ctx, consts), None
        except Exception as exc:  # per-cell failure stays in-row
            return combo, None, str(exc)

    cache = {}
    errors = {}
    workers = min(_worker_cap(), len(combos))
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(estimate, combos))
    else:
        results = [estimate(combo) for combo in combos]
    for combo, payload, err in results:
        if err is None:
            cache[combo] = payload
        else:
            errors[combo] = err

    header = "n,r,nu,f,alpha,M,gamma,u_minus,u_plus,delta,nu_min,admissible,error"
    rows = [header]
    for (n, r, nu, f_amp) in cells:
        key = (n, r)
        if key in errors:
            rows.append(f"{n},{r!r},{nu!r},{f_amp!r},,,,,,,,,{errors[key]}")
            continue
        ctx, consts = cache[key]
        try:
            rep = compute_thresholds(nu, f_amp, consts, ctx)
            rows.append(
                f"{n},{r!r},{nu!r},{f_amp!r},{consts.alpha!r},{consts.m_equiv!r},"
                f"{rep.gamma!r},{rep.u_minus!r},{rep.u_plus!r},{rep.delta!r},"
                f"{rep.nu_min!r},{int(rep.admissible)},"
            )
        except Exception as exc:
            rows.append(f"{n},{r!r},{nu!r},{f_amp!r},,,,,,,,,{exc}")
    path = os.path.join(out, "sweep.csv")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(rows) + "\n")
    print(f"sweep: wrote {len(rows) - 1} rows -> {path}")
    return 0


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if exc.code is not None else 0
    try:
        cfg = _load(args)
    except (ConfigError, OSError) as exc:
        print(f"nselab {args.command}: error: {exc}", file=sys.stderr)
        return USAGE_EXIT
    handler = {"certify": cmd_certify, "verify": cmd_verify,
               "simulate": cmd_simulate, "sweep": cmd_sweep}[args.command]
    try:
        return handler(cfg)
    except ConfigError as exc:
        print(f"nselab {args.command}: error: {exc}", file=sys.stderr)
        return USAGE_EXIT


if __name__ == "__main__":
    sys.exit(main())
