import math

import numpy as np
import pytest

from nselab.evolution import (InstabilityError, NonlinearOperator,
                              ResolventError, SimulationTrace,
                              evolve_exponential, evolve_implicit_euler,
                              exponential_step_cap, monitor_solution_class,
                              resolvent_solve, verify_holder_modulus)
from nselab.field import read_snapshot, single_mode_field
from nselab.forcing import make_forcing
from nselab.operators import make_field_random, norm_h
from nselab.renorm import renormed_norm
from nselab.seeding import sub_seed
from nselab.thresholds import compute_thresholds


def _scaled(g, ctx, tag, target):
    u = make_field_random(g, sub_seed(41, tag, 0))
    return u.with_coeffs(u.coeffs * (target / renormed_norm(u, ctx)))


@pytest.fixture(scope="module")
def zero_f(ctx8):
    return make_forcing("zero", ctx8.grid, ctx8)


def test_resolvent_beta_zero(g8, ctx8, zero_f):
    b = make_field_random(g8, sub_seed(41, "rz", 0))
    res = resolvent_solve(b, 0.0, 0.0, 1.0, zero_f, ctx8)
    assert res.field is b and res.iterations == 0 and res.residual == 0.0


def test_resolvent_linear_mode_exact(g8, ctx8, zero_f):
    # shear mode: C(u, u) = 0, so the solve is the diagonal division;
    # beta nu |k|^2 = 1 halves the mode
    b = single_mode_field(g8, (2, 0, 0), (0.0, 1.0, 0.0))
    res = resolvent_solve(b, 0.25, 0.0, 1.0, zero_f, ctx8)
    assert res.iterations == 0
    assert np.allclose(res.field.coeffs, 0.5 * b.coeffs, rtol=1e-14, atol=1e-18)


def test_resolvent_converges_and_validates(g8, ctx8, zero_f):
    b = _scaled(g8, ctx8, "conv", 1e-3)
    res = resolvent_solve(b, 0.05, 0.0, 1.0, zero_f, ctx8, tol=1e-13)
    assert res.residual <= 1e-13 * renormed_norm(b, ctx8)
    assert res.iterations < 10
    with pytest.raises(ValueError):
        resolvent_solve(b, -0.1, 0.0, 1.0, zero_f, ctx8)
    with pytest.raises(ValueError):
        resolvent_solve(b, 0.1, 0.0, 1.0, zero_f, ctx8, tol=0.0)


def test_resolvent_failure_reports_iterations(g8, ctx8, zero_f):
    big = _scaled(g8, ctx8, "diverge", 500.0)
    with pytest.raises(ResolventError) as exc:
        resolvent_solve(big, 5.0, 0.0, 1e-4, zero_f, ctx8, max_iter=8)
    assert exc.value.iterations <= 8
    assert exc.value.residual > 0  # inf on divergence, finite on stall


def test_implicit_euler_decays_unforced(g8, ctx8, consts8, zero_f):
    rep = compute_thresholds(1.0, 0.0, consts8, ctx8)
    u0 = _scaled(g8, ctx8, "decay", 0.25 * rep.u_plus)
    trace = evolve_implicit_euler(u0, 0.05, 1.0, 1.0, zero_f, ctx8, report=rep)
    assert len(trace.times) == 21
    h1 = trace.norm_h1
    assert all(b <= a * (1 + 1e-12) for a, b in zip(h1, h1[1:]))
    assert all(flag == 1 for flag in trace.in_ball)
    assert trace.meta["warnings"] == []
    mon = monitor_solution_class(trace)
    assert mon["rows"] == 21
    assert mon["ball_exit_events"] == 0
    assert not mon["ever_outside_ball"]
    assert mon["started_inside_ball"]
    assert mon["integral_normH_sq"] > 0
    assert mon["max_divergence"] < 1e-12


def test_outside_ball_start_warns(g8, ctx8, consts8, zero_f):
    rep = compute_thresholds(1.0, 0.0, consts8, ctx8)
    u0 = _scaled(g8, ctx8, "outside", 2.0 * rep.u_plus)
    trace = evolve_implicit_euler(u0, 0.05, 0.2, 1.0, zero_f, ctx8, report=rep)
    assert any("outside" in w for w in trace.meta["warnings"])
    mon = monitor_solution_class(trace)
    assert not mon["started_inside_ball"]


def test_implicit_euler_first_order_on_stokes(g8, ctx8, zero_f):
    # pure decay mode: exact solution e^(-t); implicit Euler error is O(dt)
    u0 = single_mode_field(g8, (1, 0, 0), (0.0, 0.0, 1.0), amplitude=1e-3)
    exact = norm_h(u0) * math.exp(-1.0)
    errs = []
    for dt in (0.1, 0.05):
        trace = evolve_implicit_euler(u0, dt, 1.0, 1.0, zero_f, ctx8)
        errs.append(abs(trace.norm_h[-1] - exact))
    ratio = errs[0] / errs[1]
    assert 1.6 < ratio < 2.4


def test_resolvent_error_carries_step(g8, ctx8, zero_f):
    big = _scaled(g8, ctx8, "step", 500.0)
    with pytest.raises(ResolventError) as exc:
        evolve_implicit_euler(big, 5.0, 10.0, 1e-4, zero_f, ctx8, max_iter=6)
    assert exc.value.step == 1


def test_integrators_agree_for_small_dt(g8, ctx8, zero_f):
    u0 = _scaled(g8, ctx8, "agree", 1e-3)
    dt, t_end = 0.005, 0.25
    a = evolve_implicit_euler(u0, dt, t_end, 1.0, zero_f, ctx8)
    b = evolve_exponential(u0, dt, t_end, 1.0, zero_f, ctx8)
    gap = abs(a.norm_h[-1] - b.norm_h[-1])
    assert gap <= 5.0 * dt * norm_h(u0)


def test_exponential_instability_detected(g8, ctx8, zero_f):
    u0 = _scaled(g8, ctx8, "blow", 50.0)
    cap = exponential_step_cap(u0, ctx8)
    assert cap == pytest.approx(
        1.0 / (2.0 * math.sqrt(ctx8.k2max) * max(1.0, norm_h(u0))), rel=1e-15)
    with pytest.raises(InstabilityError) as exc:
        evolve_exponential(u0, 0.5, 5.0, 1e-6, zero_f, ctx8)
    assert exc.value.norm_after > 10.0 * exc.value.norm_before or not math.isfinite(
        exc.value.norm_after)
    assert exc.value.step >= 1


def test_step_validation(g8, ctx8, zero_f):
    u0 = _scaled(g8, ctx8, "val", 1e-3)
    with pytest.raises(ValueError):
        evolve_implicit_euler(u0, 0.0, 1.0, 1.0, zero_f, ctx8)
    with pytest.raises(ValueError):
        evolve_exponential(u0, 0.1, -1.0, 1.0, zero_f, ctx8)


def test_trace_csv_and_snapshots(tmp_path, g8, ctx8, zero_f):
    u0 = _scaled(g8, ctx8, "csv", 1e-3)
    trace = evolve_implicit_euler(u0, 0.05, 0.2, 1.0, zero_f, ctx8,
                                  snapshot_every=2, out_dir=str(tmp_path))
    csv = tmp_path / "trace.csv"
    trace.write_csv(csv)
    lines = csv.read_text().splitlines()
    assert lines[0] == "t,norm_H,norm_H1,norm_V,norm_A_half,in_ball,resolvent_iters,residual"
    assert len(lines) == len(trace.times) + 1
    first = lines[1].split(",")
    assert float(first[0]) == 0.0 and int(first[5]) == 1
    assert trace.meta["snapshots"] == [str(tmp_path / "state_000002.nsfld"),
                                       str(tmp_path / "state_000004.nsfld")]
    back = read_snapshot(trace.meta["snapshots"][0])
    assert back.grid is g8
    assert SimulationTrace.CSV_HEADER == lines[0]


def test_holder_modulus_verifier(ctx8):
    g = ctx8.grid
    f = make_forcing("holder_modulated", g, ctx8, amplitude=1e-3, theta=0.5,
                     d=1.0, seed=sub_seed(41, "hold", 0))
    rng = np.random.default_rng(7)
    pairs = [(float(a), float(b)) for a, b in rng.uniform(0, 3, (32, 2))]
    pairs.append((1.0, 1.0))
    u = _scaled(g, ctx8, "holdu", 1e-3)
    rep = verify_holder_modulus(f, pairs, ctx8, nu=1.0, u=u)
    assert rep["pass"] and rep["includes_operator_check"]
    assert rep["pairs_checked"] == 32 and rep["pairs_trivial"] == 1
    assert rep["worst_ratio"] <= 1.0 + 1e-8
    z = make_forcing("zero", g, ctx8)
    rep0 = verify_holder_modulus(z, pairs, ctx8)
    assert rep0["pass"] and rep0["d_eff"] == 0.0
    assert not rep0["includes_operator_check"]


def test_nonlinear_operator_consistency(ctx8, zero_f):
    g = ctx8.grid
    op = NonlinearOperator(0.7, zero_f, ctx8)
    u = _scaled(g, ctx8, "opc", 1e-2)
    out = op.apply(u, 0.0)
    # A(u, t) = -nu A u - C(u, u): recompute from parts
    from nselab.convective import convective_term
    from nselab.operators import stokes_apply

    manual = -0.7 * stokes_apply(u).coeffs - convective_term(u, u).coeffs
    assert np.allclose(out.coeffs, manual, rtol=1e-14, atol=1e-20)
