import numpy as np
import pytest

from nselab.dissipativity import (check_strong_dissipative,
                                  check_zero_dissipative,
                                  continuity_bound_coefficient,
                                  make_continuity_samples,
                                  run_strong_dissipativity_check,
                                  run_zero_dissipativity_check, sample_annulus,
                                  verify_continuity_modulus)
from nselab.evolution import NonlinearOperator
from nselab.forcing import make_forcing
from nselab.renorm import renormed_norm
from nselab.thresholds import compute_thresholds


@pytest.fixture(scope="module")
def setting(ctx8, consts8):
    rep = compute_thresholds(1.0, 0.0, consts8, ctx8)
    op = NonlinearOperator(1.0, make_forcing("zero", ctx8.grid, ctx8), ctx8)
    return op, rep


def test_annulus_samples_land_in_range(ctx8, setting):
    op, rep = setting
    fields = sample_annulus(ctx8.grid, ctx8, rep, 55, "rng", 40)
    lo, hi = rep.u_minus, 0.5 * rep.u_plus
    for u in fields:
        x = renormed_norm(u, ctx8)
        assert lo - 1e-12 * hi <= x <= hi * (1 + 1e-12)
    # deterministic across calls
    again = sample_annulus(ctx8.grid, ctx8, rep, 55, "rng", 40)
    assert all(np.array_equal(a.coeffs, b.coeffs) for a, b in zip(fields, again))


def test_empty_annulus_rejected(ctx8, consts8):
    # gamma > 8/9 pushes u- above u+/2; the sampler must refuse
    f_crit = (1.0 * consts8.kappa) ** 2 / (4.0 * compute_thresholds(
        1.0, 0.0, consts8, ctx8).k_coef)
    rep = compute_thresholds(1.0, 0.95 * f_crit, consts8, ctx8)
    assert rep.admissible  # gamma < 1: roots real
    assert rep.u_minus > 0.5 * rep.u_plus  # but the annulus is empty
    with pytest.raises(ValueError, match="annulus"):
        sample_annulus(ctx8.grid, ctx8, rep, 1, "empty", 1)


def test_zero_dissipativity_holds_unforced(ctx8, setting):
    op, rep = setting
    out = run_zero_dissipativity_check(op, rep, ctx8, master=101, count=30)
    assert out["pass"]
    assert out["worst_value"] <= 0.0
    assert out["worst_margin"] >= 0.0
    assert out["check"] == "zero_dissipative" and out["count"] == 30


def test_zero_check_value_matches_energy_identity(ctx8, setting):
    op, rep = setting
    u = sample_annulus(ctx8.grid, ctx8, rep, 7, "ident", 1)[0]
    value, bound = check_zero_dissipative(u, 0.0, op, rep, ctx8)
    # unforced: <A(u), u>_{H,1} = -nu ||A^(1/2) u||^2_{H,1} + b_{H,1}(u,u,u)
    from nselab.convective import trilinear
    from nselab.operators import fractional_apply

    visc = -op.nu * renormed_norm(fractional_apply(u, 0.5), ctx8) ** 2
    conv = -trilinear(u, u, u, renormed=True, ctx=ctx8)
    assert value == pytest.approx(visc + conv, rel=1e-10)
    assert bound <= 0.0


def test_strong_dissipativity_holds_unforced(ctx8, setting):
    op, rep = setting
    out = run_strong_dissipativity_check(op, rep, ctx8, master=102, count=30)
    assert out["pass"]
    assert out["worst_excess"] <= 0.0
    assert out["delta"] == rep.delta


def test_strong_check_symmetric_in_swap(ctx8, setting):
    op, rep = setting
    u = sample_annulus(ctx8.grid, ctx8, rep, 8, "swap-a", 1)[0]
    v = sample_annulus(ctx8.grid, ctx8, rep, 8, "swap-b", 1)[0]
    g1, b1 = check_strong_dissipative(u, v, 0.0, op, rep, ctx8)
    g2, b2 = check_strong_dissipative(v, u, 0.0, op, rep, ctx8)
    assert g1 == pytest.approx(g2, rel=1e-12)
    assert b1 == pytest.approx(b2, rel=1e-12)


def test_dissipativity_fails_far_outside_ball(ctx8, consts8, setting):
    op, rep = setting
    # norm far above u+ makes the cubic term dominate: bound > 0 there
    base = sample_annulus(ctx8.grid, ctx8, rep, 9, "out", 1)[0]
    target = 3.0 * rep.u_plus
    u = base.with_coeffs(base.coeffs * (target / renormed_norm(base, ctx8)))
    _, bound = check_zero_dissipative(u, 0.0, op, rep, ctx8)
    assert bound > 0.0


def test_continuity_modulus(ctx8, consts8, setting):
    op, rep = setting
    samples = make_continuity_samples(ctx8, rep, master=103, bases=4)
    assert len(samples) == 12  # 4 bases x 3 scales
    for un, u, tn, t in samples:
        assert tn > t
        x = renormed_norm(un, ctx8)
        assert x <= 0.5 * rep.u_plus * (1 + 1e-9)
    out = verify_continuity_modulus(op, samples, consts8, rep, ctx8)
    assert out["pass"]
    assert out["worst_ratio"] <= 1.0 + 1e-8
    assert out["count"] == 12
    coef = continuity_bound_coefficient(op.nu, consts8, rep, ctx8)
    assert out["bound_coefficient"] == coef
    # the viscous part of the coefficient is exactly nu k2max with the
    # truncation value of c3
    visc_part = op.nu * consts8.m_equiv * consts8.c3 / ctx8.r
    assert visc_part == pytest.approx(op.nu * ctx8.k2max, rel=1e-12)


def test_continuity_with_forcing(ctx8, consts8):
    f = make_forcing("holder_modulated", ctx8.grid, ctx8, amplitude=1e-4,
                     theta=0.5, d=1.0, seed=3)
    rep = compute_thresholds(1.0, f.f_sup, consts8, ctx8)
    op = NonlinearOperator(1.0, f, ctx8)
    samples = make_continuity_samples(ctx8, rep, master=104, bases=3)
    out = verify_continuity_modulus(op, samples, consts8, rep, ctx8)
    assert out["pass"]
    zero_out = run_zero_dissipativity_check(op, rep, ctx8, master=105, count=20, t=2.0)
    assert zero_out["pass"]
