import numpy as np
import pytest

from nselab.field import single_mode_field
from nselab.operators import make_field_random, norm_h, semigroup_apply
from nselab.renorm import RenormContext, make_context, renormed_inner, renormed_norm
from nselab.seeding import sub_seed


def test_equivalence_constants_frozen(g4):
    ctx = make_context(g4, r=1.0, omega=0.5)
    # k2max = 3 on the n=4 grid, so M = exp((3 - 0.5) * 1) = e^2.5
    assert abs(ctx.m_equiv - 12.182493960703473) < 1e-12
    assert ctx.m1_equiv == 1.0
    assert abs(ctx.log_m - 2.5) < 1e-15


def test_norm_equivalence_both_directions(ctx16):
    m = ctx16.m_equiv
    for i in range(6):
        u = make_field_random(ctx16.grid, sub_seed(21, "equiv", i))
        base = norm_h(u)
        ren = renormed_norm(u, ctx16)
        assert ren <= base * (1 + 1e-14)
        assert base <= m * ren * (1 + 1e-14)


def test_m_sharp_on_top_mode(g8):
    ctx = make_context(g8, r=0.3, omega=0.25)
    k = None
    for row in g8.modes:
        if float(row @ row) == g8.k2max:
            k = tuple(int(x) for x in row)
            break
    e = np.array([float(-k[1]), float(k[0]), 0.0])
    if not np.any(e):
        e = np.array([0.0, float(-k[2]), float(k[1])])
    u = single_mode_field(g8, k, tuple(e))
    ratio = norm_h(u) / renormed_norm(u, ctx)
    assert abs(ratio - ctx.m_equiv) < 1e-12 * ctx.m_equiv


def test_renormed_norm_is_s_of_r(ctx16):
    u = make_field_random(ctx16.grid, sub_seed(21, "sdef", 0))
    s = semigroup_apply(u, ctx16.r, "S", omega=ctx16.omega)
    assert abs(renormed_norm(u, ctx16) - norm_h(s)) < 1e-14 * norm_h(u)
    v = make_field_random(ctx16.grid, sub_seed(21, "sdef", 1))
    # polarization: inner product matches the weighted sum
    lhs = renormed_inner(u, v, ctx16)
    sv = semigroup_apply(v, ctx16.r, "S", omega=ctx16.omega)
    rhs = float(np.real(np.vdot(sv.coeffs, s.coeffs)))
    assert abs(lhs - rhs) < 1e-12 * max(1.0, abs(rhs))


def test_context_validation(g8):
    with pytest.raises(ValueError):
        RenormContext(g8, -0.1, 0.5)
    with pytest.raises(ValueError):
        RenormContext(g8, 0.1, 0.0)
    with pytest.raises(ValueError):
        RenormContext(g8, 0.1, 1.0)
    ctx = make_context(g8, 0.1)
    assert ctx.omega == 0.5 * g8.lambda1
    with pytest.raises(ValueError):
        ctx.s_weights[0, 0, 0] = 2.0
