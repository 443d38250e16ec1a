import numpy as np
import pytest

from nselab.convective import (advect_adjoint_first_slot, convective_term,
                               make_sample, to_physical, trilinear)
from nselab.field import max_divergence, single_mode_field
from nselab.grid import grid
from nselab.operators import inner_h, make_field_random, norm_h, semigroup_apply
from nselab.seeding import sub_seed


def _triple(g, tag, decay=2.0):
    return tuple(make_field_random(g, sub_seed(17, f"{tag}-{s}", 0), decay)
                 for s in "uvw")


def test_shear_mode_self_advection_vanishes(g8):
    # u = e sin(k.x) with e perp k advects itself nowhere:
    # (u . grad) u = (e . k) e sin cos = 0
    u = single_mode_field(g8, (2, 0, 0), (0.0, 1.0, 0.0))
    c = convective_term(u, u)
    assert norm_h(c) < 1e-14


@pytest.mark.parametrize("n", [4, 8])
def test_pseudospectral_matches_convolution(n):
    g = grid(n)
    u, v, _ = _triple(g, f"match{n}")
    a = convective_term(u, v, method="pseudospectral")
    b = convective_term(u, v, method="convolution_oracle")
    scale = max(np.max(np.abs(a.coeffs)), 1e-300)
    assert np.max(np.abs(a.coeffs - b.coeffs)) < 1e-12 * scale


def test_oracle_refuses_large_grid():
    g = grid(18)
    u, v, _ = _triple(g, "big")
    with pytest.raises(ValueError, match="oracle"):
        convective_term(u, v, method="convolution_oracle")
    with pytest.raises(ValueError):
        convective_term(u, v, method="bogus")


def test_output_is_valid_field(g16):
    u, v, _ = _triple(g16, "valid")
    c = convective_term(u, v)
    assert max_divergence(c) < 1e-12 * np.max(np.abs(c.coeffs))
    assert np.all(c.coeffs[:, 0, 0, 0] == 0)
    assert np.all(c.coeffs[:, ~g16.cube_mask] == 0)


def test_skew_symmetry_and_energy_neutrality(g16):
    u, v, w = _triple(g16, "skew")
    b_vw = trilinear(u, v, w)
    b_wv = trilinear(u, w, v)
    scale = norm_h(u) * norm_h(v) * norm_h(w)
    assert abs(b_vw + b_wv) < 1e-11 * scale
    assert abs(trilinear(u, v, v)) < 1e-11 * norm_h(u) * norm_h(v) ** 2


def test_bilinearity(g8):
    u, v, w = _triple(g8, "lin")
    u2 = make_field_random(g8, sub_seed(17, "lin-extra", 0))
    left = trilinear(u.with_coeffs(2.0 * u.coeffs + u2.coeffs), v, w)
    right = 2.0 * trilinear(u, v, w) + trilinear(u2, v, w)
    assert abs(left - right) < 1e-11 * max(abs(left), abs(right), 1e-30)
    lv = trilinear(u, v.with_coeffs(-3.0 * v.coeffs), w)
    assert abs(lv + 3.0 * trilinear(u, v, w)) < 1e-11 * max(abs(lv), 1e-30)


def test_adjoint_first_slot(g8):
    u, v, w = _triple(g8, "adj")
    lhs = trilinear(u, v, w)
    gfield = advect_adjoint_first_slot(v, w)
    rhs = inner_h(u, gfield)
    assert abs(lhs - rhs) < 1e-11 * max(abs(lhs), 1e-30)


def test_renormed_form_matches_weighted_pairing(ctx16):
    g = ctx16.grid
    u, v, w = _triple(g, "ren")
    b1 = trilinear(u, v, w, renormed=True, ctx=ctx16)
    sw = semigroup_apply(w, 2.0 * ctx16.r, "S", omega=ctx16.omega)
    direct = trilinear(u, v, sw)
    assert abs(b1 - direct) < 1e-11 * max(abs(b1), 1e-30)
    with pytest.raises(ValueError):
        trilinear(u, v, w, renormed=True)


def test_make_sample_records_both_forms(ctx16):
    g = ctx16.grid
    u, v, w = _triple(g, "sample")
    s = make_sample(u, v, w, ctx=ctx16)
    assert s.b_h == trilinear(u, v, w)
    assert s.b_h1 == trilinear(u, v, w, renormed=True, ctx=ctx16)
    assert s.bound_rhs is None and s.ratio is None
    bare = make_sample(u, v, w)
    assert bare.b_h1 is None


def test_physical_samples_real_and_periodic(g8):
    u, _, _ = _triple(g8, "phys")
    phys = to_physical(u)
    assert phys.dtype == np.float64
    assert phys.shape == (3, 8, 8, 8)
    # mean over the box is the k = 0 mode, which is zero
    assert abs(phys.mean()) < 1e-13 * np.max(np.abs(phys))
