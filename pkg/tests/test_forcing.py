import numpy as np
import pytest

from nselab.field import max_divergence
from nselab.forcing import KINDS, make_forcing
from nselab.operators import norm_h
from nselab.renorm import renormed_norm
from nselab.seeding import sub_seed


def test_zero_kind(ctx16):
    f = make_forcing("zero", ctx16.grid, ctx16)
    assert f.f_sup == 0.0 and f.d_eff == 0.0 and f.amplitude == 0.0
    assert norm_h(f.evaluate(0.0)) == 0.0
    assert norm_h(f.evaluate(3.7)) == 0.0
    # zero amplitude collapses every kind to zero
    g = make_forcing("constant_field", ctx16.grid, ctx16, amplitude=0.0)
    assert g.kind == "zero"


def test_constant_field_scaling(ctx16):
    amp = 2.5e-3
    f = make_forcing("constant_field", ctx16.grid, ctx16, amplitude=amp,
                     seed=sub_seed(1, "force", 0))
    assert f.f_sup == amp
    assert renormed_norm(f.base, ctx16) == pytest.approx(amp, rel=1e-13)
    assert max_divergence(f.base) < 1e-12 * np.max(np.abs(f.base.coeffs))
    assert f.modulation(0.0) == 1.0 and f.modulation(10.0) == 1.0
    assert np.array_equal(f.evaluate(1.0).coeffs, f.base.coeffs)


def test_holder_modulation(ctx16):
    f = make_forcing("holder_modulated", ctx16.grid, ctx16, amplitude=1e-3,
                     theta=0.5, d=2.0, seed=sub_seed(1, "force", 1))
    assert f.modulation(0.0) == 0.0
    assert f.modulation(0.01) == pytest.approx(0.2, rel=1e-13)
    assert f.modulation(100.0) == 1.0  # clip saturates
    assert f.d_eff == pytest.approx(2.0 * 1e-3, rel=1e-15)
    assert f.f_sup == 1e-3
    # modulus check on a sample of time pairs
    rng = np.random.default_rng(0)
    ts = rng.uniform(0, 2, 64)
    for s, t in zip(ts[::2], ts[1::2]):
        diff = f.base.with_coeffs(f.evaluate(t).coeffs - f.evaluate(s).coeffs)
        lhs = renormed_norm(diff, ctx16)
        assert lhs <= f.d_eff * abs(t - s) ** f.theta * (1 + 1e-12)


def test_determinism_and_seed_sensitivity(ctx16):
    a = make_forcing("constant_field", ctx16.grid, ctx16, amplitude=1.0, seed=5)
    b = make_forcing("constant_field", ctx16.grid, ctx16, amplitude=1.0, seed=5)
    c = make_forcing("constant_field", ctx16.grid, ctx16, amplitude=1.0, seed=6)
    assert np.array_equal(a.base.coeffs, b.base.coeffs)
    assert not np.array_equal(a.base.coeffs, c.base.coeffs)


def test_validation(ctx16):
    g = ctx16.grid
    with pytest.raises(ValueError):
        make_forcing("gusty", g, ctx16)
    with pytest.raises(ValueError):
        make_forcing("constant_field", g, ctx16, amplitude=-1.0)
    with pytest.raises(ValueError):
        make_forcing("holder_modulated", g, ctx16, amplitude=1.0, theta=1.5)
    with pytest.raises(ValueError):
        make_forcing("holder_modulated", g, ctx16, amplitude=1.0, d=0.0)
    f = make_forcing("zero", g, ctx16)
    with pytest.raises(ValueError):
        f.modulation(-0.1)
    assert set(f.as_dict()) == {"kind", "theta", "d_mod", "amplitude", "d_eff", "f_sup"}
    assert "zero" in KINDS
