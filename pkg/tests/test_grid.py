import numpy as np
import pytest

from nselab.grid import Grid, grid


def test_dealias_radius_per_size():
    assert grid(4).k_da == 1
    assert grid(8).k_da == 2
    assert grid(16).k_da == 5


def test_alias_free_margin():
    # products of retained modes reach 3*k_da, which must stay below n
    for n in (4, 6, 8, 12, 16, 18):
        g = grid(n)
        assert 3 * g.k_da < g.n


def test_active_counts():
    g = grid(4)
    # cube has 27 modes, one of them k = 0
    assert int(g.cube_mask.sum()) == 27
    assert int(g.active_mask.sum()) == 26
    assert g.k2max == 3
    assert g.lambda1 == 1


def test_ksq_and_modes_agree(g16):
    ksq_from_modes = (g16.modes.astype(np.int64) ** 2).sum(axis=1)
    assert np.array_equal(np.sort(np.unique(ksq_from_modes)), g16.ksq_active)
    assert g16.ksq_active[0] == 1
    assert g16.ksq_active[-1] == g16.k2max == 75


def test_arrays_frozen(g16):
    with pytest.raises(ValueError):
        g16.ksq[0, 0, 0] = 5


def test_rejects_bad_sizes():
    for n in (0, 2, 3, 7):
        with pytest.raises(ValueError):
            Grid(n)


def test_cache_and_equality():
    assert grid(8) is grid(8)
    assert grid(8) == Grid(8)
    assert grid(8) != grid(16)
    assert hash(grid(8)) == hash(Grid(8))
