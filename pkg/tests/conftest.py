import pytest

from nselab.constants import estimate_constants
from nselab.grid import grid
from nselab.renorm import make_context


@pytest.fixture(scope="session")
def g4():
    return grid(4)


@pytest.fixture(scope="session")
def g8():
    return grid(8)


@pytest.fixture(scope="session")
def g16():
    return grid(16)


@pytest.fixture(scope="session")
def ctx8(g8):
    return make_context(g8, r=0.05)


@pytest.fixture(scope="session")
def ctx16(g16):
    return make_context(g16, r=0.02)


@pytest.fixture(scope="session")
def consts8(ctx8):
    # small corpus but fully refined: the ascent-search tests need the
    # recorded constant to sit at the converged peak
    return estimate_constants(ctx8, master=909, corpus_count=30, refine_iters=200)
