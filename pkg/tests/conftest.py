import numpy as np
import pytest
from hypothesis import settings, strategies as st

from dyadic_paraproducts.symbols import Symbol, generate

settings.register_profile("default", max_examples=40, deadline=None)
settings.load_profile("default")


def random_pair(depth, seed, **kwargs):
    b = generate("random", depth, seed=2 * seed, **kwargs)
    d = generate("random", depth, seed=2 * seed + 1, **kwargs)
    return b, d


@st.composite
def symbols(draw, min_depth=0, max_depth=4, depth=None):
    """Complex symbols with entries drawn from a bounded box."""
    if depth is None:
        depth = draw(st.integers(min_depth, max_depth))
    n = 2 ** (depth + 1) - 1
    part = st.floats(-3, 3, allow_nan=False, allow_infinity=False)
    re = draw(st.lists(part, min_size=n, max_size=n))
    im = draw(st.lists(part, min_size=n, max_size=n))
    return Symbol(depth, np.array(re) + 1j * np.array(im))


@st.composite
def symbol_pairs(draw, min_depth=0, max_depth=4):
    depth = draw(st.integers(min_depth, max_depth))
    return draw(symbols(depth=depth)), draw(symbols(depth=depth))


@pytest.fixture
def unit_pair():
    one = generate("constant", 2)
    return one, one
