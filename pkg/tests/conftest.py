from fractions import Fraction

import pytest
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

from larglab.funcspace import PLFunction

settings.register_profile(
    "default", deadline=None, max_examples=60, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("default")


def pl(*pts, id=None) -> PLFunction:
    return PLFunction(tuple((Fraction(x), Fraction(y)) for x, y in pts), id=id)


@st.composite
def pl_functions(draw, max_inner: int = 3, scale: int = 3):
    """Random PL functions with small dyadic coordinates."""
    n = draw(st.integers(0, max_inner))
    xs = sorted(draw(st.sets(st.integers(1, 255), min_size=n, max_size=n)))
    ys = draw(st.lists(st.integers(-scale * 64, scale * 64), min_size=n + 2, max_size=n + 2))
    grid = [Fraction(0)] + [Fraction(x, 256) for x in xs] + [Fraction(1)]
    return PLFunction(tuple(zip(grid, (Fraction(y, 64) for y in ys))))


@pytest.fixture
def line2x():
    return pl((0, 0), (1, 2), id=1)


@pytest.fixture
def zero():
    return PLFunction.constant(0, id=0)
