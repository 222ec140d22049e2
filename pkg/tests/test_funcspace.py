from fractions import Fraction

import numpy as np
import pytest
from conftest import pl, pl_functions
from hypothesis import given
from hypothesis import strategies as st

from larglab.errors import DomainError, UnsupportedError
from larglab.funcspace import (
    DyadicPath,
    Order,
    PLFunction,
    Polynomial,
    compose,
    crossings,
    evaluate,
    floor_norm_diff,
    fractional_order,
    lipschitz_bound,
    pl_difference,
    pl_envelope,
    slopes,
    snap,
    sup_norm_bounds,
    sup_norm_diff,
    to_pl,
)
from larglab.sampling import sample_pl, sample_poly

Q = Fraction


def test_pl_validation():
    with pytest.raises(DomainError):
        pl((0, 0))
    with pytest.raises(DomainError):
        pl((0, 0), (Q(1, 2), 1), (Q(1, 2), 2), (1, 0))
    with pytest.raises(DomainError):
        pl((Q(1, 4), 0), (1, 1))


def test_evaluation_examples():
    assert evaluate(pl((0, 0), (1, 2)), Q(1, 2)) == 1
    assert evaluate(Polynomial((3.0,)), 0.7) == 3.0
    assert evaluate(Polynomial((0.0, 1.0, 1.0)), 0.5) == pytest.approx(0.75)
    with pytest.raises(DomainError):
        evaluate(pl((0, 0), (1, 2)), Q(3, 2))


def test_dyadic_path_evaluates_by_interpolation():
    p = DyadicPath(1, (0.0, 1.0, 0.0), 0.5)
    assert p(0.25) == pytest.approx(1.0)
    assert p(0.5) == pytest.approx(1.5)


def test_sup_norm_examples(line2x, zero):
    assert sup_norm_diff(line2x, zero) == 2
    assert sup_norm_diff(line2x, line2x) == 0
    assert floor_norm_diff(pl((0, 0), (1, Q(8, 5))), zero) == 1
    assert floor_norm_diff(line2x, line2x) == 0


def test_sup_norm_against_grid():
    for i in range(20):
        f, g = sample_pl(3, 2 * i), sample_pl(3, 2 * i + 1)
        x = np.linspace(0, 1, 100_001)
        grid = np.max(np.abs(np.interp(x, f.float_xs, f.float_ys) - np.interp(x, g.float_xs, g.float_ys)))
        exact = float(sup_norm_diff(f, g))
        assert grid <= exact + 1e-12
        assert exact - grid < 1e-3 * (lipschitz_bound(f) + lipschitz_bound(g) + 1)


def test_polynomial_norm_enclosure():
    f, g = Polynomial((0.0, 0.0, 1.0)), Polynomial((0.25,))
    lo, hi = sup_norm_bounds(f, g, 1e-10)
    assert lo <= 0.75 <= hi and hi - lo <= 1e-9
    # an interior extremum: x - x^2 peaks at 1/4
    lo, hi = sup_norm_bounds(Polynomial((0.0, 1.0, -1.0)), Polynomial((0.0,)), 1e-10)
    assert lo <= 0.25 <= hi and hi - lo <= 1e-9


def test_crossing_examples(line2x, zero):
    cr = crossings(line2x, zero)
    assert [(c.x, c.offset, c.direction) for c in cr] == [(0, 0, "up"), (Q(1, 2), 1, "up"), (1, 2, "up")]
    g = pl((0, Q(1, 3)), (Q(1, 2), -1), (1, 2))
    assert crossings(g.shifted(Q(1, 2)), g) == []


def test_crossings_need_pl_or_resolution():
    with pytest.raises(UnsupportedError):
        crossings(Polynomial((0.0, 2.0)), Polynomial((0.0,)))
    cr = crossings(Polynomial((0.0, 2.0)), Polynomial((0.0,)), resolution=8)
    assert [c.x for c in cr] == [0, Q(1, 2), 1]


def test_flat_segment_at_integer_level(zero):
    h = pl((0, Q(-1, 2)), (Q(1, 4), 1), (Q(3, 4), 1), (1, 2))
    cr = crossings(h, zero)
    flat = [c for c in cr if c.flat]
    assert [c.x for c in flat] == [Q(1, 4), Q(3, 4)]
    assert all(c.direction == "tangent" for c in flat)


def test_fractional_order_examples():
    a, b, c = PLFunction.constant(Q(3, 10)), PLFunction.constant(Q(7, 10)), PLFunction.constant(Q(17, 10))
    assert fractional_order(a, b, Q(1, 3)) == Order.LESS
    assert fractional_order(c, b, Q(1, 5)) == Order.EQUAL
    assert fractional_order(b, a, 0) == Order.GREATER


def test_slopes_and_lipschitz():
    tent = pl((0, 0), (Q(1, 2), 1), (1, 0))
    assert slopes(pl((0, 0), (1, 2))) == {2}
    assert slopes(tent) == {2, -2}
    assert lipschitz_bound(tent) == 2
    assert lipschitz_bound(Polynomial((0.0, 1.0))) == 1
    assert lipschitz_bound(Polynomial((0.0, 0.0, 1.0))) == 2
    for i in range(50):
        f = sample_pl(5, i)
        assert len(slopes(f)) <= len(f.points) - 1


def test_to_pl_examples():
    path = DyadicPath(3, tuple(float(v) for v in range(9)), 0.0)
    rendered, err = to_pl(path, 8)
    assert err == 0 and rendered.ys == [Q(v) for v in range(9)]
    line, err = to_pl(Polynomial((0.0, 1.0)), 7)
    assert err == 0 and line.simplified().points == ((0, 0), (1, 1))
    sq, err = to_pl(Polynomial((0.0, 0.0, 1.0)), 100)
    assert err <= 2 / 40000
    x = np.linspace(0, 1, 20001)
    dev = np.max(np.abs(np.interp(x, sq.float_xs, sq.float_ys) - x**2))
    assert dev <= err + 1e-15
    with pytest.raises(DomainError):
        to_pl(Polynomial((1.0,)), 0)


def test_envelope_and_compose():
    f, g = pl((0, 0), (1, 1)), pl((0, 1), (1, 0))
    up = pl_envelope([f, g], upper=True)
    assert up.points == ((0, 1), (Q(1, 2), Q(1, 2)), (1, 1))
    psi = pl((0, 0), (Q(1, 2), Q(1, 4)), (1, 1))
    h = compose(f, psi)
    assert h(Q(1, 2)) == Q(1, 4) and h(Q(3, 4)) == Q(5, 8)


def test_snap_lands_on_dyadic_grid():
    v = snap(0.1)
    assert (1 << 53) % v.denominator == 0
    assert abs(v - Fraction(0.1)) <= Fraction(1, 1 << 54)
    assert snap(0.75) == Fraction(3, 4)


@given(pl_functions(), pl_functions(), pl_functions())
def test_norm_symmetric_and_triangle(f, g, h):
    assert sup_norm_diff(f, g) == sup_norm_diff(g, f)
    assert sup_norm_diff(f, h) <= sup_norm_diff(f, g) + sup_norm_diff(g, h)


@given(pl_functions())
def test_eval_at_change_points(f):
    for x, y in f.points:
        assert f(x) == y


@given(pl_functions(), pl_functions())
def test_floor_norm_matches_exact_norm(f, g):
    import math

    assert floor_norm_diff(f, g) == math.floor(sup_norm_diff(f, g))


@given(pl_functions(), pl_functions())
def test_crossings_are_integer_points(f, g):
    d = pl_difference(f, g)
    for c in crossings(f, g):
        assert d(c.x) == c.offset
        assert fractional_order(f, g, c.x) == Order.EQUAL


@given(pl_functions(), pl_functions())
def test_disjoint_slopes_give_finite_nontangent_crossings(f, g):
    if slopes(f) & slopes(g):
        return
    d = pl_difference(f, g)
    kinks = set(d.xs)
    for c in crossings(f, g):
        assert not c.flat
        if c.direction == "tangent":
            # only a touch at a kink of f - g can fail to cross
            assert c.x in kinks


@given(st.integers(0, 2**32), st.integers(0, 500))
def test_poly_norm_enclosure_contains_grid_max(seed, index):
    f, g = sample_poly(seed, index), sample_poly(seed, index + 1)
    lo, hi = sup_norm_bounds(f, g, 1e-9)
    x = np.linspace(0, 1, 4097)
    grid = np.max(np.abs(np.polynomial.polynomial.polyval(x, f.coeffs) - np.polynomial.polynomial.polyval(x, g.coeffs)))
    assert grid <= hi + 1e-9
    assert lo <= hi
