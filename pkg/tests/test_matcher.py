import json
from fractions import Fraction

import pytest
from conftest import pl, pl_functions
from hypothesis import assume, given
from hypothesis import strategies as st

from larglab.errors import DomainError, ResolutionExhausted, StructuralError
from larglab.funcspace import PLFunction, compose, crossings, pl_difference
from larglab.io import dumps
from larglab.larg import build_larg
from larglab.matcher import (
    PartialMatch,
    back_and_forth,
    build_icd_target,
    build_sd_target,
    certify_prefixes,
    check_order_preserving,
    check_suitable_matching,
    is_step_isometry,
)
from larglab.structure import check_transverse
from larglab.sampling import FamilySpec, sample_family, sample_pl

Q = Fraction


def C(c, id=None):
    return PLFunction.constant(Q(c), id=id)


@st.composite
def homeomorphisms(draw):
    k = draw(st.integers(0, 4))
    xs = sorted(set(draw(st.lists(st.integers(1, 63), min_size=k, max_size=k))))
    ys = sorted(set(draw(st.lists(st.integers(1, 63), min_size=len(xs), max_size=len(xs)))))
    if len(ys) != len(xs):
        xs = xs[: len(ys)]
    pts = [(Q(0), Q(0))] + [(Q(x, 64), Q(y, 64)) for x, y in zip(xs, ys)] + [(Q(1), Q(1))]
    return PLFunction(tuple(pts))


def _transverse(fs):
    """Normalise so member 0 is zero, then keep only transverse families."""
    fs = [pl_difference(f, fs[0]).with_id(i) for i, f in enumerate(fs)]
    try:
        ok = check_transverse(fs).ok
    except DomainError:
        ok = False
    assume(ok)
    return fs


def test_step_isometry_examples():
    V = [C(0, 0), C(Q(23, 10), 1)]
    assert is_step_isometry(V, V)
    assert is_step_isometry(V, [f.shifted(Q(1, 3)) for f in V])
    chk = is_step_isometry(V, [C(0, 0), C(Q(19, 10), 1)])
    assert not chk and chk.witness["floors"] == [2, 1]


def test_order_preserving_examples():
    F = [C(0, 0), C(Q(1, 2), 1)]
    assert check_order_preserving(F, F)
    F3 = [C(0, 0), C(Q(1, 4), 1), C(Q(1, 2), 2)]
    G3 = [C(0, 0), C(Q(1, 2), 1), C(Q(1, 4), 2)]
    chk = check_order_preserving(F3, G3)
    assert not chk and chk.witness["kind"] == "remainder_order" and chk.witness["interval"] == 1
    G_int = [C(0, 0), C(Q(5, 4), 1), C(Q(1, 2), 2)]
    assert check_order_preserving(F3, G_int).witness["kind"] == "integer_part"
    with pytest.raises(StructuralError):
        check_order_preserving([C(0, 0), pl((0, Q(1, 2)), (1, Q(3, 2)), id=1)], [C(0, 0), C(Q(1, 4), 1)])


@given(st.lists(pl_functions(), min_size=2, max_size=4), homeomorphisms())
def test_reparametrized_families_are_order_preserving(fs, phi):
    fs = _transverse(fs)
    W = [compose(f, phi) for f in fs]
    assert check_order_preserving(fs, W)
    assert is_step_isometry(fs, W)


@given(
    st.lists(pl_functions(), min_size=2, max_size=4),
    homeomorphisms(),
    st.lists(st.fractions(Q(-1, 8), Q(1, 8), max_denominator=64), min_size=4, max_size=4),
)
def test_order_preserving_implies_step_isometry(fs, phi, bumps):
    fs = _transverse(fs)
    # perturbed images may or may not stay order-preserving; the law must hold either way
    W = [compose(f, phi).shifted(b) for f, b in zip(fs, bumps)]
    try:
        ok = check_order_preserving(fs, W)
    except StructuralError:
        return
    if ok:
        assert is_step_isometry(fs, W)


def test_suitable_matching_identity_and_shape():
    fam = list(sample_family(FamilySpec("pl", 4, 12)).functions)
    g = build_larg(fam, 0.5, 1)
    assert check_suitable_matching(fam, fam, g, g).ok
    F = [C(0, 0), pl((0, Q(1, 2)), (1, Q(3, 2)), id=1)]
    G = [C(0, 0), C(Q(1, 2), 1)]
    rep = check_suitable_matching(F, G, None, None)
    assert not rep.sm3a and not rep.ok


def test_bands_condition_is_needed():
    # both pairs cross twice at one level, so the other conditions agree, but
    # the distances have different integer parts
    F = [C(0, 0), pl((0, Q(1, 2)), (Q(1, 2), Q(6, 5)), (1, Q(1, 2)), id=1)]
    G = [C(0, 0), pl((0, Q(1, 2)), (Q(1, 2), Q(-1, 5)), (1, Q(1, 2)), id=1)]
    rep = check_suitable_matching(F, G, None, None)
    assert rep.sm1 and rep.sm2 and rep.sm3a and rep.sm3b and rep.sm3c
    assert not rep.bands
    assert not is_step_isometry(F, G)


@given(st.lists(pl_functions(), min_size=2, max_size=4), homeomorphisms(), st.integers(-2, 2))
def test_suitable_matching_implies_step_isometry(fs, phi, k):
    fs = _transverse(fs)
    W = [compose(f, phi).shifted(k) for f in fs]
    try:
        rep = check_suitable_matching(fs, W, None, None)
    except StructuralError:
        return
    assert rep.ok
    assert is_step_isometry(fs, W)


def test_sd_target_constant_case():
    state = PartialMatch([C(0, 0)], [C(0, 0)])
    t, ctx = build_sd_target(C(Q(1, 2), 5), state)
    assert t.points == ((0, Q(1, 2)), (1, Q(1, 2)))
    [piece] = ctx.pieces
    assert piece.lower == (0, 0) and piece.upper == (0, 1)


def test_sd_target_two_member_example():
    # g = 1/8 sits halfway between 0 and 1/4; the images are 0 and 1/2
    state = PartialMatch([C(0, 0), C(Q(1, 4), 1)], [C(0, 0), C(Q(1, 2), 1)])
    t, _ = build_sd_target(C(Q(1, 8), 2), state)
    assert t.points == ((0, Q(1, 4)), (1, Q(1, 4)))


def test_sd_target_extension_is_order_preserving():
    done = 0
    for seed in range(40):
        raw = list(sample_family(FamilySpec("pl", 3, seed)).functions)
        fs = [pl_difference(f, raw[0]).with_id(f.id) for f in raw]
        phi = PLFunction(((Q(0), Q(0)), (Q(1, 3), Q(1, 2)), (Q(1), Q(1))))
        gs = [compose(f, phi) for f in fs]
        state = PartialMatch(fs, gs)
        g_new = pl_difference(sample_pl(seed, 1000), raw[0]).with_id(1000)
        try:
            t, ctx = build_sd_target(g_new, state)
        except StructuralError:
            continue
        assert check_order_preserving(fs + [g_new], gs + [t])
        assert is_step_isometry(fs + [g_new], gs + [t])
        for piece in ctx.pieces:
            assert piece.x_lo < piece.x_hi and piece.y_lo < piece.y_hi
        done += 1
    assert done >= 30


def test_icd_target_without_crossings_is_midpoint():
    state = PartialMatch([C(0, 0)], [C(0, 0)], mode="icd")
    g, ctx = build_icd_target(pl((0, Q(1, 4)), (1, Q(1, 2)), id=3), state)
    assert g.points == ((0, Q(1, 2)), (1, Q(1, 2)))
    state = PartialMatch([C(0, 0), C(Q(1, 3), 1)], [C(0, 0), C(Q(2, 3), 1)], mode="icd")
    g, ctx = build_icd_target(C(Q(1, 2), 3), state)
    assert g.points == ((0, Q(5, 6)), (1, Q(5, 6)))
    assert ctx.delta > 0


def test_icd_target_single_up_crossing():
    state = PartialMatch([C(0, 0)], [C(0, 0)], mode="icd")
    f = pl((0, Q(1, 2)), (1, Q(3, 2)), id=3)
    g, ctx = build_icd_target(f, state)
    crossing = [c for c in ctx.cells if c.kind == "crossing"]
    assert len(crossing) == 1
    lo, hi = crossing[0].image
    # midpoints of the bands on either side of the crossed translate 0 + 1
    assert g(lo) == Q(1, 2) and g(hi) == Q(3, 2)
    [c] = crossings(g, C(0))
    assert c.offset == 1 and c.direction == "up"


def test_icd_target_keeps_suitable_matching():
    from larglab.funcspace import as_pl
    from larglab.sampling import sample_brownian

    done = 0
    for seed in range(6):
        fs = [as_pl(sample_brownian(seed, i, 8)) for i in range(3)]
        fs = [pl_difference(f, fs[0]).with_id(i) for i, f in enumerate(fs)]
        state = PartialMatch(fs[:2], fs[:2], mode="icd")
        try:
            g, ctx = build_icd_target(fs[2], state)
        except (ResolutionExhausted, StructuralError):
            continue
        assert ctx.delta > 0
        assert check_suitable_matching(fs, fs[:2] + [g], None, None).ok
        done += 1
    assert done >= 1


@pytest.fixture(scope="module")
def small_pl():
    V = sample_family(FamilySpec("pl", 12, 21))
    return V, build_larg(V, 0.5, 3)


def test_engine_base_only(small_pl):
    V, G = small_pl
    tr = back_and_forth(V, V, G, G, 0)
    assert tr.status == "accepted" and tr.pairs == [(0, 0)] and tr.steps == []
    with pytest.raises(DomainError):
        back_and_forth(V, V, G, G, -1)


def test_engine_identity_and_determinism(small_pl):
    V, G = small_pl
    tr = back_and_forth(V, V, G, G, 6)
    assert tr.status == "accepted"
    assert all(a == b for a, b in tr.pairs)
    assert [s["direction"] for s in tr.steps] == ["forth", "back"] * 3
    for s in tr.steps:
        assert all(s["certificates"].values())
    for row in certify_prefixes(tr, V, V, G, G):
        assert row["step_isometry"] and row["adjacency"] and row["order_or_matching"]
    again = back_and_forth(V, V, G, G, 6)
    assert dumps(tr.as_dict()) == dumps(again.as_dict())


def test_engine_independent_families_never_misreport():
    V = sample_family(FamilySpec("pl", 30, 1))
    W = sample_family(FamilySpec("pl", 30, 2))
    G1, G2 = build_larg(V, 0.5, 1), build_larg(W, 0.5, 2)
    tr = back_and_forth(V, W, G1, G2, 4, budget=30)
    assert tr.status in ("accepted", "exhausted", "structural")
    for row in certify_prefixes(tr, V, W, G1, G2):
        assert row["step_isometry"] and row["adjacency"] and row["order_or_matching"]
    json.loads(dumps(tr.as_dict()))


def test_engine_require_window_is_stricter(small_pl):
    V, G = small_pl
    loose = back_and_forth(V, V, G, G, 2)
    strict = back_and_forth(V, V, G, G, 2, require_window=True, budget=40)
    assert all(s["in_window"] for s in strict.steps if s["failure"] is None)
    assert len(strict.pairs) <= len(loose.pairs)


def test_engine_identity_icd():
    V = sample_family(FamilySpec("bm", 8, 5, 6))
    G = build_larg(V, 0.5, 2)
    tr = back_and_forth(V, V, G, G, 2, mode="icd")
    assert tr.status == "accepted"
    for row in certify_prefixes(tr, V, V, G, G):
        assert all(row.values())
