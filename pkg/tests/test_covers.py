from fractions import Fraction

import pytest
from hypothesis import given, settings

from gpd.covers import (
    INF,
    Cover,
    NormalSequence,
    chain_pseudometric,
    co_level,
    discrete_cover,
    image_cover,
    intersection_refinement,
    is_intersection_separating,
    metric_quotient,
    partition_cover,
    refines,
    rho,
    star,
    star_cover,
    star_refines,
    validate_normal_sequence,
    verify_sandwich,
    verify_sequence_unchecked,
)
from gpd.errors import ChainBreak, CoverError, TailNotPartition

from .oracles import chain_distance_oracle
from .strategies import normal_sequences

X3 = (1, 2, 3)
OVERLAP = Cover(X3, ((1, 2), (2, 3)))


def test_star_examples():
    whole = Cover(X3, (X3,))
    for A in ({1}, {2, 3}, {1, 2, 3}):
        assert star(A, whole) == frozenset(X3)
    assert star({1}, OVERLAP) == {1, 2}
    assert star({2}, OVERLAP) == {1, 2, 3}
    assert star(set(), OVERLAP) == frozenset()
    with pytest.raises(CoverError):
        star({4}, OVERLAP)


def test_cover_validation():
    with pytest.raises(CoverError):
        Cover(X3, ((1, 2),))
    with pytest.raises(CoverError):
        Cover(X3, ((1, 2, 4), (3,)))
    with pytest.raises(CoverError):
        partition_cover([(1, 2), (2, 3)])
    assert len(Cover(X3, ((1, 2), (2, 1), (3,)))) == 2


def test_star_refinement_examples():
    P = Cover(X3, ((1, 2), (3,)))
    assert star_refines(P, P)
    assert not star_refines(OVERLAP, P)
    assert star_refines(OVERLAP, Cover(X3, (X3,)))
    assert refines(discrete_cover(X3), OVERLAP)
    assert not refines(OVERLAP, P)
    assert star_cover(OVERLAP, OVERLAP).members[0] == frozenset(X3)


def test_intersection_refinement():
    P = Cover(X3, ((1, 2), (3,)))
    ir = intersection_refinement(P)
    assert set(ir.cover.members) == set(P.members)
    assert set(ir.classes) == set(P.members)

    ir = intersection_refinement(OVERLAP)
    assert set(ir.cover.members) == {frozenset({1, 2}), frozenset({2}), frozenset({2, 3})}
    assert set(ir.classes) == {frozenset({1}), frozenset({2}), frozenset({3})}


def four_object_arrow_cover():
    from gpd.groupoid import pair_groupoid

    G = pair_groupoid(4)
    members = [("g11", "g33")] + [(g,) for g in G.arrows if g not in ("g11", "g33")]
    return G, Cover(G.arrows, tuple(members))


def test_intersection_refinement_of_source_image():
    G, arrows = four_object_arrow_cover()
    src = image_cover(arrows, G.s, G.units)
    ir = intersection_refinement(src)
    assert all(ir.point_sets[x] == {x} for x in G.units)


def test_intersection_separating():
    G, arrows = four_object_arrow_cover()
    src = image_cover(arrows, G.s, G.units)
    objects = Cover(G.units, (("g11", "g33"), ("g22",), ("g44",)))
    res = is_intersection_separating(objects, src)
    assert not res and res.witness == frozenset({"g11", "g33"})

    singletons = discrete_cover(X3)
    assert is_intersection_separating(singletons, OVERLAP)
    assert is_intersection_separating(singletons, Cover(X3, (X3,)))

    P = Cover(X3, ((1, 2), (3,)))
    assert is_intersection_separating(intersection_refinement(P).cover, P)
    # with overlaps the refinement itself straddles several classes
    res = is_intersection_separating(intersection_refinement(OVERLAP).cover, OVERLAP)
    assert not res


def test_normal_sequence_validation():
    P = Cover(X3, ((1, 2), (3,)))
    seq = validate_normal_sequence([P, P, P])
    assert len(seq) == 3

    with pytest.raises(ChainBreak) as err:
        validate_normal_sequence([P, OVERLAP])
    assert err.value.n == 0
    with pytest.raises(TailNotPartition):
        validate_normal_sequence([Cover(X3, (X3,)), OVERLAP])
    with pytest.raises(CoverError):
        validate_normal_sequence([])


def test_co_level_and_rho():
    seq = validate_normal_sequence([OVERLAP, discrete_cover(X3)])
    assert co_level(seq, 1, 2) == 0 and rho(seq, 1, 2) == 1
    assert co_level(seq, 1, 3) == -1 and rho(seq, 1, 3) == 1
    assert co_level(seq, 2, 2) is INF and rho(seq, 2, 2) == 0

    deep = validate_normal_sequence([Cover(X3, (X3,)), Cover(X3, ((1, 2), (3,))), discrete_cover(X3)])
    assert rho(deep, 1, 2) == Fraction(1, 2)
    assert rho(deep, 1, 3) == 1


def test_single_cover_gives_zero_metric():
    pm = chain_pseudometric(validate_normal_sequence([Cover(X3, (X3,))]))
    assert all(v == 0 for row in pm.dist for v in row)


def test_three_point_metric_against_chains():
    covers = [OVERLAP, discrete_cover(X3)]
    pm = chain_pseudometric(validate_normal_sequence(covers))
    expected = chain_distance_oracle(X3, covers)
    for (a, b), v in expected.items():
        assert pm.d(a, b) == v
    assert pm.d(1, 2) == 1 and pm.d(1, 3) == 1


def test_chains_can_beat_direct_rho():
    pts = tuple("abcd")
    seq = validate_normal_sequence([
        Cover(pts, (pts,)),
        Cover(pts, (("a", "b", "c"), ("b", "c", "d"))),
        Cover(pts, (("a", "b"), ("c",), ("d",))),
    ])
    pm = chain_pseudometric(seq)
    assert rho(seq, "a", "d") == 1
    # a and b are never separated, and b, d share a level-1 member
    assert pm.d("a", "d") == Fraction(1, 2)
    oracle = chain_distance_oracle(pts, list(seq.covers))
    assert all(pm.d(a, b) == v for (a, b), v in oracle.items())


def test_metric_quotient():
    pts = (1, 2, 3, 4)
    seq = validate_normal_sequence([Cover(pts, (pts,)), Cover(pts, ((1, 2), (3, 4)))])
    mq = metric_quotient(chain_pseudometric(seq))
    assert set(mq.classes) == {frozenset({1, 2}), frozenset({3, 4})}
    assert mq.dist == ((0, 1), (1, 0))


def test_sandwich_on_constant_partition():
    P = Cover(X3, ((1, 2), (3,)))
    seq = validate_normal_sequence([P, P])
    for x in X3:
        for n in range(2):
            assert verify_sandwich(seq, x, n)
    with pytest.raises(IndexError):
        verify_sandwich(seq, 1, 2)


def test_sandwich_needs_star_refinement():
    pts = (1, 2, 3, 4)
    bad = [Cover(pts, ((1, 3, 4), (2, 3), (4,))), Cover(pts, ((1, 2, 3), (4,)))]
    with pytest.raises(ChainBreak):
        validate_normal_sequence(bad)
    # d(1, 2) = 1/2 puts 2 in the unit ball around 1, outside st(1, U_0)
    assert not verify_sequence_unchecked(bad, 1, 0)
    assert not verify_sequence_unchecked(bad, 2, 0)


@settings(max_examples=60, deadline=None)
@given(normal_sequences())
def test_sandwich_holds_for_random_sequences(seq):
    pm = chain_pseudometric(seq)
    for x in seq.ground:
        for n in range(len(seq)):
            assert verify_sandwich(seq, x, n, pm)


@settings(max_examples=40, deadline=None)
@given(normal_sequences(max_points=7))
def test_floyd_warshall_matches_chain_enumeration(seq):
    pm = chain_pseudometric(seq)
    oracle = chain_distance_oracle(seq.ground, list(seq.covers))
    for (a, b), v in oracle.items():
        assert pm.d(a, b) == v


@settings(max_examples=40, deadline=None)
@given(normal_sequences())
def test_pseudometric_axioms(seq):
    pm = chain_pseudometric(seq)
    pts = seq.ground
    for x in pts:
        assert pm.d(x, x) == 0
        for y in pts:
            assert pm.d(x, y) == pm.d(y, x)
            for z in pts:
                assert pm.d(x, z) <= pm.d(x, y) + pm.d(y, z)


def test_normal_sequence_level_clamps_to_tail():
    P = Cover(X3, ((1, 2), (3,)))
    seq = NormalSequence((Cover(X3, (X3,)), P))
    assert seq.level(7) == P
