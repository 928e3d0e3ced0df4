from fractions import Fraction

import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from gpd.convolution import (
    AlgebraContext,
    adjoint,
    check_star_algebra,
    convolve,
    delta,
    element,
    i_norm,
    matrix_representation,
    matrix_to_element,
    pair_matrix_iso,
    pullback,
    structure_constants,
    unit_element,
    zero,
)
from gpd.errors import GroupoidError, HypothesisViolated
from gpd.groupoid import (
    abelian_group_table,
    group_as_groupoid,
    pair_groupoid,
    space_projection,
    validate_morphism,
)
from gpd.haar import cocycle_from_angles, counting_haar, haar_from_unit_weights, trivial_cocycle

from .oracles import convolve_by_pairs
from .strategies import contexts, elements, preserving_maps


def ctx_of(G, c=None, sigma=None):
    w = counting_haar(G) if c is None else haar_from_unit_weights(G, c)
    return AlgebraContext(G, w, sigma or trivial_cocycle(G))


def bicharacter_ctx():
    V = group_as_groupoid(abelian_group_table(2, 2))
    angles = {(g, h): Fraction(int(g[3]) * int(h[1]), 2) for g, h in V.composable_pairs}
    return ctx_of(V, sigma=cocycle_from_angles(V, angles))


G3 = ctx_of(pair_groupoid(3))


def test_pair3_delta_products():
    assert convolve(delta(G3, "g12"), delta(G3, "g31")) == delta(G3, "g32")
    for a, b, c, d in itertools.product("123", repeat=4):
        prod = convolve(delta(G3, f"g{a}{b}"), delta(G3, f"g{c}{d}"))
        expected = delta(G3, f"g{c}{b}") if a == d else zero(G3)
        assert prod == expected


def test_unit_element():
    for ctx in (G3, ctx_of(pair_groupoid(2), {"g11": 1, "g22": 3}), bicharacter_ctx()):
        u = unit_element(ctx)
        for g in ctx.groupoid.arrows:
            d = delta(ctx, g)
            assert convolve(u, d).close(d) and convolve(d, u).close(d)
    assert unit_element(G3) == element(G3, {"g11": 1, "g22": 1, "g33": 1})


def test_bicharacter_twists_products():
    ctx = bicharacter_ctx()
    assert convolve(delta(ctx, "(0,1)"), delta(ctx, "(1,0)")) == -delta(ctx, "(1,1)")
    assert convolve(delta(ctx, "(1,0)"), delta(ctx, "(0,1)")) == delta(ctx, "(1,1)")
    assert adjoint(delta(ctx, "(1,1)")) == -delta(ctx, "(1,1)")
    assert adjoint(delta(ctx, "(1,0)")) == delta(ctx, "(1,0)")


def test_adjoint_of_pair_deltas():
    assert adjoint(delta(G3, "g12")) == delta(G3, "g21")
    f = element(G3, {"g12": 2 + 1j, "g33": -1j})
    assert adjoint(f) == element(G3, {"g21": 2 - 1j, "g33": 1j})


def test_i_norm_examples():
    assert i_norm(delta(G3, "g12")) == 1
    assert i_norm(unit_element(G3)) == 1
    assert i_norm(element(G3, {"g11": 1, "g21": 1})) == 2
    assert i_norm(zero(G3)) == 0
    # weighted fibers
    ctx = ctx_of(pair_groupoid(2), {"g11": 1, "g22": 3})
    assert i_norm(delta(ctx, "g12")) == 3
    assert isinstance(i_norm(element(ctx, {"g12": Fraction(1, 2)})), Fraction)


def test_pullback_along_projection():
    G2 = ctx_of(pair_groupoid(2))
    q = space_projection(G2.groupoid, ["a", "b"])
    dom = AlgebraContext.default(q.domain)
    pulled = pullback(q, delta(G2, "g12"), dom)
    assert pulled == element(dom, {"(g12,a)": 1, "(g12,b)": 1})


def test_pullback_requires_preservation():
    V = bicharacter_ctx()
    Z2 = group_as_groupoid(abelian_group_table(2))
    proj = validate_morphism({g: g[1] for g in V.groupoid.arrows}, V.groupoid, Z2)
    with pytest.raises(HypothesisViolated):
        pullback(proj, delta(AlgebraContext.default(Z2), "1"), V)
    G2 = ctx_of(pair_groupoid(2))
    q = space_projection(G2.groupoid, ["a", "b"])
    heavy = ctx_of(q.domain, {x: 2 for x in q.domain.units})
    with pytest.raises(HypothesisViolated):
        pullback(q, delta(G2, "g12"), heavy)


def test_structure_constants():
    sc = structure_constants(G3)
    assert len(sc.table) == 27
    assert sc.product("g12", "g31") == delta(G3, "g32")
    assert sc.product("g12", "g12") == zero(G3)
    ctx = ctx_of(pair_groupoid(2), {"g11": 1, "g22": 2})
    sc = structure_constants(ctx)
    assert sc.coefficient("g21", "g12", "g11") == 2
    assert convolve(delta(ctx, "g21"), delta(ctx, "g12")) == 2 * delta(ctx, "g11")
    assert convolve(delta(ctx, "g12"), delta(ctx, "g21")) == delta(ctx, "g22")
    for i, j in itertools.product(ctx.groupoid.arrows, repeat=2):
        assert sc.product(i, j) == convolve(delta(ctx, i), delta(ctx, j))


def test_bicharacter_structure_constants_have_signs():
    ctx = bicharacter_ctx()
    sc = structure_constants(ctx)
    assert sc.coefficient("(0,1)", "(1,0)", "(1,1)") == -1
    assert sc.coefficient("(1,0)", "(0,1)", "(1,1)") == 1


def test_counting_pair2_matrices():
    ctx = ctx_of(pair_groupoid(2))
    M = pair_matrix_iso(2, [1, 1], delta(ctx, "g12"))
    assert np.array_equal(M, np.array([[0, 0], [1, 0]]))
    assert np.array_equal(pair_matrix_iso(2, [1, 1], unit_element(ctx)), np.eye(2))


def test_weighted_pair2_matrix():
    ctx = ctx_of(pair_groupoid(2), {"g11": 1, "g22": 4})
    M = pair_matrix_iso(2, [1, 4], delta(ctx, "g12"))
    assert np.allclose(M, [[0, 0], [2, 0]])
    assert np.allclose(pair_matrix_iso(2, [1, 4], unit_element(ctx)), np.eye(2))


def test_inverse_square_root_scaling_is_not_multiplicative():
    ctx = ctx_of(pair_groupoid(2), {"g11": 1, "g22": 4})
    c = [1, 4]

    def phi(f):
        M = np.zeros((2, 2))
        for g in ctx.groupoid.arrows:
            i, j = int(g[1]) - 1, int(g[2]) - 1
            M[j, i] += f[g] / np.sqrt(c[i] * c[j])
        return M

    a, b = delta(ctx, "g21"), delta(ctx, "g12")
    assert not np.allclose(phi(convolve(a, b)), phi(a) @ phi(b))
    assert np.allclose(matrix_representation(convolve(a, b)), matrix_representation(a) @ matrix_representation(b))


def test_matrix_picture_needs_pair_groupoid():
    with pytest.raises(GroupoidError):
        matrix_representation(delta(bicharacter_ctx(), "(1,0)"))
    with pytest.raises(GroupoidError):
        pair_matrix_iso(3, [1, 1], delta(ctx_of(pair_groupoid(2)), "g12"))
    with pytest.raises(GroupoidError):
        pair_matrix_iso(2, [1, 2], delta(ctx_of(pair_groupoid(2)), "g12"))


@settings(max_examples=25, deadline=None)
@given(st.integers(1, 5), st.data())
def test_matrix_iso_is_a_star_homomorphism(n, data):
    c = {f"g{i}{i}": data.draw(st.fractions(Fraction(1, 3), 5, max_denominator=4).filter(lambda q: q > 0)) for i in range(1, n + 1)}
    ctx = ctx_of(pair_groupoid(n), c)
    f, g = data.draw(elements(ctx)), data.draw(elements(ctx))
    Mf, Mg = matrix_representation(f), matrix_representation(g)
    assert np.allclose(matrix_representation(convolve(f, g)), Mf @ Mg, atol=1e-9)
    assert np.allclose(matrix_representation(adjoint(f)), Mf.conj().T, atol=1e-9)
    assert matrix_to_element(ctx, Mf).close(f)


def test_star_algebra_checks():
    for ctx in (G3, bicharacter_ctx(), ctx_of(pair_groupoid(2), {"g11": 1, "g22": 4})):
        rep = check_star_algebra(ctx, trials=40, seed=3)
        assert rep.passed, rep.lines()
    a = check_star_algebra(G3, trials=10, seed=5)
    b = check_star_algebra(G3, trials=10, seed=5)
    assert a == b


def test_zero_element_laws():
    f = element(G3, {"g12": 3, "g21": 1j})
    assert convolve(zero(G3), f) == zero(G3) and convolve(f, zero(G3)) == zero(G3)
    assert adjoint(zero(G3)) == zero(G3)


def test_elements_from_different_contexts_do_not_mix():
    other = ctx_of(pair_groupoid(3), {"g11": 2, "g22": 2, "g33": 2})
    with pytest.raises(GroupoidError):
        convolve(delta(G3, "g11"), delta(other, "g11"))
    with pytest.raises(GroupoidError):
        element(G3, {"g44": 1})


@settings(max_examples=40, deadline=None)
@given(st.data())
def test_convolution_matches_pair_sum_oracle(data):
    ctx = data.draw(contexts())
    f = data.draw(elements(ctx))
    g = data.draw(elements(ctx))
    expected = convolve_by_pairs(ctx, f.as_dict(), g.as_dict())
    got = convolve(f, g)
    for z in ctx.groupoid.arrows:
        assert abs(got[z] - expected[z]) < 1e-9


@settings(max_examples=30, deadline=None)
@given(st.data())
def test_pullback_is_isometric_star_homomorphism(data):
    q, dom, cod = data.draw(preserving_maps())
    f = data.draw(elements(cod, rational=True))
    g = data.draw(elements(cod, rational=True))
    pf, pg = pullback(q, f, dom), pullback(q, g, dom)
    assert pullback(q, convolve(f, g), dom).close(convolve(pf, pg))
    assert pullback(q, adjoint(f), dom).close(adjoint(pf))
    assert i_norm(pf) == i_norm(f)
