from fractions import Fraction

import pytest

from gpd.bundle import parse_bundle
from gpd.convolution import AlgebraContext
from gpd.errors import FiberInconsistency, GuardExceeded
from gpd.groupoid import (
    abelian_group_table,
    group_as_groupoid,
    is_isomorphism,
    pair_groupoid,
    product_with_space,
    space_projection,
    validate_morphism,
)
from gpd.haar import cocycle_from_angles, counting_haar, haar_from_unit_weights, trivial_cocycle
from gpd.limits import (
    SystemFailure,
    algebra_direct_system,
    candidate_partitions,
    congruence_lattice,
    enumerate_threads,
    inverse_limit,
    inverse_system,
    top_node,
    valid_congruences,
    validate_inverse_system,
)
from gpd.quotient import congruence, identity_congruence

from .conftest import fixture_path
from .oracles import bell, quotient_is_well_defined, set_partitions
from .test_quotient import two_object


def chain2():
    G2 = pair_groupoid(2)
    q = space_projection(G2, ["a", "b"])
    ctx = {"top": AlgebraContext.default(q.domain), "base": AlgebraContext.default(G2)}
    return inverse_system(ctx, [("top", "base")], {("top", "base"): q})


def test_single_node_system():
    ctx = AlgebraContext.default(pair_groupoid(2))
    sys = validate_inverse_system(inverse_system({"only": ctx}, [], {}))
    lim = inverse_limit(sys)
    assert lim.top == "only"
    assert is_isomorphism(lim.projections["only"])


def test_two_node_chain():
    sys = validate_inverse_system(chain2())
    assert top_node(sys) == "top"
    lim = inverse_limit(sys)
    assert len(lim.groupoid.arrows) == 8
    assert is_isomorphism(lim.projections["top"])
    assert lim.projections["base"].surjective


def test_threads_agree_with_brute_force():
    for path in ("chain2.system.json", "chain3.system.json"):
        sys = parse_bundle(fixture_path(path)).system
        lim = inverse_limit(sys)
        brute = {tuple(sorted(th.components.items())) for th in enumerate_threads(sys)}
        built = {tuple(sorted(th.components.items())) for th in lim.threads.values()}
        assert brute == built
        assert len(brute) == len(sys.groupoid(lim.top).arrows)


def test_limit_transports_structure():
    sys = parse_bundle(fixture_path("chain3.system.json")).system
    lim = inverse_limit(sys)
    top = sys.contexts[lim.top]
    assert all(lim.haar[g] == top.haar[g] for g in lim.groupoid.arrows)
    assert all(hp and cp for hp, cp in lim.checks.values())


def test_bad_weight_fixture_is_rejected():
    sys = parse_bundle(fixture_path("bad_weight.system.json")).system
    with pytest.raises(FiberInconsistency):
        validate_inverse_system(sys)


def test_system_laws():
    G2 = pair_groupoid(2)
    ctx = AlgebraContext.default(G2)
    with pytest.raises(SystemFailure) as err:
        validate_inverse_system(inverse_system({"a": ctx, "b": ctx}, [], {}))
    assert err.value.axiom == "directed"
    ident = {g: g for g in G2.arrows}
    cyc = inverse_system({"a": ctx, "b": ctx}, [("a", "b"), ("b", "a")], {("a", "b"): ident, ("b", "a"): ident})
    with pytest.raises(SystemFailure) as err:
        validate_inverse_system(cyc)
    assert err.value.axiom == "antisymmetry"
    with pytest.raises(SystemFailure):
        inverse_system({"a": ctx}, [("a", "zz")], {})
    Z2 = group_as_groupoid(abelian_group_table(2))
    inc = {"0": "g11", "1": "g12"}
    with pytest.raises(SystemFailure) as err:
        inverse_system({"a": AlgebraContext.default(Z2), "b": ctx}, [("a", "b")], {("a", "b"): inc})
    assert err.value.axiom == "functor"


def test_non_surjective_bond():
    G1, G2 = pair_groupoid(1), pair_groupoid(2)
    inc = validate_morphism({"g11": "g11"}, G1, G2)
    sys = inverse_system({"a": AlgebraContext.default(G1), "b": AlgebraContext.default(G2)}, [("a", "b")], {("a", "b"): inc})
    with pytest.raises(SystemFailure) as err:
        validate_inverse_system(sys)
    assert err.value.axiom == "surjective"


def test_cocycle_preservation_is_required():
    V = group_as_groupoid(abelian_group_table(2, 2))
    Z2 = group_as_groupoid(abelian_group_table(2))
    angles = {(g, h): Fraction(int(g[3]) * int(h[1]), 2) for g, h in V.composable_pairs}
    # weight 1/2 makes the projection Haar preserving, so only the twist is at fault
    ctx_v = AlgebraContext(V, haar_from_unit_weights(V, {"(0,0)": Fraction(1, 2)}), cocycle_from_angles(V, angles))
    proj = {g: g[1] for g in V.arrows}
    sys = inverse_system({"v": ctx_v, "z": AlgebraContext.default(Z2)}, [("v", "z")], {("v", "z"): proj})
    with pytest.raises(SystemFailure) as err:
        validate_inverse_system(sys)
    assert err.value.axiom == "cocycle preserving"


def test_direct_system_is_exact():
    for path in ("chain2.system.json", "chain3.system.json"):
        rep = algebra_direct_system(parse_bundle(fixture_path(path)).system)
        assert rep.exact and rep.worst() == 0


def test_three_node_chain_random_norms():
    sys = parse_bundle(fixture_path("chain3.system.json")).system
    rep = algebra_direct_system(sys, trials=100, seed=11)
    assert rep.exact
    assert rep.random_trials == 100 and rep.random_norm_failures == 0
    assert ("top", "middle", "bottom") in rep.triangles


def test_lattice_of_pair2():
    G = pair_groupoid(2)
    lat = congruence_lattice(G)
    assert lat.congruences[0] == identity_congruence(G)
    assert congruence(G, [["g11", "g22"], ["g12", "g21"]]) in lat.congruences
    assert lat.identity_is_maximum and lat.limit_isomorphic
    assert lat.top == "P0"


def test_lattice_of_two_object_groupoid():
    G = two_object()
    lat = congruence_lattice(G)
    expected = [identity_congruence(G), congruence(G, [["x", "y"], ["g", "h"]]), congruence(G, [["x", "y", "g", "h"]])]
    assert list(lat.congruences) == expected
    assert lat.limit_isomorphic


def test_lattice_of_point():
    lat = congruence_lattice(pair_groupoid(1))
    assert len(lat.congruences) == 1 and lat.limit_isomorphic


def test_bicharacter_leaves_only_the_identity():
    V = group_as_groupoid(abelian_group_table(2, 2))
    angles = {(g, h): Fraction(int(g[3]) * int(h[1]), 2) for g, h in V.composable_pairs}
    lat = congruence_lattice(V, counting_haar(V), cocycle_from_angles(V, angles))
    assert lat.congruences == (identity_congruence(V),)
    # without the twist the subgroup quotients come back
    assert len(congruence_lattice(V).congruences) == 5


def test_rejected_congruence_never_in_lattice():
    G = pair_groupoid(3)
    bad = congruence(G, [["g11", "g33"]])
    lat = congruence_lattice(G)
    assert bad not in lat.congruences
    assert lat.limit_isomorphic


def test_guard():
    with pytest.raises(GuardExceeded):
        congruence_lattice(pair_groupoid(4))
    with pytest.raises(GuardExceeded):
        congruence_lattice(pair_groupoid(3), guard=8)


def test_candidate_partitions_lose_nothing():
    for G in (pair_groupoid(2), two_object(), group_as_groupoid(abelian_group_table(3)),
              product_with_space(pair_groupoid(2), ["a", "b"])):
        w, sigma = counting_haar(G), trivial_cocycle(G)
        brute = {congruence(G, b) for b in set_partitions(G.arrows) if quotient_is_well_defined(G, b, w, sigma)}
        assert set(valid_congruences(G, w, sigma)) == brute
        cands = list(candidate_partitions(G))
        assert len(cands) <= bell(len(G.arrows))
        assert len({congruence(G, b) for b in cands}) == len(cands)


def test_lattice_with_weights():
    G = pair_groupoid(2)
    w = haar_from_unit_weights(G, {"g11": 1, "g22": 2})
    lat = congruence_lattice(G, w)
    # the swap fails the fiber-mass condition; collapsing everything does not
    everything = congruence(G, [list(G.arrows)])
    assert lat.congruences == (identity_congruence(G), everything)
    assert not quotient_is_well_defined(G, [["g11", "g22"], ["g12", "g21"]], w, trivial_cocycle(G))
    assert lat.limit_isomorphic
