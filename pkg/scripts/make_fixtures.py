"""Regenerate the JSON fixtures under fixtures/ from library constructors."""
from __future__ import annotations

import json
from fractions import Fraction
from pathlib import Path

from gpd.bundle import GroupoidBundle, dumps, serialize_text, system_doc
from gpd.covers import Cover, validate_normal_sequence
from gpd.groupoid import (
    abelian_group_table,
    group_as_groupoid,
    pair_groupoid,
    product_with_space,
    space_groupoid,
    space_projection,
    validate_groupoid,
)
from gpd.haar import cocycle_from_angles, counting_haar, haar_from_unit_weights, validate_haar
from gpd.convolution import AlgebraContext
from gpd.limits import inverse_system
from gpd.quotient import build_quotient, congruence

OUT = Path(__file__).resolve().parent.parent / "fixtures"


def write(name: str, bundle: GroupoidBundle):
    (OUT / name).write_text(serialize_text(bundle), encoding="utf-8")


def write_doc(name: str, doc: dict):
    (OUT / name).write_text(dumps(doc) + "\n", encoding="utf-8")


def two_object():
    return validate_groupoid(dict(
        arrows=["x", "y", "g", "h"],
        units=["x", "y"],
        source={"x": "x", "y": "y", "g": "x", "h": "y"},
        target={"x": "x", "y": "y", "g": "y", "h": "x"},
        compose={("x", "x"): "x", ("y", "y"): "y", ("g", "x"): "g", ("y", "g"): "g",
                 ("h", "y"): "h", ("x", "h"): "h", ("h", "g"): "x", ("g", "h"): "y"},
        inverse={"x": "x", "y": "y", "g": "h", "h": "g"},
    ))


def main():
    OUT.mkdir(exist_ok=True)
    G1, G2, G3, G4 = (pair_groupoid(n) for n in (1, 2, 3, 4))
    write("point.json", GroupoidBundle(G1, counting_haar(G1)))
    write("pair2.json", GroupoidBundle(G2, counting_haar(G2)))
    write("pair3.json", GroupoidBundle(G3, counting_haar(G3)))
    write("pair2_weighted.json", GroupoidBundle(G2, haar_from_unit_weights(G2, {"g11": 1, "g22": 2})))
    write("pair4.json", GroupoidBundle(G4, counting_haar(G4)))
    write("pair4_merge_x1_x3.partition.json", GroupoidBundle(partition=(("g11", "g33"),)))
    write("pair2_swap.partition.json", GroupoidBundle(partition=(("g11", "g22"), ("g12", "g21"))))

    T = two_object()
    write("two_object.json", GroupoidBundle(T, counting_haar(T)))
    write("two_object_swap.partition.json", GroupoidBundle(partition=(("x", "y"), ("g", "h"))))

    Z2 = group_as_groupoid(abelian_group_table(2))
    write("z2.json", GroupoidBundle(Z2, counting_haar(Z2)))
    V = group_as_groupoid(abelian_group_table(2, 2))
    # sigma(a, b) = (-1)^(a_2 b_1)
    angles = {}
    for g, h in V.composable_pairs:
        a, b = json.loads(g.replace("(", "[").replace(")", "]")), json.loads(h.replace("(", "[").replace(")", "]"))
        angles[(g, h)] = Fraction(a[1] * b[0], 2)
    write("z2xz2_bicharacter.json", GroupoidBundle(V, counting_haar(V), cocycle_from_angles(V, angles)))

    P = product_with_space(G2, ["a", "b"])
    write("pair2_times_ab.json", GroupoidBundle(P, counting_haar(P)))
    proj = space_projection(G2, ["a", "b"])
    write("pair2_times_ab_projection.morphism.json",
          GroupoidBundle(codomain=GroupoidBundle(G2, counting_haar(G2)), arrow_map=dict(proj.arrow_map)))

    for g, tag in (("g12", "g12"), ("g21", "g21")):
        write(f"pair2_delta_{tag}.element.json", GroupoidBundle(coefficients={g: 1}))
    write("pair2_mixed.element.json",
          GroupoidBundle(coefficients={"g11": Fraction(1, 2), "g12": -2, "g21": complex(0, 1), "g22": 3}))

    # inverse systems
    ctxP = AlgebraContext(P, counting_haar(P), cocycle_from_angles(P, {}))
    ctx2 = AlgebraContext.default(G2)
    chain2 = inverse_system({"top": ctxP, "base": ctx2}, [("top", "base")], {("top", "base"): proj})
    write_doc("chain2.system.json", {"system": system_doc(chain2)})

    Q = build_quotient(G2, congruence(G2, [["g11", "g22"], ["g12", "g21"]]))
    ctxZ = AlgebraContext(Q.groupoid, Q.haar, Q.cocycle)
    chain3 = inverse_system(
        {"top": ctxP, "middle": ctx2, "bottom": ctxZ},
        [("top", "middle"), ("middle", "bottom")],
        {("top", "middle"): proj, ("middle", "bottom"): Q.map},
    )
    write_doc("chain3.system.json", {"system": system_doc(chain3)})

    heavy = AlgebraContext(G2, validate_haar(G2, {g: 2 for g in G2.arrows}), cocycle_from_angles(G2, {}))
    bad = {"system": system_doc(inverse_system({"top": ctxP, "base": ctx2}, [("top", "base")],
                                               {("top", "base"): proj}))}
    bad["system"]["nodes"][1]["haar"] = {g: str(heavy.haar[g]) for g in G2.arrows}
    write_doc("bad_weight.system.json", bad)

    pts = [str(i) for i in range(1, 7)]
    seq = validate_normal_sequence([
        Cover(tuple(pts), (tuple(pts),)),
        Cover(tuple(pts), (("1", "2", "3"), ("3", "4"), ("4", "5", "6"))),
        Cover(tuple(pts), (("1", "2"), ("3",), ("4",), ("5", "6"))),
        Cover(tuple(pts), (("1", "2"), ("3",), ("4",), ("5",), ("6",))),
    ])
    write("six_points.covers.json", GroupoidBundle(covers={"ground": tuple(pts), "sequence": seq}))


if __name__ == "__main__":
    main()
