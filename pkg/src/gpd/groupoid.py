"""Finite groupoids, functors between them, and the standard constructions.

Conventions: ``compose(g, h)`` is the arrow ``gh`` and is defined exactly when
``source(g) == target(h)``.  Objects are identified with their identity
arrows, so ``units`` is a subset of ``arrows``.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import cached_property
from types import MappingProxyType
from typing import Iterable, Mapping, Sequence

from .errors import GroupoidError, MorphismFailure, ValidationFailure


@dataclass(frozen=True, eq=False)
class FiniteGroupoid:
    """A validated finite groupoid.

    Build instances with :func:`validate_groupoid` or one of the constructors
    below; the initializer itself does not check the axioms.
    """

    arrows: tuple
    units: tuple
    source: Mapping
    target: Mapping
    compose_table: Mapping
    inverse_map: Mapping

    def __post_init__(self):
        for name in ("source", "target", "compose_table", "inverse_map"):
            object.__setattr__(self, name, MappingProxyType(dict(getattr(self, name))))
        object.__setattr__(self, "arrows", tuple(self.arrows))
        object.__setattr__(self, "units", tuple(self.units))

    # -- basic structure -------------------------------------------------
    def s(self, g):
        return self.source[g]

    def t(self, g):
        return self.target[g]

    def inv(self, g):
        return self.inverse_map[g]

    def composable(self, g, h) -> bool:
        return self.source[g] == self.target[h]

    def compose(self, g, h):
        try:
            return self.compose_table[(g, h)]
        except KeyError:
            raise GroupoidError(f"({g!r}, {h!r}) is not composable") from None

    def is_unit(self, g) -> bool:
        return g in self.unit_set

    @cached_property
    def unit_set(self) -> frozenset:
        return frozenset(self.units)

    @cached_property
    def index(self) -> Mapping:
        return MappingProxyType({g: i for i, g in enumerate(self.arrows)})

    @cached_property
    def composable_pairs(self) -> tuple:
        """All (g, h) with s(g) = t(h), in declaration order."""
        by_target: dict = {}
        for h in self.arrows:
            by_target.setdefault(self.target[h], []).append(h)
        return tuple((g, h) for g in self.arrows for h in by_target.get(self.source[g], ()))

    def composable_triples(self):
        by_target: dict = {}
        for h in self.arrows:
            by_target.setdefault(self.target[h], []).append(h)
        for g, h in self.composable_pairs:
            for k in by_target.get(self.source[h], ()):
                yield g, h, k

    def fiber(self, x) -> tuple:
        """The target fiber G^x."""
        return tuple(g for g in self.arrows if self.target[g] == x)

    def __len__(self) -> int:
        return len(self.arrows)

    def __contains__(self, g) -> bool:
        return g in self.index

    def _key(self):
        return (
            self.arrows,
            self.units,
            tuple(sorted(self.source.items())),
            tuple(sorted(self.target.items())),
            tuple(sorted(self.compose_table.items())),
            tuple(sorted(self.inverse_map.items())),
        )

    def __eq__(self, other):
        if not isinstance(other, FiniteGroupoid):
            return NotImplemented
        return self is other or self._key() == other._key()

    def __hash__(self):
        return hash(self._key())

    def __repr__(self):
        return f"FiniteGroupoid({len(self.arrows)} arrows, {len(self.units)} units)"

    def to_raw(self) -> dict:
        return {
            "arrows": list(self.arrows),
            "units": list(self.units),
            "source": dict(self.source),
            "target": dict(self.target),
            "compose": [[g, h, self.compose_table[(g, h)]] for g, h in self.composable_pairs],
            "inverse": dict(self.inverse_map),
        }


@dataclass(frozen=True)
class StructureReport:
    transitive: bool
    principal: bool
    units_separated_from_nonunits: bool = True


# ---------------------------------------------------------------------------
# validation
# ---------------------------------------------------------------------------

def _compose_mapping(raw_compose) -> dict:
    if isinstance(raw_compose, Mapping):
        return {tuple(k): v for k, v in raw_compose.items()}
    table = {}
    for entry in raw_compose:
        g, h, gh = entry
        if (g, h) in table and table[(g, h)] != gh:
            raise ValidationFailure("compose-domain mismatch", (g, h), "pair listed twice with different results")
        table[(g, h)] = gh
    return table


def validate_groupoid(candidate) -> FiniteGroupoid:
    """Check every groupoid axiom on a raw description and freeze it.

    ``candidate`` is a :class:`FiniteGroupoid` or a mapping with keys
    ``arrows``, ``units``, ``source``, ``target``, ``compose`` (a mapping
    ``(g, h) -> gh`` or a list of ``[g, h, gh]`` triples) and ``inverse``.
    Raises :class:`ValidationFailure` naming the first broken axiom.
    """
    if isinstance(candidate, FiniteGroupoid):
        raw = candidate.to_raw()
    else:
        raw = candidate
    arrows = tuple(raw["arrows"])
    units = tuple(raw["units"])
    source = dict(raw["source"])
    target = dict(raw["target"])
    inverse = dict(raw["inverse"])
    table = _compose_mapping(raw.get("compose", ()))

    if not arrows:
        raise ValidationFailure("nonempty", (), "groupoid has no arrows")
    declared = set(arrows)
    if len(declared) != len(arrows):
        dup = next(a for a in arrows if arrows.count(a) > 1)
        raise ValidationFailure("declaration", (dup,), "arrow declared twice")
    for u in units:
        if u not in declared:
            raise ValidationFailure("declaration", (u,), "unit is not a declared arrow")
    unit_set = set(units)
    for name, mapping in (("source", source), ("target", target), ("inverse", inverse)):
        for g in arrows:
            if g not in mapping:
                raise ValidationFailure("totality", (name, g), f"{name} undefined")
        for g, v in mapping.items():
            if g not in declared or v not in declared:
                raise ValidationFailure("declaration", (name, g, v), "undeclared identifier")
    for (g, h), gh in table.items():
        for a in (g, h, gh):
            if a not in declared:
                raise ValidationFailure("declaration", (g, h, gh), f"undeclared identifier {a!r}")

    for g in arrows:
        if source[g] not in unit_set or target[g] not in unit_set:
            raise ValidationFailure("source/target coherence", (g,), "source or target is not a unit")
    for u in units:
        if source[u] != u or target[u] != u or inverse[u] != u:
            raise ValidationFailure("unit law", (u,), "units must be fixed by source, target and inverse")

    for g in arrows:
        for h in arrows:
            defined = (g, h) in table
            if defined != (source[g] == target[h]):
                raise ValidationFailure("compose-domain mismatch", (g, h))

    for g in arrows:
        if table[(g, source[g])] != g:
            raise ValidationFailure("unit law", (g, source[g]))
        if table[(target[g], g)] != g:
            raise ValidationFailure("unit law", (target[g], g))

    for g in arrows:
        gi = inverse[g]
        if source[gi] != target[g] or target[gi] != source[g]:
            raise ValidationFailure("inverse law", (g, gi), "inverse has wrong endpoints")
        if table[(g, gi)] != target[g]:
            raise ValidationFailure("inverse law", (g, gi))
        if table[(gi, g)] != source[g]:
            raise ValidationFailure("inverse law", (gi, g))

    for (g, h), gh in table.items():
        if source[gh] != source[h] or target[gh] != target[g]:
            raise ValidationFailure("source/target coherence", (g, h, gh))

    G = FiniteGroupoid(arrows, units, source, target, table, inverse)
    for g, h, k in G.composable_triples():
        if table[(table[(g, h)], k)] != table[(g, table[(h, k)])]:
            raise ValidationFailure("associativity", (g, h, k))
    return G


# ---------------------------------------------------------------------------
# constructors
# ---------------------------------------------------------------------------

def pair_name(i: int, j: int, n: int) -> str:
    return f"g{i}{j}" if n < 10 else f"g{i}_{j}"


def pair_groupoid(n: int) -> FiniteGroupoid:
    """The pair groupoid on n objects: g_ij goes from x_i to x_j, x_i = g_ii."""
    if n < 1:
        raise ValueError("pair_groupoid needs n >= 1")
    idx = range(1, n + 1)
    name = {(i, j): pair_name(i, j, n) for i in idx for j in idx}
    arrows = [name[i, j] for i in idx for j in idx]
    units = [name[i, i] for i in idx]
    source = {name[i, j]: name[i, i] for i in idx for j in idx}
    target = {name[i, j]: name[j, j] for i in idx for j in idx}
    compose = {
        (name[j, k], name[i, j]): name[i, k] for i in idx for j in idx for k in idx
    }
    inverse = {name[i, j]: name[j, i] for i in idx for j in idx}
    return validate_groupoid(
        dict(arrows=arrows, units=units, source=source, target=target, compose=compose, inverse=inverse)
    )


def group_as_groupoid(table: Mapping) -> FiniteGroupoid:
    """One-object groupoid from a group multiplication table ``{(a, b): ab}``."""
    table = {tuple(k): v for k, v in table.items()}
    elements: list = []
    for a, b in table:
        for x in (a, b):
            if x not in elements:
                elements.append(x)
    for a in elements:
        for b in elements:
            if (a, b) not in table:
                raise ValidationFailure("closure", (a, b), "product missing from table")
            if table[(a, b)] not in elements:
                raise ValidationFailure("closure", (a, b, table[(a, b)]), "product is not an element")
    for a, b, c in itertools.product(elements, repeat=3):
        if table[(table[(a, b)], c)] != table[(a, table[(b, c)])]:
            raise ValidationFailure("associativity", (a, b, c))
    identity = next(
        (e for e in elements if all(table[(e, a)] == a == table[(a, e)] for a in elements)), None
    )
    if identity is None:
        raise ValidationFailure("unit law", (), "table has no identity element")
    inverse = {}
    for a in elements:
        b = next((b for b in elements if table[(a, b)] == identity == table[(b, a)]), None)
        if b is None:
            raise ValidationFailure("inverse law", (a,), "element has no inverse")
        inverse[a] = b
    return validate_groupoid(
        dict(
            arrows=elements,
            units=[identity],
            source={a: identity for a in elements},
            target={a: identity for a in elements},
            compose=table,
            inverse=inverse,
        )
    )


def abelian_group_table(*orders: int) -> dict:
    """Multiplication table of Z_{n1} x ... x Z_{nk}; elements are named "(a,b,...)"."""
    if not orders:
        raise ValueError("need at least one factor")
    elems = list(itertools.product(*(range(n) for n in orders)))

    def name(v):
        return "(" + ",".join(map(str, v)) + ")" if len(v) > 1 else str(v[0])

    return {
        (name(a), name(b)): name(tuple((x + y) % n for x, y, n in zip(a, b, orders)))
        for a in elems
        for b in elems
    }


def space_groupoid(points: Sequence) -> FiniteGroupoid:
    """A finite set viewed as a groupoid with only identity arrows."""
    points = [str(p) for p in points]
    if not points:
        raise ValueError("space must be nonempty")
    ident = {p: p for p in points}
    return validate_groupoid(
        dict(arrows=points, units=points, source=ident, target=ident,
             compose={(p, p): p for p in points}, inverse=ident)
    )


def product_name(g, h) -> str:
    return f"({g},{h})"


def product_groupoid(G: FiniteGroupoid, H: FiniteGroupoid) -> FiniteGroupoid:
    """Componentwise product; arrows are named "(g,h)"."""
    pn = product_name
    arrows = [pn(g, h) for g in G.arrows for h in H.arrows]
    units = [pn(x, y) for x in G.units for y in H.units]
    source = {pn(g, h): pn(G.s(g), H.s(h)) for g in G.arrows for h in H.arrows}
    target = {pn(g, h): pn(G.t(g), H.t(h)) for g in G.arrows for h in H.arrows}
    inverse = {pn(g, h): pn(G.inv(g), H.inv(h)) for g in G.arrows for h in H.arrows}
    compose = {
        (pn(g1, h1), pn(g2, h2)): pn(G.compose(g1, g2), H.compose(h1, h2))
        for g1, g2 in G.composable_pairs
        for h1, h2 in H.composable_pairs
    }
    return validate_groupoid(
        dict(arrows=arrows, units=units, source=source, target=target, compose=compose, inverse=inverse)
    )


def product_with_space(G: FiniteGroupoid, X: Sequence) -> FiniteGroupoid:
    """G x X: arrows (g,x), pairs with different X-coordinates never compose."""
    if not X:
        raise ValueError("product_with_space needs a nonempty set")
    return product_groupoid(G, space_groupoid(X))


def product_projection(G: FiniteGroupoid, H: FiniteGroupoid, factor: int = 0) -> "GroupoidMorphism":
    """Projection of ``product_groupoid(G, H)`` onto factor 0 (G) or 1 (H)."""
    P = product_groupoid(G, H)
    if factor == 0:
        amap = {product_name(g, h): g for g in G.arrows for h in H.arrows}
        return validate_morphism(amap, P, G)
    amap = {product_name(g, h): h for g in G.arrows for h in H.arrows}
    return validate_morphism(amap, P, H)


def space_projection(G: FiniteGroupoid, X: Sequence) -> "GroupoidMorphism":
    """The projection G x X -> G."""
    return product_projection(G, space_groupoid(X), 0)


def product_map(G: FiniteGroupoid, X: Sequence, Y: Sequence, f: Mapping) -> "GroupoidMorphism":
    """id_G x f : G x X -> G x Y for a function f: X -> Y."""
    X = [str(x) for x in X]
    Y = [str(y) for y in Y]
    amap = {product_name(g, x): product_name(g, str(f[x])) for g in G.arrows for x in X}
    return validate_morphism(amap, product_with_space(G, X), product_with_space(G, Y))


def disjoint_union(G: FiniteGroupoid, H: FiniteGroupoid) -> FiniteGroupoid:
    """Coproduct.  Identifiers are prefixed "1:"/"2:" when the arrow sets collide."""
    if set(G.arrows) & set(H.arrows):
        rg = {g: f"1:{g}" for g in G.arrows}
        rh = {h: f"2:{h}" for h in H.arrows}
    else:
        rg = {g: g for g in G.arrows}
        rh = {h: h for h in H.arrows}
    raw = dict(arrows=[], units=[], source={}, target={}, compose={}, inverse={})
    for K, r in ((G, rg), (H, rh)):
        raw["arrows"] += [r[g] for g in K.arrows]
        raw["units"] += [r[u] for u in K.units]
        raw["source"].update({r[g]: r[K.s(g)] for g in K.arrows})
        raw["target"].update({r[g]: r[K.t(g)] for g in K.arrows})
        raw["inverse"].update({r[g]: r[K.inv(g)] for g in K.arrows})
        raw["compose"].update({(r[g], r[h]): r[K.compose(g, h)] for g, h in K.composable_pairs})
    return validate_groupoid(raw)


def restrict(G: FiniteGroupoid, A: Iterable) -> FiniteGroupoid:
    """G(A): arrows that begin and end in the unit subset A."""
    A = set(A)
    keep = [g for g in G.arrows if G.s(g) in A and G.t(g) in A]
    if not keep:
        raise ValueError("restriction to an empty unit set")
    return validate_groupoid(
        dict(
            arrows=keep,
            units=[u for u in G.units if u in A],
            source={g: G.s(g) for g in keep},
            target={g: G.t(g) for g in keep},
            inverse={g: G.inv(g) for g in keep},
            compose={(g, h): G.compose(g, h) for g, h in G.composable_pairs if g in keep and h in keep},
        )
    )


@dataclass(frozen=True)
class LinkingReport:
    linking: bool
    a_full: bool
    b_full: bool
    restricted_a: FiniteGroupoid
    restricted_b: FiniteGroupoid


def _is_full(G: FiniteGroupoid, A: set) -> bool:
    reach = {G.s(g) for g in G.arrows if G.t(g) in A}
    return reach == set(G.units)


def is_linking_groupoid(L: FiniteGroupoid, A: Iterable, B: Iterable) -> LinkingReport:
    """Whether the unit partition {A, B} exhibits L as a linking groupoid of L(A) and L(B)."""
    A, B = set(A), set(B)
    if A & B:
        raise ValueError(f"unit subsets overlap on {sorted(A & B)}")
    if A | B != set(L.units):
        raise ValueError("A and B must cover the units of L")
    if not A or not B:
        raise ValueError("A and B must be nonempty")
    a_full, b_full = _is_full(L, A), _is_full(L, B)
    return LinkingReport(a_full and b_full, a_full, b_full, restrict(L, A), restrict(L, B))


def structural_predicates(G: FiniteGroupoid, partition: Iterable | None = None) -> StructureReport:
    """Transitivity and principality by exhaustive search.

    If an arrow partition is supplied, ``units_separated_from_nonunits`` reports
    whether no block mixes units with non-units; otherwise it is True.
    """
    connected = {(G.s(g), G.t(g)) for g in G.arrows}
    transitive = all((x, y) in connected for x in G.units for y in G.units)
    principal = all(g == G.s(g) for g in G.arrows if G.s(g) == G.t(g))
    separated = True
    if partition is not None:
        separated = all(
            all(G.is_unit(g) for g in block) or not any(G.is_unit(g) for g in block)
            for block in partition
        )
    return StructureReport(transitive, principal, separated)


# ---------------------------------------------------------------------------
# morphisms
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class GroupoidMorphism:
    """A validated functor; continuity and properness are automatic here."""

    domain: FiniteGroupoid
    codomain: FiniteGroupoid
    arrow_map: Mapping

    proper = True
    continuous = True

    def __post_init__(self):
        object.__setattr__(self, "arrow_map", MappingProxyType(dict(self.arrow_map)))

    def __call__(self, g):
        return self.arrow_map[g]

    @cached_property
    def surjective(self) -> bool:
        return set(self.arrow_map.values()) == set(self.codomain.arrows)

    @cached_property
    def injective(self) -> bool:
        return len(set(self.arrow_map.values())) == len(self.domain.arrows)

    def preimage(self, h) -> tuple:
        return tuple(g for g in self.domain.arrows if self.arrow_map[g] == h)

    def __eq__(self, other):
        if not isinstance(other, GroupoidMorphism):
            return NotImplemented
        return (
            self.domain == other.domain
            and self.codomain == other.codomain
            and dict(self.arrow_map) == dict(other.arrow_map)
        )

    def __hash__(self):
        return hash(tuple(sorted(self.arrow_map.items())))

    def __repr__(self):
        return f"GroupoidMorphism({self.domain!r} -> {self.codomain!r})"


def validate_morphism(arrow_map: Mapping, G: FiniteGroupoid, H: FiniteGroupoid) -> GroupoidMorphism:
    """Check the functor laws for ``arrow_map: G -> H``; raises MorphismFailure."""
    amap = dict(arrow_map)
    for g in G.arrows:
        if g not in amap:
            raise MorphismFailure("totality", (g,))
        if amap[g] not in H:
            raise MorphismFailure("codomain", (g, amap[g]), "image is not an arrow of the codomain")
    extra = set(amap) - set(G.arrows)
    if extra:
        raise MorphismFailure("domain", (sorted(extra)[0],), "map defined on an undeclared arrow")
    for u in G.units:
        if not H.is_unit(amap[u]):
            raise MorphismFailure("units to units", (u, amap[u]))
    for g in G.arrows:
        if amap[G.s(g)] != H.s(amap[g]):
            raise MorphismFailure("source", (g,))
        if amap[G.t(g)] != H.t(amap[g]):
            raise MorphismFailure("target", (g,))
        if amap[G.inv(g)] != H.inv(amap[g]):
            raise MorphismFailure("inverse", (g, G.inv(g)))
    for g, h in G.composable_pairs:
        if amap[G.compose(g, h)] != H.compose(amap[g], amap[h]):
            raise MorphismFailure("composition", (g, h))
    return GroupoidMorphism(G, H, amap)


def identity_morphism(G: FiniteGroupoid) -> GroupoidMorphism:
    return GroupoidMorphism(G, G, {g: g for g in G.arrows})


def compose_morphisms(second: GroupoidMorphism, first: GroupoidMorphism) -> GroupoidMorphism:
    """second o first."""
    if first.codomain != second.domain:
        raise GroupoidError("morphisms are not composable")
    return GroupoidMorphism(
        first.domain, second.codomain, {g: second(first(g)) for g in first.domain.arrows}
    )


def is_isomorphism(q: GroupoidMorphism) -> bool:
    # a bijective functor between groupoids has a functorial inverse
    return q.injective and q.surjective
