"""Groupoid congruences and quotient groupoids with induced Haar system and cocycle.

The conditions checked here are the exact, stabilized forms of the cover
requirements used to build approximation groupoids:

    C3  g ~ h  implies  s(g) ~ s(h) and t(g) ~ t(h)
    C4  [s(g)] = [t(h)]  implies some g' ~ g, h' ~ h are composable
    C5  the object partition is the arrow partition restricted to units
    C6  g ~ g', h ~ h' (both pairs composable)  implies  gh ~ g'h'
    C7  g ~ h  implies  g^-1 ~ h^-1
    C8  x ~ y units  implies  mu^x(C) = mu^y(C) for every class C
    C9  g ~ g', h ~ h' (both composable)  implies  sigma(g, h) = sigma(g', h')
"""
from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Iterator, Sequence

from .covers import (
    Cover,
    NormalSequence,
    image_cover,
    is_intersection_separating,
    refinement_witness,
    star,
    trace,
    union_cover,
)
from .errors import CongruenceRejected, CoverError, GroupoidError
from .groupoid import FiniteGroupoid, GroupoidMorphism, validate_groupoid, validate_morphism
from .haar import (
    TOL,
    Check,
    Cocycle,
    HaarSystem,
    cocycle_from_angles,
    counting_haar,
    is_cocycle_preserving,
    is_haar_preserving,
    pushforward_haar,
    trivial_cocycle,
    validate_cocycle,
)

CONDITIONS = ("C3", "C4", "C5", "C6", "C7", "C8", "C9")


@dataclass(frozen=True, eq=False)
class Congruence:
    groupoid: FiniteGroupoid
    arrow_partition: tuple
    object_partition: tuple

    def __post_init__(self):
        order = self.groupoid.index
        for name in ("arrow_partition", "object_partition"):
            blocks = [frozenset(b) for b in getattr(self, name)]
            blocks.sort(key=lambda b: min(order[g] for g in b))
            object.__setattr__(self, name, tuple(blocks))

    def block_of(self, g) -> frozenset:
        return self._arrow_class[g]

    def object_block_of(self, x) -> frozenset | None:
        return self._object_class.get(x)

    @cached_property
    def _arrow_class(self) -> dict:
        return {g: b for b in self.arrow_partition for g in b}

    @cached_property
    def _object_class(self) -> dict:
        return {x: b for b in self.object_partition for x in b}

    def representative(self, block) -> str:
        order = self.groupoid.index
        return min(block, key=order.__getitem__)

    def refines(self, other: "Congruence") -> bool:
        """Every block of self lies inside a block of other."""
        return all(self.block_of(g) <= other.block_of(g) for g in self.groupoid.arrows)

    def __eq__(self, other):
        if not isinstance(other, Congruence):
            return NotImplemented
        return (
            self.groupoid == other.groupoid
            and set(self.arrow_partition) == set(other.arrow_partition)
            and set(self.object_partition) == set(other.object_partition)
        )

    def __hash__(self):
        return hash(frozenset(self.arrow_partition))

    def __repr__(self):
        blocks = [sorted(b, key=self.groupoid.index.__getitem__) for b in self.arrow_partition if len(b) > 1]
        return f"Congruence(nontrivial blocks={blocks})"


def congruence(G: FiniteGroupoid, blocks: Iterable[Iterable], object_blocks: Iterable[Iterable] | None = None) -> Congruence:
    """Congruence from an arrow partition; unlisted arrows become singletons.

    The object partition defaults to the arrow partition restricted to units.
    """
    seen: dict = {}
    parts = []
    for b in blocks:
        b = frozenset(b)
        if not b:
            continue
        for g in b:
            if g not in G:
                raise GroupoidError(f"{g!r} is not an arrow")
            if g in seen:
                raise GroupoidError(f"{g!r} lies in two blocks")
            seen[g] = b
        parts.append(b)
    parts += [frozenset([g]) for g in G.arrows if g not in seen]
    if object_blocks is None:
        objs = [b & G.unit_set for b in parts if b & G.unit_set]
    else:
        objs = [frozenset(b) for b in object_blocks]
        covered = [x for b in objs for x in b]
        if len(covered) != len(set(covered)) or set(covered) != G.unit_set:
            raise GroupoidError("object blocks must partition the units")
    return Congruence(G, tuple(parts), tuple(objs))


def identity_congruence(G: FiniteGroupoid) -> Congruence:
    return congruence(G, [])


def congruence_from_sequence(G: FiniteGroupoid, seq0: NormalSequence, seq1: NormalSequence) -> Congruence:
    """g ~ h iff every cover of the sequence (tail included) co-contains them."""
    if set(seq0.ground) != G.unit_set:
        raise CoverError("object sequence must cover exactly the units")
    if set(seq1.ground) != set(G.arrows):
        raise CoverError("arrow sequence must cover exactly the arrows")

    def classes(seq: NormalSequence, points: Sequence) -> list:
        out: list = []
        for x in points:
            for c in out:
                y = next(iter(c))
                if all(any(x in m and y in m for m in cov.members) for cov in seq.covers):
                    c.add(x)
                    break
            else:
                out.append({x})
        return out

    return congruence(G, classes(seq1, G.arrows), classes(seq0, G.units))


# ---------------------------------------------------------------------------
# condition checks
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ConditionResult:
    name: str
    passed: bool
    witnesses: tuple = ()
    applicable: bool = True

    @property
    def witness(self):
        return self.witnesses[0] if self.witnesses else None


@dataclass(frozen=True)
class CongruenceReport:
    conditions: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.conditions.values() if c.applicable)

    def failed(self) -> list:
        return [n for n, c in self.conditions.items() if c.applicable and not c.passed]

    def __getitem__(self, name) -> ConditionResult:
        return self.conditions[name]

    def lines(self) -> list:
        out = []
        for name, c in self.conditions.items():
            if not c.applicable:
                out.append(f"{name}: n/a")
            elif c.passed:
                out.append(f"{name}: pass")
            else:
                out.append(f"{name}: FAIL witness={c.witness!r}")
        return out


def _obj(P: Congruence, x):
    return P.object_block_of(x)


def _c3(G, P) -> Iterator:
    for b in P.arrow_partition:
        rep = P.representative(b)
        for g in b:
            if _obj(P, G.s(g)) != _obj(P, G.s(rep)) or _obj(P, G.t(g)) != _obj(P, G.t(rep)):
                yield (rep, g)


def _c4(G, P) -> Iterator:
    for b1 in P.arrow_partition:
        srcs = {_obj(P, G.s(g)) for g in b1}
        s_units = {G.s(g) for g in b1}
        for b2 in P.arrow_partition:
            if not srcs & {_obj(P, G.t(h)) for h in b2}:
                continue
            if not s_units & {G.t(h) for h in b2}:
                yield (P.representative(b1), P.representative(b2))


def _c5(G, P) -> Iterator:
    restricted = {b & G.unit_set for b in P.arrow_partition if b & G.unit_set}
    for x in G.units:
        want = P.block_of(x) & G.unit_set
        have = _obj(P, x)
        if have != want:
            other = next(iter((have or frozenset()) ^ want), x)
            yield (x, other)
    if restricted != set(P.object_partition):
        extra = next(iter(set(P.object_partition) - restricted), None)
        if extra is not None:
            yield tuple(sorted(extra))


def _products_by_blocks(G, P):
    out: dict = defaultdict(list)
    for g, h in G.composable_pairs:
        out[(P.block_of(g), P.block_of(h))].append((g, h))
    return out


def _c6(G, P, products) -> Iterator:
    for pairs in products.values():
        first = pairs[0]
        target = P.block_of(G.compose(*first))
        for p in pairs[1:]:
            if P.block_of(G.compose(*p)) != target:
                yield (first, p)


def _c7(G, P) -> Iterator:
    for b in P.arrow_partition:
        rep = P.representative(b)
        ib = P.block_of(G.inv(rep))
        for g in b:
            if G.inv(g) not in ib:
                yield (rep, g)


def _c8(G, P, w: HaarSystem) -> Iterator:
    for ob in P.object_partition:
        units = sorted(ob, key=G.index.__getitem__)
        x = units[0]
        for y in units[1:]:
            for b in P.arrow_partition:
                if w.fiber_measure(x, b) != w.fiber_measure(y, b):
                    yield (x, y, P.representative(b))


def _c9(G, P, products, sigma: Cocycle, tol: float) -> Iterator:
    for pairs in products.values():
        first = pairs[0]
        for p in pairs[1:]:
            if sigma.angles is not None:
                differ = sigma.angles[first] != sigma.angles[p]
            else:
                differ = abs(sigma(*first) - sigma(*p)) > tol
            if differ:
                yield (first, p)


def check_congruence(
    G: FiniteGroupoid,
    P: Congruence,
    w: HaarSystem | None = None,
    sigma: Cocycle | None = None,
    *,
    exhaustive: bool = True,
    tol: float = TOL,
) -> CongruenceReport:
    """Evaluate C3-C9; C8 needs ``w`` and C9 needs ``sigma``.

    With ``exhaustive=False`` each condition stops at its first witness.
    """
    if P.groupoid != G:
        raise GroupoidError("congruence belongs to a different groupoid")
    products = _products_by_blocks(G, P)
    gens = {
        "C3": lambda: _c3(G, P),
        "C4": lambda: _c4(G, P),
        "C5": lambda: _c5(G, P),
        "C6": lambda: _c6(G, P, products),
        "C7": lambda: _c7(G, P),
        "C8": (lambda: _c8(G, P, w)) if w is not None else None,
        "C9": (lambda: _c9(G, P, products, sigma, tol)) if sigma is not None else None,
    }
    results = {}
    for name, gen in gens.items():
        if gen is None:
            results[name] = ConditionResult(name, True, (), applicable=False)
            continue
        if exhaustive:
            witnesses = tuple(gen())
        else:
            first = next(gen(), None)
            witnesses = () if first is None else (first,)
        results[name] = ConditionResult(name, not witnesses, witnesses)
    return CongruenceReport(results)


def is_congruence(G, P, w=None, sigma=None) -> bool:
    return check_congruence(G, P, w, sigma, exhaustive=False).passed


def etale_like_check(G: FiniteGroupoid, P: Congruence) -> bool:
    """No class mixes units with non-units."""
    return all(b <= G.unit_set or not (b & G.unit_set) for b in P.arrow_partition)


# ---------------------------------------------------------------------------
# quotient construction
# ---------------------------------------------------------------------------

def block_name(G: FiniteGroupoid, block) -> str:
    return "[" + ",".join(sorted(block, key=G.index.__getitem__)) + "]"


@dataclass(frozen=True)
class Quotient:
    groupoid: FiniteGroupoid
    haar: HaarSystem
    cocycle: Cocycle
    map: GroupoidMorphism
    congruence: Congruence
    report: CongruenceReport


def build_quotient(
    G: FiniteGroupoid,
    P: Congruence,
    w: HaarSystem | None = None,
    sigma: Cocycle | None = None,
) -> Quotient:
    """Quotient groupoid G/P with pushed-forward Haar system and cocycle.

    ``w`` and ``sigma`` default to counting measure and the trivial cocycle.
    Raises CongruenceRejected when any condition fails.
    """
    w = w if w is not None else counting_haar(G)
    sigma = sigma if sigma is not None else trivial_cocycle(G)
    report = check_congruence(G, P, w, sigma)
    if not report.passed:
        raise CongruenceRejected(report)

    name = {b: block_name(G, b) for b in P.arrow_partition}
    qmap = {g: name[P.block_of(g)] for g in G.arrows}
    arrows = [name[b] for b in P.arrow_partition]
    units = list(dict.fromkeys(qmap[x] for x in G.units))
    rep = {name[b]: P.representative(b) for b in P.arrow_partition}
    source = {a: qmap[G.s(g)] for a, g in rep.items()}
    target = {a: qmap[G.t(g)] for a, g in rep.items()}
    inverse = {a: qmap[G.inv(g)] for a, g in rep.items()}
    compose = {}
    lift = {}
    for g, h in G.composable_pairs:
        key = (qmap[g], qmap[h])
        if key not in lift:
            lift[key] = (g, h)
            compose[key] = qmap[G.compose(g, h)]
    quotient = validate_groupoid(
        dict(arrows=arrows, units=units, source=source, target=target, compose=compose, inverse=inverse)
    )
    q = validate_morphism(qmap, G, quotient)
    w_q = pushforward_haar(q, w)
    if sigma.angles is not None:
        sigma_q = cocycle_from_angles(quotient, {k: sigma.angles[p] for k, p in lift.items()})
    else:
        sigma_q = validate_cocycle(quotient, {k: sigma(*p) for k, p in lift.items()})
    if not is_haar_preserving(q, w, w_q):
        raise AssertionError("quotient map is not Haar preserving")
    if not is_cocycle_preserving(q, sigma, sigma_q):
        raise AssertionError("quotient map is not cocycle preserving")
    return Quotient(quotient, w_q, sigma_q, q, P, report)


# ---------------------------------------------------------------------------
# cover-level conditions on a pair of normal sequences
# ---------------------------------------------------------------------------

def _star_refines_collection(images: Cover, target: Cover):
    return refinement_witness((star(m, images) for m in images.members), target)


def sequence_conditions(G: FiniteGroupoid, seq0: NormalSequence, seq1: NormalSequence) -> dict:
    """Cover-level groupoid conditions (3)-(7) at every level, with K_n = G.

    Returns condition label -> Check; a failing Check carries (level, witness).
    """
    units = list(G.units)
    out = {}
    depth = max(len(seq0), len(seq1))

    def first_failure(fn):
        for n in range(depth):
            bad = fn(n)
            if bad is not None:
                return Check(False, (n, bad))
        return Check(True)

    def c3(n):
        U1, U0 = seq1.level(n), seq0.level(n)
        for f in (G.s, G.t):
            bad = _star_refines_collection(image_cover(U1, f, units), U0)
            if bad is not None:
                return bad
        return None

    def c4(n):
        U1 = seq1.level(n)
        both = union_cover(image_cover(U1, G.t, units), image_cover(U1, G.s, units))
        chk = is_intersection_separating(seq0.level(n + 1), both)
        return None if chk else chk.witness

    def c5(n):
        return _star_refines_collection(seq0.level(n + 1), trace(seq1.level(n), units))

    def c6(n):
        U1 = seq1.level(n + 1)
        images = []
        for A in U1.members:
            for B in U1.members:
                img = frozenset(G.compose(g, h) for g in A for h in B if G.composable(g, h))
                if img:
                    images.append(img)
        return _star_refines_collection(Cover(G.arrows, tuple(images)), seq1.level(n))

    def c7(n):
        inv = image_cover(seq1.level(n + 1), G.inv, G.arrows)
        return _star_refines_collection(inv, seq1.level(n))

    for label, fn in (("3", c3), ("4", c4), ("5", c5), ("6", c6), ("7", c7)):
        out[label] = first_failure(fn)
    return out
