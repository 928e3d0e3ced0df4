"""Haar systems as arrow weights, and circle-valued 2-cocycles.

A Haar system on a finite groupoid is stored as one positive rational weight
per arrow; the fiber measure mu^x puts weight(g) on every g with t(g) = x.
Left invariance forces weight(g) = weight(s(g)).
"""
from __future__ import annotations

import cmath
from collections import defaultdict
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from types import MappingProxyType
from typing import Any, Mapping

from .errors import (
    CocycleError,
    CocycleViolation,
    FiberInconsistency,
    GroupoidError,
    InvarianceViolation,
    NonPositiveWeight,
    NonUnitModulus,
    NotSurjective,
)
from .groupoid import FiniteGroupoid, GroupoidMorphism

TOL = 1e-9


@dataclass(frozen=True)
class Check:
    """Boolean outcome with a counterexample when it is False."""

    ok: bool
    witness: Any = None
    detail: str = ""

    def __bool__(self) -> bool:
        return self.ok


def as_fraction(value) -> Fraction:
    if isinstance(value, Fraction):
        return value
    if isinstance(value, float):
        return Fraction(value).limit_denominator(10**12)
    return Fraction(value)


# ---------------------------------------------------------------------------
# Haar systems
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class HaarSystem:
    groupoid: FiniteGroupoid
    weights: Mapping

    def __post_init__(self):
        object.__setattr__(self, "weights", MappingProxyType(dict(self.weights)))

    def __getitem__(self, g) -> Fraction:
        return self.weights[g]

    def fiber_measure(self, x, arrows=None) -> Fraction:
        """mu^x of a set of arrows (the whole fiber when ``arrows`` is None)."""
        G = self.groupoid
        pool = G.arrows if arrows is None else arrows
        return sum((self.weights[g] for g in pool if G.t(g) == x), Fraction(0))

    def unit_weights(self) -> dict:
        return {x: self.weights[x] for x in self.groupoid.units}

    def __eq__(self, other):
        if not isinstance(other, HaarSystem):
            return NotImplemented
        return self.groupoid == other.groupoid and dict(self.weights) == dict(other.weights)

    def __hash__(self):
        return hash(tuple(sorted(self.weights.items())))

    def __repr__(self):
        return f"HaarSystem({dict(self.weights)})"


def validate_haar(G: FiniteGroupoid, weights: Mapping) -> HaarSystem:
    """Accept iff every weight is positive and weight(gh) = weight(h) on G^(2)."""
    w = {}
    for g in G.arrows:
        if g not in weights:
            raise NonPositiveWeight(g, None)
        w[g] = as_fraction(weights[g])
        if w[g] <= 0:
            raise NonPositiveWeight(g, w[g])
    for g, h in G.composable_pairs:
        gh = G.compose(g, h)
        if w[gh] != w[h]:
            raise InvarianceViolation(g, h, f"weight({gh})={w[gh]} but weight({h})={w[h]}")
    return HaarSystem(G, w)


def counting_haar(G: FiniteGroupoid) -> HaarSystem:
    return HaarSystem(G, {g: Fraction(1) for g in G.arrows})


def haar_from_unit_weights(G: FiniteGroupoid, c: Mapping) -> HaarSystem:
    """The Haar system with weight(g) = c(s(g))."""
    return validate_haar(G, {g: as_fraction(c[G.s(g)]) for g in G.arrows})


def _class_sums(q: GroupoidMorphism, w: HaarSystem) -> dict:
    """(x, h) -> sum of w(g) over q(g) = h, t(g) = x, for domain units x."""
    G = q.domain
    sums: dict = defaultdict(Fraction)
    for g in G.arrows:
        sums[(G.t(g), q(g))] += w[g]
    return sums


def pushforward_haar(q: GroupoidMorphism, w: HaarSystem) -> HaarSystem:
    """Push a Haar system forward along a surjective morphism.

    nu(h) is the w-mass of {g : q(g) = h, t(g) = x} for any unit x over t(h);
    raises FiberInconsistency when that mass depends on the choice of x.
    """
    G, H = q.domain, q.codomain
    if not q.surjective:
        missing = next(h for h in H.arrows if h not in set(q.arrow_map.values()))
        raise NotSurjective(missing)
    sums = _class_sums(q, w)
    over: dict = defaultdict(list)
    for x in G.units:
        over[q(x)].append(x)
    nu = {}
    for h in H.arrows:
        z = H.t(h)
        xs = over[z]
        values = [sums.get((x, h), Fraction(0)) for x in xs]
        for x, v in zip(xs[1:], values[1:]):
            if v != values[0]:
                raise FiberInconsistency((z, xs[0], x, h), f"{values[0]} != {v}")
        nu[h] = values[0]
    for h, v in nu.items():
        if v <= 0:
            raise FiberInconsistency((H.t(h), over[H.t(h)][0], h), "fiber carries no mass over this arrow")
    return validate_haar(H, nu)


def is_haar_preserving(q: GroupoidMorphism, w_G: HaarSystem, w_H: HaarSystem) -> Check:
    """q_* mu^x = nu^{q(x)} for every domain unit x, checked arrow by arrow."""
    G, H = q.domain, q.codomain
    sums = _class_sums(q, w_G)
    for x in G.units:
        z = q(x)
        for h in H.arrows:
            got = sums.get((x, h), Fraction(0))
            want = w_H[h] if H.t(h) == z else Fraction(0)
            if got != want:
                return Check(False, (z, x, h), f"pushforward gives {got}, expected {want}")
    return Check(True)


# ---------------------------------------------------------------------------
# 2-cocycles
# ---------------------------------------------------------------------------

def root_of_unity(angle: Fraction):
    """exp(2*pi*i*angle); exact for quarter turns (ints for +-1)."""
    a = Fraction(angle) % 1
    exact = {Fraction(0): 1, Fraction(1, 2): -1, Fraction(1, 4): 1j, Fraction(3, 4): -1j}
    if a in exact:
        return exact[a]
    return cmath.exp(2j * cmath.pi * float(a))


@dataclass(frozen=True, eq=False)
class Cocycle:
    """Values on composable pairs; ``angles`` holds exact turns when known."""

    groupoid: FiniteGroupoid
    values: Mapping
    angles: Mapping | None = None

    def __post_init__(self):
        object.__setattr__(self, "values", MappingProxyType(dict(self.values)))
        if self.angles is not None:
            object.__setattr__(self, "angles", MappingProxyType(dict(self.angles)))

    def __call__(self, g, h):
        return self.values[(g, h)]

    @cached_property
    def is_trivial(self) -> bool:
        return all(v == 1 for v in self.values.values())

    def __eq__(self, other):
        if not isinstance(other, Cocycle):
            return NotImplemented
        if self.groupoid != other.groupoid:
            return False
        if self.angles is not None and other.angles is not None:
            return dict(self.angles) == dict(other.angles)
        return all(abs(self.values[p] - other.values[p]) <= TOL for p in self.values)

    def __hash__(self):
        return hash(self.groupoid)

    def __repr__(self):
        return f"Cocycle({len(self.values)} pairs, trivial={self.is_trivial})"


def validate_cocycle(G: FiniteGroupoid, values: Mapping, tol: float = TOL, angles=None) -> Cocycle:
    """Check modulus and the cocycle identity on every composable triple."""
    pairs = set(G.composable_pairs)
    vals = {}
    for p in G.composable_pairs:
        if p not in values:
            raise CocycleError(f"cocycle undefined on composable pair {p!r}")
        v = values[p]
        if abs(abs(v) - 1) > tol:
            raise NonUnitModulus(p, v)
        vals[p] = v
    for p in values:
        if tuple(p) not in pairs:
            raise CocycleError(f"cocycle given on non-composable pair {tuple(p)!r}")
    for g, h, k in G.composable_triples():
        gh, hk = G.compose(g, h), G.compose(h, k)
        lhs = vals[(g, h)] * vals[(gh, k)]
        rhs = vals[(g, hk)] * vals[(h, k)]
        if abs(lhs - rhs) > tol:
            raise CocycleViolation(g, h, k, abs(lhs - rhs))
    return Cocycle(G, vals, angles)


def cocycle_from_angles(G: FiniteGroupoid, angles: Mapping) -> Cocycle:
    """sigma(g, h) = exp(2*pi*i*angles[(g, h)]); missing pairs get angle 0."""
    turns = {p: Fraction(angles.get(p, 0)) % 1 for p in G.composable_pairs}
    return validate_cocycle(G, {p: root_of_unity(a) for p, a in turns.items()}, angles=turns)


def trivial_cocycle(G: FiniteGroupoid) -> Cocycle:
    return cocycle_from_angles(G, {})


def coboundary(G: FiniteGroupoid, b: Mapping) -> Cocycle:
    """sigma(g, h) = b(g) b(h) / b(gh) for unit-modulus b."""
    vals = {(g, h): b[g] * b[h] / b[G.compose(g, h)] for g, h in G.composable_pairs}
    return validate_cocycle(G, vals)


def _same_groupoid(sigma: Cocycle, tau: Cocycle):
    if sigma.groupoid != tau.groupoid:
        raise GroupoidError("cocycles live on different groupoids")


def cocycle_product(sigma: Cocycle, tau: Cocycle) -> Cocycle:
    _same_groupoid(sigma, tau)
    G = sigma.groupoid
    if sigma.angles is not None and tau.angles is not None:
        return cocycle_from_angles(G, {p: sigma.angles[p] + tau.angles[p] for p in G.composable_pairs})
    return validate_cocycle(G, {p: sigma.values[p] * tau.values[p] for p in G.composable_pairs})


def cocycle_inverse(sigma: Cocycle) -> Cocycle:
    G = sigma.groupoid
    if sigma.angles is not None:
        return cocycle_from_angles(G, {p: -a for p, a in sigma.angles.items()})
    return validate_cocycle(G, {p: 1 / v for p, v in sigma.values.items()})


def cocycle_ops(sigma: Cocycle, tau: Cocycle) -> tuple[Cocycle, Cocycle]:
    """(sigma * tau, sigma^{-1}) under pointwise operations."""
    return cocycle_product(sigma, tau), cocycle_inverse(sigma)


def pullback_cocycle(q: GroupoidMorphism, sigma: Cocycle) -> Cocycle:
    """q^* sigma (g, h) = sigma(q(g), q(h))."""
    G = q.domain
    if sigma.angles is not None:
        return cocycle_from_angles(G, {(g, h): sigma.angles[(q(g), q(h))] for g, h in G.composable_pairs})
    return validate_cocycle(G, {(g, h): sigma(q(g), q(h)) for g, h in G.composable_pairs})


def is_cocycle_preserving(q: GroupoidMorphism, sigma_G: Cocycle, sigma_H: Cocycle, tol: float = TOL) -> Check:
    exact = sigma_G.angles is not None and sigma_H.angles is not None
    for g, h in q.domain.composable_pairs:
        p, r = (g, h), (q(g), q(h))
        if exact:
            if sigma_G.angles[p] != sigma_H.angles[r]:
                return Check(False, p, f"angle {sigma_G.angles[p]} vs {sigma_H.angles[r]}")
        elif abs(sigma_G(g, h) - sigma_H(*r)) > tol:
            return Check(False, p, f"{sigma_G(g, h)} vs {sigma_H(*r)}")
    return Check(True)
