"""Inverse systems of finite groupoids, their limits, and the dual direct systems of algebras."""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Mapping, Sequence

import numpy as np

from .convolution import (
    AlgebraContext,
    ConvElement,
    adjoint,
    convolve,
    default_seed,
    delta,
    i_norm,
    pullback,
    random_element,
)
from .errors import FiberInconsistency, GuardExceeded, ValidationFailure
from .groupoid import (
    FiniteGroupoid,
    GroupoidMorphism,
    compose_morphisms,
    identity_morphism,
    is_isomorphism,
    validate_groupoid,
    validate_morphism,
)
from .haar import (
    Cocycle,
    HaarSystem,
    cocycle_from_angles,
    counting_haar,
    is_cocycle_preserving,
    is_haar_preserving,
    trivial_cocycle,
    validate_cocycle,
    validate_haar,
)
from .quotient import Congruence, build_quotient, congruence, is_congruence


class SystemFailure(ValidationFailure):
    """An inverse-system law failed; ``witness`` names the node or pair."""


@dataclass(frozen=True, eq=False)
class InverseSystem:
    """Nodes with (G, w, sigma), a partial order (pairs alpha >= beta) and bonding maps.

    ``bonds[(alpha, beta)]`` is the map G_alpha -> G_beta for alpha >= beta.
    """

    nodes: tuple
    contexts: Mapping
    order: frozenset
    bonds: Mapping

    def geq(self, a, b) -> bool:
        return (a, b) in self.order

    def comparable_pairs(self) -> list:
        return [(a, b) for a in self.nodes for b in self.nodes if a != b and (a, b) in self.order]

    def groupoid(self, a) -> FiniteGroupoid:
        return self.contexts[a].groupoid


def _closure(nodes: Sequence, pairs: Iterable) -> set:
    rel = {(a, a) for a in nodes} | {tuple(p) for p in pairs}
    changed = True
    while changed:
        changed = False
        for (a, b), (c, d) in itertools.product(list(rel), repeat=2):
            if b == c and (a, d) not in rel:
                rel.add((a, d))
                changed = True
    return rel


def inverse_system(
    contexts: Mapping,
    order: Iterable,
    bonds: Mapping,
) -> InverseSystem:
    """Assemble an inverse system; composite and identity bonds are filled in.

    ``contexts`` maps node name -> AlgebraContext; ``order`` lists pairs
    (alpha, beta) meaning alpha >= beta; ``bonds`` maps such pairs to a
    GroupoidMorphism or a plain arrow mapping.
    """
    nodes = tuple(contexts)
    for a, b in order:
        if a not in contexts or b not in contexts:
            raise SystemFailure("declaration", (a, b), "order mentions an unknown node")
    rel = _closure(nodes, order)
    maps: dict = {}
    for (a, b), m in bonds.items():
        if (a, b) not in rel:
            raise SystemFailure("order", (a, b), "bond given for an incomparable pair")
        if isinstance(m, GroupoidMorphism):
            maps[(a, b)] = m
        else:
            try:
                maps[(a, b)] = validate_morphism(m, contexts[a].groupoid, contexts[b].groupoid)
            except ValidationFailure as exc:
                raise SystemFailure("functor", (a, b), str(exc)) from exc
    for a in nodes:
        maps.setdefault((a, a), identity_morphism(contexts[a].groupoid))
    # fill composites along chains of given bonds
    changed = True
    while changed:
        changed = False
        for (a, b), (c, d) in itertools.product(list(maps), repeat=2):
            if b == c and a != b and c != d and (a, d) not in maps:
                maps[(a, d)] = compose_morphisms(maps[(c, d)], maps[(a, b)])
                changed = True
    return InverseSystem(nodes, dict(contexts), frozenset(rel), maps)


def validate_inverse_system(sys: InverseSystem) -> InverseSystem:
    nodes = sys.nodes
    for a, b in itertools.product(nodes, repeat=2):
        if a != b and sys.geq(a, b) and sys.geq(b, a):
            raise SystemFailure("antisymmetry", (a, b))
    for a, b in itertools.product(nodes, repeat=2):
        if not any(sys.geq(c, a) and sys.geq(c, b) for c in nodes):
            raise SystemFailure("directed", (a, b), "no upper bound")
    for a in nodes:
        if dict(sys.bonds[(a, a)].arrow_map) != {g: g for g in sys.groupoid(a).arrows}:
            raise SystemFailure("identity bond", (a,))
    for a, b in sys.comparable_pairs():
        if (a, b) not in sys.bonds:
            raise SystemFailure("missing bond", (a, b))
        q = sys.bonds[(a, b)]
        ca, cb = sys.contexts[a], sys.contexts[b]
        try:
            validate_morphism(q.arrow_map, ca.groupoid, cb.groupoid)
        except ValidationFailure as exc:
            raise SystemFailure("functor", (a, b), str(exc)) from exc
        if not q.surjective:
            raise SystemFailure("surjective", (a, b))
        hp = is_haar_preserving(q, ca.haar, cb.haar)
        if not hp:
            raise FiberInconsistency((a, b) + tuple(hp.witness), hp.detail)
        cp = is_cocycle_preserving(q, ca.cocycle, cb.cocycle)
        if not cp:
            raise SystemFailure("cocycle preserving", (a, b) + tuple(cp.witness), cp.detail)
    for a, b, c in itertools.product(nodes, repeat=3):
        if sys.geq(a, b) and sys.geq(b, c):
            lhs = compose_morphisms(sys.bonds[(b, c)], sys.bonds[(a, b)])
            if dict(lhs.arrow_map) != dict(sys.bonds[(a, c)].arrow_map):
                raise SystemFailure("composition", (a, b, c))
    return sys


def top_node(sys: InverseSystem):
    for a in sys.nodes:
        if all(sys.geq(a, b) for b in sys.nodes):
            return a
    raise SystemFailure("directed", (), "finite directed poset without a maximum")


@dataclass(frozen=True)
class Thread:
    components: Mapping

    def __getitem__(self, node):
        return self.components[node]


def enumerate_threads(sys: InverseSystem) -> list:
    """All compatible families (g_alpha) by brute force over the product of arrow sets."""
    nodes = sys.nodes
    out = []
    for combo in itertools.product(*(sys.groupoid(a).arrows for a in nodes)):
        comp = dict(zip(nodes, combo))
        if all(sys.bonds[(a, b)](comp[a]) == comp[b] for a, b in sys.comparable_pairs()):
            out.append(Thread(comp))
    return out


@dataclass(frozen=True)
class InverseLimit:
    groupoid: FiniteGroupoid
    projections: Mapping
    haar: HaarSystem
    cocycle: Cocycle
    threads: Mapping  # limit arrow -> Thread
    top: object
    checks: Mapping = field(default_factory=dict)  # node -> (haar Check, cocycle Check)


def inverse_limit(sys: InverseSystem) -> InverseLimit:
    """Thread groupoid with componentwise operations, plus transported Haar system and cocycle.

    Threads are named after their component at the top node.
    """
    validate_inverse_system(sys)
    tau = top_node(sys)
    nodes = sys.nodes
    Gt = sys.groupoid(tau)
    threads = {g: Thread({a: sys.bonds[(tau, a)](g) for a in nodes}) for g in Gt.arrows}
    by_key = {tuple(th[a] for a in nodes): name for name, th in threads.items()}

    def lookup(comp: dict):
        return by_key[tuple(comp[a] for a in nodes)]

    arrows = list(threads)
    source, target, inverse, compose = {}, {}, {}, {}
    for name, th in threads.items():
        source[name] = lookup({a: sys.groupoid(a).s(th[a]) for a in nodes})
        target[name] = lookup({a: sys.groupoid(a).t(th[a]) for a in nodes})
        inverse[name] = lookup({a: sys.groupoid(a).inv(th[a]) for a in nodes})
    for n1, t1 in threads.items():
        for n2, t2 in threads.items():
            if all(sys.groupoid(a).composable(t1[a], t2[a]) for a in nodes):
                compose[(n1, n2)] = lookup({a: sys.groupoid(a).compose(t1[a], t2[a]) for a in nodes})
    units = [n for n in arrows if all(sys.groupoid(a).is_unit(threads[n][a]) for a in nodes)]
    G = validate_groupoid(
        dict(arrows=arrows, units=units, source=source, target=target, compose=compose, inverse=inverse)
    )
    projections = {a: validate_morphism({n: threads[n][a] for n in arrows}, G, sys.groupoid(a)) for a in nodes}
    ctx_t = sys.contexts[tau]
    w = validate_haar(G, {n: ctx_t.haar[n] for n in arrows})
    sig_t = ctx_t.cocycle
    if sig_t.angles is not None:
        sigma = cocycle_from_angles(G, {p: sig_t.angles[p] for p in G.composable_pairs})
    else:
        sigma = validate_cocycle(G, {p: sig_t(*p) for p in G.composable_pairs})
    checks = {}
    for a in nodes:
        q = projections[a]
        ctx = sys.contexts[a]
        hp = is_haar_preserving(q, w, ctx.haar)
        cp = is_cocycle_preserving(q, sigma, ctx.cocycle)
        if not (q.surjective and hp and cp):
            raise AssertionError(f"projection to {a!r} fails: haar={hp}, cocycle={cp}")
        checks[a] = (hp, cp)
    return InverseLimit(G, projections, w, sigma, threads, tau, checks)


# ---------------------------------------------------------------------------
# dual direct system of convolution algebras
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PairResiduals:
    homomorphism: float
    adjoint: float
    norm: float


@dataclass(frozen=True)
class DirectSystemReport:
    pairs: Mapping  # (alpha, beta) -> PairResiduals
    triangles: Mapping  # (alpha, beta, gamma) or ("limit", alpha, beta) -> residual
    random_trials: int = 0
    random_norm_failures: int = 0

    @property
    def exact(self) -> bool:
        return (
            all(r.homomorphism == 0 and r.adjoint == 0 and r.norm == 0 for r in self.pairs.values())
            and all(v == 0 for v in self.triangles.values())
            and self.random_norm_failures == 0
        )

    def worst(self) -> float:
        vals = [max(r.homomorphism, r.adjoint, r.norm) for r in self.pairs.values()]
        vals += list(self.triangles.values())
        return max(vals, default=0.0)


def _sup(x: ConvElement, y: ConvElement):
    return max((abs(a - b) for a, b in zip(x.coefficients, y.coefficients)), default=0)


def algebra_direct_system(sys: InverseSystem, trials: int = 0, seed: int | None = None) -> DirectSystemReport:
    """Check that every (q^a_b)^* is an I-norm preserving *-morphism and that pullbacks commute.

    Checks run on the full delta basis (exact for rational weights and
    quarter-turn cocycles); ``trials`` random elements additionally test
    norm preservation at 1e-9 relative tolerance.
    """
    validate_inverse_system(sys)
    pairs = {}
    for a, b in sys.comparable_pairs():
        q = sys.bonds[(a, b)]
        ca, cb = sys.contexts[a], sys.contexts[b]
        Gb = cb.groupoid
        basis = {g: delta(cb, g) for g in Gb.arrows}
        pb = {g: pullback(q, e, ca) for g, e in basis.items()}
        hom = adj = nrm = 0
        for i in Gb.arrows:
            for j in Gb.arrows:
                lhs = pullback(q, convolve(basis[i], basis[j]), ca, check=False)
                hom = max(hom, _sup(lhs, convolve(pb[i], pb[j])))
            adj = max(adj, _sup(pullback(q, adjoint(basis[i]), ca, check=False), adjoint(pb[i])))
            nrm = max(nrm, abs(i_norm(pb[i]) - i_norm(basis[i])))
        pairs[(a, b)] = PairResiduals(hom, adj, nrm)

    triangles = {}
    for a, b, c in itertools.product(sys.nodes, repeat=3):
        if len({a, b, c}) == 3 and sys.geq(a, b) and sys.geq(b, c):
            cc = sys.contexts[c]
            res = 0
            for g in cc.groupoid.arrows:
                e = delta(cc, g)
                direct = pullback(sys.bonds[(a, c)], e, sys.contexts[a], check=False)
                staged = pullback(
                    sys.bonds[(a, b)],
                    pullback(sys.bonds[(b, c)], e, sys.contexts[b], check=False),
                    sys.contexts[a],
                    check=False,
                )
                res = max(res, _sup(direct, staged))
            triangles[(a, b, c)] = res

    lim = inverse_limit(sys)
    lim_ctx = AlgebraContext(lim.groupoid, lim.haar, lim.cocycle)
    for a, b in sys.comparable_pairs():
        cb = sys.contexts[b]
        res = 0
        for g in cb.groupoid.arrows:
            e = delta(cb, g)
            direct = pullback(lim.projections[b], e, lim_ctx)
            staged = pullback(lim.projections[a], pullback(sys.bonds[(a, b)], e, sys.contexts[a]), lim_ctx)
            res = max(res, _sup(direct, staged))
        triangles[("limit", a, b)] = res

    failures = 0
    if trials:
        rng = np.random.default_rng(default_seed() if seed is None else seed)
        for _ in range(trials):
            for a, b in sys.comparable_pairs():
                f = random_element(sys.contexts[b], rng)
                n0 = i_norm(f)
                n1 = i_norm(pullback(sys.bonds[(a, b)], f, sys.contexts[a], check=False))
                if abs(n1 - n0) > 1e-9 * (1 + n0):
                    failures += 1
    return DirectSystemReport(pairs, triangles, trials, failures)


# ---------------------------------------------------------------------------
# lattice of all valid congruences
# ---------------------------------------------------------------------------

def set_partitions(items: Sequence) -> Iterator[list]:
    items = list(items)
    if not items:
        yield []
        return
    first, rest = items[0], items[1:]
    for part in set_partitions(rest):
        yield [[first]] + part
        for i in range(len(part)):
            yield part[:i] + [[first] + part[i]] + part[i + 1:]


def candidate_partitions(G: FiniteGroupoid) -> Iterator[list]:
    """Arrow partitions that can satisfy C3 and C5: unit classes first, then
    non-units only join blocks whose members share their source and target classes."""
    nonunits = [g for g in G.arrows if not G.is_unit(g)]
    for unit_blocks in set_partitions(list(G.units)):
        cls = {x: i for i, b in enumerate(unit_blocks) for x in b}
        start = [(list(b), (i, i)) for i, b in enumerate(unit_blocks)]

        def assign(k: int, blocks: list):
            if k == len(nonunits):
                yield [list(b) for b, _ in blocks]
                return
            g = nonunits[k]
            key = (cls[G.s(g)], cls[G.t(g)])
            for i, (members, bkey) in enumerate(blocks):
                if bkey == key:
                    members.append(g)
                    yield from assign(k + 1, blocks)
                    members.pop()
            blocks.append(([g], key))
            yield from assign(k + 1, blocks)
            blocks.pop()

        yield from assign(0, start)


@dataclass(frozen=True)
class CongruenceLattice:
    congruences: tuple
    quotients: Mapping  # node name -> Quotient
    system: InverseSystem
    limit: InverseLimit
    top: object
    identity_is_maximum: bool
    limit_isomorphic: bool

    def node_of(self, P: Congruence):
        for name, q in self.quotients.items():
            if q.congruence == P:
                return name
        return None


def valid_congruences(G: FiniteGroupoid, w: HaarSystem | None = None, sigma: Cocycle | None = None) -> list:
    out = []
    for blocks in candidate_partitions(G):
        P = congruence(G, blocks)
        if is_congruence(G, P, w, sigma):
            out.append(P)
    return out


def congruence_lattice(
    G: FiniteGroupoid,
    w: HaarSystem | None = None,
    sigma: Cocycle | None = None,
    guard: int = 10,
) -> CongruenceLattice:
    """All valid congruences, ordered by refinement, as an inverse system of quotients."""
    if len(G.arrows) > guard:
        raise GuardExceeded(f"{len(G.arrows)} arrows exceeds guard {guard}")
    w = w if w is not None else counting_haar(G)
    sigma = sigma if sigma is not None else trivial_cocycle(G)
    congs = valid_congruences(G, w, sigma)
    # finest first, so the identity congruence is node P0
    congs.sort(key=lambda P: (-len(P.arrow_partition), [sorted(G.index[g] for g in b) for b in P.arrow_partition]))
    names = [f"P{i}" for i in range(len(congs))]
    quotients = {n: build_quotient(G, P, w, sigma) for n, P in zip(names, congs)}
    contexts = {n: AlgebraContext(q.groupoid, q.haar, q.cocycle) for n, q in quotients.items()}
    order, bonds = [], {}
    for (na, Pa), (nb, Pb) in itertools.product(zip(names, congs), repeat=2):
        if na != nb and Pa.refines(Pb):
            order.append((na, nb))
            qa, qb = quotients[na], quotients[nb]
            amap = {qa.map(g): qb.map(g) for g in G.arrows}
            bonds[(na, nb)] = validate_morphism(amap, qa.groupoid, qb.groupoid)
    system = validate_inverse_system(inverse_system(contexts, order, bonds))
    lim = inverse_limit(system)
    top = lim.top
    identity_max = len(quotients[top].congruence.arrow_partition) == len(G.arrows)
    top_q = quotients[top]
    # G -> limit: g goes to the thread through its class at the top node
    to_limit = {g: top_q.map(g) for g in G.arrows}
    try:
        iso_map = validate_morphism(to_limit, G, lim.groupoid)
        iso = is_isomorphism(iso_map) and all(lim.haar[to_limit[g]] == w[g] for g in G.arrows)
    except ValidationFailure:
        iso = False
    return CongruenceLattice(tuple(congs), quotients, system, lim, top, identity_max, iso)
