"""Finite covers, stars, star refinement, and the pseudo-metric of a normal sequence."""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from typing import Callable, Iterable, Sequence

from .errors import ChainBreak, CoverError, TailNotPartition
from .haar import Check


@dataclass(frozen=True)
class Cover:
    ground: tuple
    members: tuple

    def __post_init__(self):
        ground = tuple(dict.fromkeys(self.ground))
        members = tuple(dict.fromkeys(frozenset(m) for m in self.members))
        gset = set(ground)
        for m in members:
            if not m:
                raise CoverError("cover members must be nonempty")
            if not m <= gset:
                raise CoverError(f"member {sorted(m)} leaves the ground set")
        covered = set().union(*members) if members else set()
        if covered != gset:
            raise CoverError(f"points {sorted(gset - covered)} are not covered")
        object.__setattr__(self, "ground", ground)
        object.__setattr__(self, "members", members)

    @classmethod
    def of(cls, members: Iterable[Iterable], ground: Iterable | None = None) -> "Cover":
        members = [list(m) for m in members]
        if ground is None:
            ground = [x for m in members for x in m]
        return cls(tuple(ground), tuple(members))

    @cached_property
    def ground_set(self) -> frozenset:
        return frozenset(self.ground)

    @property
    def is_partition(self) -> bool:
        return sum(len(m) for m in self.members) == len(self.ground)

    def overlap(self):
        seen: dict = {}
        for m in self.members:
            for x in m:
                if x in seen:
                    return x, seen[x], m
                seen[x] = m
        return None

    def __iter__(self):
        return iter(self.members)

    def __len__(self):
        return len(self.members)


def partition_cover(blocks: Iterable[Iterable], ground: Iterable | None = None) -> Cover:
    cover = Cover.of(blocks, ground)
    if not cover.is_partition:
        raise CoverError("blocks overlap")
    return cover


def discrete_cover(ground: Iterable) -> Cover:
    ground = tuple(ground)
    return Cover(ground, tuple(frozenset([x]) for x in ground))


def star(A: Iterable, U: Cover) -> frozenset:
    """st(A, U): union of the members of U that meet A."""
    A = frozenset(A)
    if not A <= U.ground_set:
        raise CoverError(f"{sorted(A - U.ground_set)} outside the ground set")
    return frozenset().union(*(m for m in U.members if m & A))


def star_cover(U: Cover, V: Cover) -> Cover:
    """st(U, V) = {st(M, V) : M in U}."""
    _same_ground(U, V)
    return Cover(U.ground, tuple(star(m, V) for m in U.members))


def _same_ground(U: Cover, V: Cover):
    if U.ground_set != V.ground_set:
        raise CoverError("covers live on different ground sets")


def refinement_witness(members: Iterable[frozenset], V: Cover):
    for m in members:
        if not any(m <= v for v in V.members):
            return m
    return None


def refines(U: Cover, V: Cover) -> bool:
    _same_ground(U, V)
    return refinement_witness(U.members, V) is None


def star_refines(U: Cover, V: Cover) -> bool:
    _same_ground(U, V)
    return refinement_witness((star(m, U) for m in U.members), V) is None


def restricted(U: Cover, A: Iterable) -> tuple:
    """Members of U that meet A (kept whole)."""
    A = frozenset(A)
    return tuple(m for m in U.members if m & A)


def trace(U: Cover, A: Iterable) -> Cover:
    """U intersected with A, as a cover of A."""
    A = [x for x in U.ground if x in set(A)]
    return Cover(tuple(A), tuple(m & frozenset(A) for m in U.members if m & frozenset(A)))


def image_cover(U: Cover, f: Callable, codomain: Sequence) -> Cover:
    """{f(M) : M in U} as a cover of ``codomain`` (f must be onto)."""
    return Cover(tuple(codomain), tuple(frozenset(f(x) for x in m) for m in U.members))


def union_cover(U: Cover, V: Cover) -> Cover:
    _same_ground(U, V)
    return Cover(U.ground, U.members + V.members)


@dataclass(frozen=True)
class IntersectionRefinement:
    cover: Cover
    classes: tuple
    point_sets: dict  # x -> U_x


def intersection_refinement(U: Cover) -> IntersectionRefinement:
    """U' = {U_x}, U_x the intersection of the members containing x; x ~ y iff U_x = U_y."""
    point_sets = {}
    for x in U.ground:
        containing = [m for m in U.members if x in m]
        point_sets[x] = frozenset.intersection(*containing)
    by_set: dict = {}
    for x in U.ground:
        by_set.setdefault(point_sets[x], []).append(x)
    classes = tuple(frozenset(c) for c in by_set.values())
    cover = Cover(U.ground, tuple(point_sets[x] for x in U.ground))
    return IntersectionRefinement(cover, classes, point_sets)


def is_intersection_separating(V: Cover, U: Cover) -> Check:
    """V refines U' and no member of V meets two distinct classes of U."""
    _same_ground(U, V)
    ir = intersection_refinement(U)
    bad = refinement_witness(V.members, ir.cover)
    if bad is not None:
        return Check(False, bad, "member does not refine the intersection refinement")
    for m in V.members:
        hit = [c for c in ir.classes if c & m]
        if len(hit) > 1:
            return Check(False, (m, hit[0], hit[1]), "member meets two classes")
    return Check(True)


# ---------------------------------------------------------------------------
# normal sequences and the induced pseudo-metric
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class NormalSequence:
    """U_0, ..., U_N with U_{k+1} star-refining U_k; U_N is a partition repeated forever."""

    covers: tuple

    @property
    def ground(self) -> tuple:
        return self.covers[0].ground

    def level(self, k: int) -> Cover:
        return self.covers[min(k, len(self.covers) - 1)]

    def __len__(self):
        return len(self.covers)


def validate_normal_sequence(covers: Sequence[Cover]) -> NormalSequence:
    covers = tuple(covers)
    if not covers:
        raise CoverError("a normal sequence needs at least one cover")
    for c in covers[1:]:
        _same_ground(covers[0], c)
    for n in range(len(covers) - 1):
        bad = refinement_witness((star(m, covers[n + 1]) for m in covers[n + 1].members), covers[n])
        if bad is not None:
            raise ChainBreak(n, bad)
    if not covers[-1].is_partition:
        raise TailNotPartition(covers[-1].overlap())
    return NormalSequence(covers)


@dataclass(frozen=True)
class PseudoMetric:
    ground: tuple
    dist: tuple  # square tuple-of-tuples of Fractions

    @cached_property
    def index(self) -> dict:
        return {x: i for i, x in enumerate(self.ground)}

    def d(self, x, y) -> Fraction:
        return self.dist[self.index[x]][self.index[y]]

    def ball(self, x, r) -> frozenset:
        """Open ball B(x, r)."""
        row = self.dist[self.index[x]]
        return frozenset(y for y, v in zip(self.ground, row) if v < r)


INF = None  # n(x, y) when x and y stay together at every level


def co_level(seq: NormalSequence, x, y):
    """n(x, y): the deepest level co-containing x and y; INF if the tail does."""
    if any(x in m and y in m for m in seq.covers[-1].members):
        return INF
    best = -1
    for k, cover in enumerate(seq.covers):
        if any(x in m and y in m for m in cover.members):
            best = k
    return best


def rho(seq: NormalSequence, x, y) -> Fraction:
    """2^{-n(x,y)}; 0 when n is infinite, 1 when x, y share no member of U_0."""
    n = co_level(seq, x, y)
    if n is INF:
        return Fraction(0)
    if n < 0:
        return Fraction(1)
    return Fraction(1, 2**n)


def rho_matrix(seq: NormalSequence) -> list:
    pts = seq.ground
    return [[rho(seq, x, y) for y in pts] for x in pts]


def chain_pseudometric(seq: NormalSequence) -> PseudoMetric:
    """Infimum of rho over chains, computed exactly by Floyd-Warshall."""
    d = rho_matrix(seq)
    n = len(d)
    for k in range(n):
        dk = d[k]
        for i in range(n):
            dik = d[i][k]
            row = d[i]
            for j in range(n):
                via = dik + dk[j]
                if via < row[j]:
                    row[j] = via
    return PseudoMetric(seq.ground, tuple(tuple(r) for r in d))


@dataclass(frozen=True)
class MetricQuotient:
    classes: tuple
    dist: tuple  # between classes, in the order of ``classes``


def metric_quotient(pm: PseudoMetric) -> MetricQuotient:
    """Identify points at distance 0; the induced distance does not depend on representatives."""
    classes: list = []
    for x in pm.ground:
        for c in classes:
            if pm.d(x, c[0]) == 0:
                c.append(x)
                break
        else:
            classes.append([x])
    k = len(classes)
    dist = [[None] * k for _ in range(k)]
    for a in range(k):
        for b in range(k):
            values = {pm.d(x, y) for x in classes[a] for y in classes[b]}
            if len(values) != 1:
                raise CoverError("distance is not constant on classes (not a pseudo-metric?)")
            dist[a][b] = values.pop()
    return MetricQuotient(tuple(frozenset(c) for c in classes), tuple(tuple(r) for r in dist))


def verify_sandwich(seq: NormalSequence, x, n: int, pm: PseudoMetric | None = None) -> bool:
    """st(x, U_{n+1}) within B(x, 2^-n) within st(x, U_n)."""
    if not 0 <= n < len(seq):
        raise IndexError(f"level {n} outside 0..{len(seq) - 1}")
    if pm is None:
        pm = chain_pseudometric(seq)
    ball = pm.ball(x, Fraction(1, 2**n))
    inner = star({x}, seq.level(n + 1))
    outer = star({x}, seq.level(n))
    return inner <= ball <= outer


def verify_sequence_unchecked(covers: Sequence[Cover], x, n: int) -> bool:
    """Sandwich test on an arbitrary list of covers, skipping normal-sequence validation."""
    return verify_sandwich(NormalSequence(tuple(covers)), x, n)
