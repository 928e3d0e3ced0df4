"""The twisted convolution *-algebra C_c(G, sigma) of a finite groupoid.

    (f * g)(z) = sum_{y : t(y) = s(z)} f(zy) g(y^-1) sigma(zy, y^-1) w(y)
    f^*(z)     = conj(f(z^-1) sigma(z, z^-1))
    ||f||_I    = max( sup_x sum_{t(g)=x} |f(g)| w(g),  sup_x sum_{t(g)=x} |f(g^-1)| w(g) )
"""
from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from numbers import Rational
from typing import Mapping

import numpy as np

from .errors import GroupoidError, HypothesisViolated
from .groupoid import FiniteGroupoid, GroupoidMorphism, pair_groupoid, structural_predicates
from .haar import Cocycle, HaarSystem, counting_haar, is_cocycle_preserving, is_haar_preserving, trivial_cocycle

TOL = 1e-9


@dataclass(frozen=True, eq=False)
class AlgebraContext:
    """A groupoid together with the Haar system and cocycle its algebra depends on."""

    groupoid: FiniteGroupoid
    haar: HaarSystem
    cocycle: Cocycle

    def __post_init__(self):
        if self.haar.groupoid != self.groupoid or self.cocycle.groupoid != self.groupoid:
            raise GroupoidError("Haar system and cocycle must live on the context groupoid")

    @classmethod
    def default(cls, G: FiniteGroupoid) -> "AlgebraContext":
        return cls(G, counting_haar(G), trivial_cocycle(G))

    @cached_property
    def _sigma(self):
        # trivial values are skipped so rational inputs stay exact
        return {p: v for p, v in self.cocycle.values.items() if v != 1}

    def sigma(self, g, h):
        return self._sigma.get((g, h), 1)

    def __eq__(self, other):
        if not isinstance(other, AlgebraContext):
            return NotImplemented
        return self is other or (
            self.groupoid == other.groupoid and self.haar == other.haar and self.cocycle == other.cocycle
        )

    def __hash__(self):
        return hash(self.groupoid)


@dataclass(frozen=True, eq=False)
class ConvElement:
    """A function on the arrows of ``ctx.groupoid``; coefficients follow arrow order."""

    ctx: AlgebraContext
    coefficients: tuple

    def __getitem__(self, g):
        return self.coefficients[self.ctx.groupoid.index[g]]

    def items(self):
        return zip(self.ctx.groupoid.arrows, self.coefficients)

    def as_dict(self) -> dict:
        return dict(self.items())

    def _check(self, other: "ConvElement"):
        if not isinstance(other, ConvElement) or other.ctx != self.ctx:
            raise GroupoidError("elements belong to different algebras")

    def __add__(self, other):
        self._check(other)
        return ConvElement(self.ctx, tuple(a + b for a, b in zip(self.coefficients, other.coefficients)))

    def __sub__(self, other):
        self._check(other)
        return ConvElement(self.ctx, tuple(a - b for a, b in zip(self.coefficients, other.coefficients)))

    def __neg__(self):
        return ConvElement(self.ctx, tuple(-a for a in self.coefficients))

    def __mul__(self, scalar):
        return ConvElement(self.ctx, tuple(scalar * a for a in self.coefficients))

    __rmul__ = __mul__

    def __eq__(self, other):
        if not isinstance(other, ConvElement):
            return NotImplemented
        return self.ctx == other.ctx and self.coefficients == other.coefficients

    def __hash__(self):
        return hash(self.coefficients)

    def sup_norm(self) -> float:
        return max((abs(a) for a in self.coefficients), default=0.0)

    def close(self, other: "ConvElement", tol: float = TOL) -> bool:
        return (self - other).sup_norm() <= tol

    def __repr__(self):
        nz = {g: a for g, a in self.items() if a != 0}
        return f"ConvElement({nz})"


def element(ctx: AlgebraContext, values: Mapping) -> ConvElement:
    G = ctx.groupoid
    unknown = set(values) - set(G.arrows)
    if unknown:
        raise GroupoidError(f"undeclared arrows {sorted(unknown)}")
    return ConvElement(ctx, tuple(values.get(g, 0) for g in G.arrows))


def delta(ctx: AlgebraContext, g) -> ConvElement:
    return element(ctx, {g: 1})


def zero(ctx: AlgebraContext) -> ConvElement:
    return element(ctx, {})


def unit_element(ctx: AlgebraContext) -> ConvElement:
    """Sum over units x of delta_x / (w(x) sigma(x, x))."""
    G = ctx.groupoid
    return element(ctx, {x: 1 / (ctx.haar[x] * ctx.sigma(x, x)) for x in G.units})


def convolve(f: ConvElement, g: ConvElement) -> ConvElement:
    f._check(g)
    ctx = f.ctx
    G, w = ctx.groupoid, ctx.haar
    fiber_at = _fibers(G)
    out = []
    for z in G.arrows:
        acc = 0
        for y in fiber_at[G.s(z)]:
            zy = G.compose(z, y)
            a, b = f[zy], g[G.inv(y)]
            if a == 0 or b == 0:
                continue
            acc += a * b * ctx.sigma(zy, G.inv(y)) * w[y]
        out.append(acc)
    return ConvElement(ctx, tuple(out))


def _fibers(G: FiniteGroupoid) -> dict:
    fib: dict = {x: [] for x in G.units}
    for g in G.arrows:
        fib[G.t(g)].append(g)
    return fib


def adjoint(f: ConvElement) -> ConvElement:
    ctx = f.ctx
    G = ctx.groupoid
    return ConvElement(ctx, tuple(_conj(f[G.inv(z)] * ctx.sigma(z, G.inv(z))) for z in G.arrows))


def _conj(v):
    return v.conjugate() if isinstance(v, complex) else v


def _is_rational(v) -> bool:
    return isinstance(v, Rational)


def i_norm(f: ConvElement):
    """I-norm; an exact Fraction when every coefficient is rational."""
    ctx = f.ctx
    G, w = ctx.groupoid, ctx.haar
    exact = all(_is_rational(a) for a in f.coefficients)
    fib = _fibers(G)
    best = Fraction(0) if exact else 0.0
    for x in G.units:
        direct = sum((abs(f[g]) * w[g] for g in fib[x]), Fraction(0) if exact else 0.0)
        flipped = sum((abs(f[G.inv(g)]) * w[g] for g in fib[x]), Fraction(0) if exact else 0.0)
        best = max(best, direct, flipped)
    return best if exact else float(best)


def pullback(q: GroupoidMorphism, f: ConvElement, domain_ctx: AlgebraContext, *, check: bool = True) -> ConvElement:
    """(q^* f)(g) = f(q(g)), after checking q preserves Haar system and cocycle."""
    if q.codomain != f.ctx.groupoid or q.domain != domain_ctx.groupoid:
        raise GroupoidError("morphism does not match the algebras")
    if check:
        hp = is_haar_preserving(q, domain_ctx.haar, f.ctx.haar)
        if not hp:
            raise HypothesisViolated(f"morphism is not Haar system preserving: {hp.witness!r} {hp.detail}")
        cp = is_cocycle_preserving(q, domain_ctx.cocycle, f.ctx.cocycle)
        if not cp:
            raise HypothesisViolated(f"morphism is not cocycle preserving at {cp.witness!r}")
    return ConvElement(domain_ctx, tuple(f[q(g)] for g in domain_ctx.groupoid.arrows))


@dataclass(frozen=True)
class StructureConstants:
    """delta_i * delta_j = c * delta_k, stored sparsely as (i, j) -> (k, c)."""

    ctx: AlgebraContext
    table: Mapping

    def product(self, i, j) -> ConvElement:
        if (i, j) not in self.table:
            return zero(self.ctx)
        k, c = self.table[(i, j)]
        return element(self.ctx, {k: c})

    def coefficient(self, i, j, k):
        entry = self.table.get((i, j))
        return entry[1] if entry is not None and entry[0] == k else 0


def structure_constants(ctx: AlgebraContext) -> StructureConstants:
    G, w = ctx.groupoid, ctx.haar
    table = {
        (i, j): (G.compose(i, j), w[G.t(j)] * ctx.sigma(i, j)) for i, j in G.composable_pairs
    }
    return StructureConstants(ctx, table)


# ---------------------------------------------------------------------------
# matrix picture for pair groupoids
# ---------------------------------------------------------------------------

def _pair_indices(G: FiniteGroupoid) -> dict:
    """g -> (i, j) with s(g) = x_i, t(g) = x_j, for a transitive principal groupoid."""
    rep = structural_predicates(G)
    if not (rep.transitive and rep.principal):
        raise GroupoidError("matrix picture needs a transitive principal groupoid")
    pos = {x: i for i, x in enumerate(G.units)}
    return {g: (pos[G.s(g)], pos[G.t(g)]) for g in G.arrows}


def _matrix_scales(ctx: AlgebraContext, idx: dict) -> dict:
    if not ctx.cocycle.is_trivial:
        raise GroupoidError("matrix picture requires the trivial cocycle")
    c = [float(ctx.haar[x]) for x in ctx.groupoid.units]
    return {g: math.sqrt(c[i] * c[j]) for g, (i, j) in idx.items()}


def matrix_representation(f: ConvElement) -> np.ndarray:
    """Phi(delta_g) = sqrt(c_i c_j) e_{ji} for g from x_i to x_j."""
    ctx = f.ctx
    idx = _pair_indices(ctx.groupoid)
    alpha = _matrix_scales(ctx, idx)
    n = len(ctx.groupoid.units)
    M = np.zeros((n, n), dtype=complex)
    for g, (i, j) in idx.items():
        M[j, i] += complex(f[g]) * alpha[g]
    return M


def matrix_to_element(ctx: AlgebraContext, M: np.ndarray) -> ConvElement:
    idx = _pair_indices(ctx.groupoid)
    alpha = _matrix_scales(ctx, idx)
    return element(ctx, {g: complex(M[j, i]) / alpha[g] for g, (i, j) in idx.items()})


def pair_matrix_iso(n: int, c, f: ConvElement) -> np.ndarray:
    """Matrix of f in C_c(G_n) for the Haar system w(g) = c(s(g)) and trivial cocycle."""
    ctx = f.ctx
    G = pair_groupoid(n)
    if ctx.groupoid != G:
        raise GroupoidError(f"element does not live on pair_groupoid({n})")
    c = list(c)
    for g in G.arrows:
        if ctx.haar[g] != Fraction(c[G.units.index(G.s(g))]):
            raise GroupoidError("Haar weights differ from the given object weights")
    return matrix_representation(f)


# ---------------------------------------------------------------------------
# randomized *-algebra law harness
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class StarAlgebraReport:
    trials: int
    associativity: float
    anti_multiplicativity: float
    involution: float
    adjoint_norm: float
    submultiplicativity: float  # worst relative excess of ||f*g|| over ||f|| ||g||
    tol: float = TOL

    @property
    def passed(self) -> bool:
        return max(
            self.associativity, self.anti_multiplicativity, self.involution,
            self.adjoint_norm, self.submultiplicativity,
        ) <= self.tol

    def lines(self) -> list:
        return [
            f"trials: {self.trials}",
            f"associativity residual: {self.associativity:.3e}",
            f"(f*g)^* = g^* f^* residual: {self.anti_multiplicativity:.3e}",
            f"f^** = f residual: {self.involution:.3e}",
            f"||f^*||_I = ||f||_I residual: {self.adjoint_norm:.3e}",
            f"||f*g||_I <= ||f||_I ||g||_I excess: {self.submultiplicativity:.3e}",
        ]


def random_element(ctx: AlgebraContext, rng: np.random.Generator) -> ConvElement:
    n = len(ctx.groupoid.arrows)
    vals = rng.normal(size=n) + 1j * rng.normal(size=n)
    return ConvElement(ctx, tuple(complex(v) for v in vals))


def _rel(x: ConvElement, y: ConvElement) -> float:
    return (x - y).sup_norm() / (1.0 + max(x.sup_norm(), y.sup_norm()))


def _run_trials(ctx: AlgebraContext, count: int, seed_seq: np.random.SeedSequence) -> tuple:
    rng = np.random.default_rng(seed_seq)
    worst = [0.0] * 5
    for _ in range(count):
        f, g, h = (random_element(ctx, rng) for _ in range(3))
        fg = convolve(f, g)
        worst[0] = max(worst[0], _rel(convolve(fg, h), convolve(f, convolve(g, h))))
        worst[1] = max(worst[1], _rel(adjoint(fg), convolve(adjoint(g), adjoint(f))))
        worst[2] = max(worst[2], _rel(adjoint(adjoint(f)), f))
        nf, ng = i_norm(f), i_norm(g)
        worst[3] = max(worst[3], abs(i_norm(adjoint(f)) - nf) / (1.0 + nf))
        worst[4] = max(worst[4], max(0.0, i_norm(fg) - nf * ng) / (1.0 + nf * ng))
    return tuple(worst)


def default_seed() -> int:
    return int(os.environ.get("GPD_SEED", "0"))


def check_star_algebra(ctx: AlgebraContext, trials: int = 200, seed: int | None = None, workers: int = 4) -> StarAlgebraReport:
    """Random-trial check of the *-algebra laws and I-norm identities.

    Trials are split into ``workers`` chunks, each with its own spawned seed, so
    results depend only on ``seed`` (``GPD_SEED`` when None).
    """
    seed = default_seed() if seed is None else seed
    workers = max(1, min(workers, trials))
    children = np.random.SeedSequence(seed).spawn(workers)
    sizes = [trials // workers + (1 if k < trials % workers else 0) for k in range(workers)]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        parts = list(pool.map(lambda a: _run_trials(ctx, *a), zip(sizes, children)))
    worst = [max(p[k] for p in parts) for k in range(5)]
    return StarAlgebraReport(trials, *worst)
