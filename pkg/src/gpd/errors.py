"""Exception hierarchy shared by all modules."""
from __future__ import annotations


class GroupoidError(Exception):
    """Base class for every error raised by gpd."""


class ValidationFailure(GroupoidError):
    """A structural axiom failed; ``witness`` is a concrete offending tuple."""

    def __init__(self, axiom: str, witness: tuple = (), detail: str = ""):
        self.axiom = axiom
        self.witness = tuple(witness)
        self.detail = detail
        msg = f"{axiom} violated at {self.witness!r}"
        if detail:
            msg += f": {detail}"
        super().__init__(msg)


class MorphismFailure(ValidationFailure):
    pass


class HaarError(GroupoidError):
    pass


class NonPositiveWeight(HaarError):
    def __init__(self, arrow, weight):
        self.arrow = arrow
        self.weight = weight
        super().__init__(f"weight of {arrow!r} is {weight}, must be > 0")


class InvarianceViolation(HaarError):
    def __init__(self, g, h, detail: str = ""):
        self.g, self.h = g, h
        self.witness = (g, h)
        super().__init__(f"left invariance fails for composable pair ({g!r}, {h!r}) {detail}".rstrip())


class FiberInconsistency(HaarError):
    """Fiber sums of a pushforward disagree (or miss their target)."""

    def __init__(self, witness: tuple, detail: str = ""):
        self.witness = tuple(witness)
        super().__init__(f"fiber sums inconsistent at {self.witness!r} {detail}".rstrip())


class NotSurjective(GroupoidError):
    def __init__(self, missing):
        self.missing = missing
        super().__init__(f"morphism misses arrow {missing!r}")


class CocycleError(GroupoidError):
    pass


class NonUnitModulus(CocycleError):
    def __init__(self, pair, value):
        self.pair = tuple(pair)
        self.value = value
        super().__init__(f"|sigma{self.pair!r}| = {abs(value)!r} is not 1")


class CocycleViolation(CocycleError):
    def __init__(self, g, h, k, residual: float):
        self.witness = (g, h, k)
        self.residual = residual
        super().__init__(f"cocycle identity fails on ({g!r}, {h!r}, {k!r}), residual {residual:.3g}")


class CoverError(GroupoidError):
    pass


class ChainBreak(CoverError):
    def __init__(self, n: int, witness=None):
        self.n = n
        self.witness = witness
        super().__init__(f"cover {n + 1} does not star-refine cover {n} (witness {witness!r})")


class TailNotPartition(CoverError):
    def __init__(self, witness=None):
        self.witness = witness
        super().__init__(f"last cover is not a partition (overlap {witness!r})")


class CongruenceRejected(GroupoidError):
    def __init__(self, report):
        self.report = report
        failed = ", ".join(report.failed())
        super().__init__(f"congruence rejected: {failed} failed")


class HypothesisViolated(GroupoidError):
    pass


class GuardExceeded(GroupoidError):
    pass


class BundleError(GroupoidError):
    """Malformed or inconsistent bundle file."""
