"""Finite groupoids with Haar systems and cocycles, their convolution algebras, quotients and inverse limits."""
from .errors import *  # noqa: F401,F403
from .groupoid import (
    FiniteGroupoid,
    GroupoidMorphism,
    StructureReport,
    abelian_group_table,
    group_as_groupoid,
    is_isomorphism,
    pair_groupoid,
    product_groupoid,
    product_with_space,
    space_groupoid,
    structural_predicates,
    validate_groupoid,
    validate_morphism,
)
from .haar import (
    Cocycle,
    HaarSystem,
    coboundary,
    cocycle_from_angles,
    counting_haar,
    haar_from_unit_weights,
    is_cocycle_preserving,
    is_haar_preserving,
    pushforward_haar,
    trivial_cocycle,
    validate_cocycle,
    validate_haar,
)
from .covers import Cover, NormalSequence, chain_pseudometric, validate_normal_sequence, verify_sandwich
from .quotient import Congruence, build_quotient, check_congruence, congruence
from .convolution import (
    AlgebraContext,
    ConvElement,
    adjoint,
    check_star_algebra,
    convolve,
    delta,
    i_norm,
    pair_matrix_iso,
    pullback,
    structure_constants,
)
from .limits import InverseSystem, algebra_direct_system, congruence_lattice, inverse_limit, inverse_system, validate_inverse_system
