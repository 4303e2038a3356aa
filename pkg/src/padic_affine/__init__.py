"""Exact arithmetic for the infinite-dimensional p-adic affine group, its
action on step functions and Poisson configurations, pushforward measures,
Radon-Nikodym densities, and an audit suite for the claimed identities."""

from .affine import (
    AffineElement,
    SectionPair,
    act_configuration,
    act_function,
    act_pair,
    act_point,
    composition_defect,
    identity,
    inverse,
    multiply,
    pair_product,
    preimage_clopen,
    section,
)
from .errors import (
    ContextMismatch,
    ContractViolation,
    KindMismatch,
    OverlappingParts,
    PadicAffineError,
    ParseError,
    UnboundedIntegral,
    UnsupportedShape,
    WindowMismatch,
)
from .measure import (
    IntensityMeasure,
    ball_measure,
    image_ball,
    l1_deviation,
    pushforward,
    roundtrip_defect,
)
from .padic import (
    Ball,
    ClopenSet,
    Padic,
    PadicContext,
    abs_p,
    ball_relation,
    clopen_combine,
    digits,
    sample_uniform,
    split_ball,
    valuation,
)
from .poisson import (
    Configuration,
    CountEvent,
    CylinderFunction,
    Exponential,
    Polynomial,
    expect_exact,
    expect_mc,
    pair_sum,
    required_depth,
    sample_config,
    transform_Vg,
)
from .representation import (
    CheckReport,
    check_ergodic_inequality,
    check_factorization,
    check_invariance,
    check_isometry,
    check_isometry_mc,
    check_laplace,
    check_laplace_mc,
    check_dual_pairing,
    check_rn_identity,
    check_rn_identity_mc,
    decoupler_postconditions,
    find_decoupler,
    rn_density,
    rn_factors,
)
from .stepfn import PADIC, REAL, StepFunction, common_refinement, make_step

__version__ = "0.1.0"
