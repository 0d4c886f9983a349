from .props import (
    HOLDS,
    PROPERTY_TAGS,
    VIOLATED,
    CartesianPair,
    PropertyReport,
    RangeBoundary,
    cartesian_parts,
    check_accretive_square,
    check_accretivity,
    check_cohyponormal,
    check_hyponormal,
    check_semiangle,
    commutator,
    evaluate_at,
    lower_bound_m,
    numerical_range_boundary,
)
from .criterion import (
    CriterionConfig,
    CriterionWitness,
    brute_force_criterion_min,
    check_logconvex_criterion,
    criterion_forms,
    criterion_gradient,
    criterion_polynomial,
    criterion_value,
    criterion_value_cartesian,
    strict_convexity_value,
)
