from .semigroup import (
    GridSpec,
    HeightSeries,
    NormSeries,
    Propagators,
    TimeGrid,
    evolve,
    h_prime_at_zero,
    height_series,
    operator_norm_series,
    propagators,
    richardson_limit,
)
from .verdicts import (
    ConvexityVerdict,
    check_differential_logconvexity,
    check_discrete_logconvexity,
    check_exponential_bound,
    check_monotonicity,
    check_squared_height_convexity,
    reevaluate,
)
