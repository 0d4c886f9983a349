from .generators import (
    INNER_PRODUCTS,
    RANDOM_KINDS,
    AdrParams,
    ShowexParams,
    advection_diffusion,
    contrast_matrix,
    random_family,
    showex_general,
    showex_matrix2,
    sine_profile,
)
from .fixtures import scalar_fixtures, stretch
