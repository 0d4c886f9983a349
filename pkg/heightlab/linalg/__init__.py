from .core import (
    DTYPE,
    REAL_DTYPE,
    EigenSystem,
    Tolerances,
    adjoint,
    as_matrix,
    as_vector,
    basis_vector,
    frobenius,
    hermitian_part,
    identity,
    inner,
    norm,
    normalize,
    skew_part,
    vector_norms,
)
from .eigen import (
    general_eigenvalues,
    hermitian_eigen,
    operator_norm,
    spectral_abscissa,
)
from .expm import matrix_exp
