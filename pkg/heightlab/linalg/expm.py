"""Matrix exponential by scaling and squaring with a [13/13] Pade approximant.

The approximant is used at a single fixed order; the scaling exponent s is
chosen from the 1-norm so that |2^-s M|_1 <= theta_13, the bound under which
the [13/13] approximant is accurate to double precision.
"""

import math
import torch

from heightlab.errors import NumericalFailure
from heightlab.linalg.core import DTYPE, identity

THETA_13 = 5.371920351148152

# Coefficients of the [13/13] Pade approximant to exp
PADE_13 = (
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
)


class _PadeHelper:
    """Lazily evaluates the even powers of M needed by the approximant."""

    def __init__(self, M: torch.Tensor):
        self.M = M
        self._M2 = None
        self._M4 = None
        self._M6 = None
        self.ident = identity(M.shape[0])

    @property
    def M2(self):
        if self._M2 is None:
            self._M2 = self.M @ self.M
        return self._M2

    @property
    def M4(self):
        if self._M4 is None:
            self._M4 = self.M2 @ self.M2
        return self._M4

    @property
    def M6(self):
        if self._M6 is None:
            self._M6 = self.M4 @ self.M2
        return self._M6

    def pade13_scaled(self, s: int):
        b = PADE_13
        B = self.M * 2.0**-s
        B2 = self.M2 * 2.0 ** (-2 * s)
        B4 = self.M4 * 2.0 ** (-4 * s)
        B6 = self.M6 * 2.0 ** (-6 * s)

        U2 = B6 @ (b[13] * B6 + b[11] * B4 + b[9] * B2)
        U = B @ (U2 + b[7] * B6 + b[5] * B4 + b[3] * B2 + b[1] * self.ident)
        V2 = B6 @ (b[12] * B6 + b[10] * B4 + b[8] * B2)
        V = V2 + b[6] * B6 + b[4] * B4 + b[2] * B2 + b[0] * self.ident

        return U, V


def _scaling_exponent(norm_1: float):
    if norm_1 <= THETA_13:
        return 0

    return max(int(math.ceil(math.log2(norm_1 / THETA_13))), 0)


def matrix_exp(M: torch.Tensor) -> torch.Tensor:
    """Computes exp(M) for a square complex matrix.

    Args:
        M (torch.Tensor): Square matrix with finite entries.

    Returns:
        torch.Tensor: The matrix exponential of M.

    Raises:
        NumericalFailure: If the result overflows; carries |M|_1.
    """
    M = M.to(DTYPE)
    n = M.shape[0]
    if n == 1:
        res = torch.exp(M)
    else:
        norm_1 = torch.linalg.matrix_norm(M, ord=1).item()
        if not math.isfinite(norm_1):
            raise NumericalFailure(
                "Matrix exponential of a non-finite matrix", residual=norm_1
            )
        if norm_1 == 0.0:
            return identity(n)

        s = _scaling_exponent(norm_1)
        U, V = _PadeHelper(M).pade13_scaled(s)
        res = torch.linalg.solve(V - U, V + U)
        for _ in range(s):
            res = res @ res

    if not torch.isfinite(torch.view_as_real(res)).all():
        norm_1 = torch.linalg.matrix_norm(M, ord=1).item()
        raise NumericalFailure(
            f"Matrix exponential overflowed (|M|_1 = {norm_1:.3e})",
            residual=norm_1,
        )

    return res
