"""Dense complex matrix/vector types, tolerances and small helpers.

Matrices and vectors are plain torch tensors of dtype torch.complex128. The
helpers as_matrix and as_vector validate (and convert) user input; every other
function in the package assumes validated input.
"""

import math
import torch

from dataclasses import dataclass

from heightlab.config import load_section
from heightlab.errors import DomainError

DTYPE = torch.complex128
REAL_DTYPE = torch.float64


@dataclass(frozen=True)
class Tolerances:
    """The tolerance record shared by every module.

    Args:
        atol (float): Absolute tolerance.
        rtol (float): Relative tolerance, multiplied by a problem scale.
        log_atol (float): Absolute tolerance used in the log domain.
    """

    atol: float = 1e-12
    rtol: float = 1e-10
    log_atol: float = 1e-9

    @classmethod
    def from_config(cls):
        return cls(**load_section("tolerances"))

    def threshold(self, scale: float = 1.0):
        """Returns atol + rtol * scale."""
        return self.atol + self.rtol * scale

    def to_dict(self):
        return {
            "atol": self.atol,
            "rtol": self.rtol,
            "log_atol": self.log_atol,
        }


@dataclass(frozen=True)
class EigenSystem:
    """Eigen-decomposition of a Hermitian matrix.

    Args:
        values (torch.Tensor): Real eigenvalues in ascending order, shape (n,).
        vectors (torch.Tensor): Unitary matrix whose columns are the
            corresponding eigenvectors, shape (n, n).
    """

    values: torch.Tensor
    vectors: torch.Tensor

    @property
    def min(self):
        return self.values[0].item()

    @property
    def max(self):
        return self.values[-1].item()

    def vector(self, k: int):
        return self.vectors[:, k].clone()


def as_matrix(data) -> torch.Tensor:
    """Converts data to a validated n x n complex128 tensor.

    Accepts torch tensors, nested lists of numbers and anything else
    torch.as_tensor understands.
    """
    try:
        matrix = torch.as_tensor(data).to(DTYPE)
    except (TypeError, ValueError, RuntimeError) as e:
        raise DomainError(f"Could not convert input to a matrix: {e}")

    if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
        raise DomainError(
            f"Expected a square matrix, got {tuple(matrix.shape)}"
        )
    if matrix.shape[0] < 1:
        raise DomainError("Matrix dimension must be at least 1")
    if not torch.isfinite(torch.view_as_real(matrix)).all():
        raise DomainError("Matrix entries must be finite")

    return matrix


def as_vector(data, n: int | None = None) -> torch.Tensor:
    """Converts data to a validated complex128 vector of (optional) length n."""
    try:
        vector = torch.as_tensor(data).to(DTYPE)
    except (TypeError, ValueError, RuntimeError) as e:
        raise DomainError(f"Could not convert input to a vector: {e}")

    if vector.ndim != 1:
        raise DomainError(f"Expected a vector, got shape {tuple(vector.shape)}")
    if n is not None and vector.shape[0] != n:
        raise DomainError(
            f"Vector has length {vector.shape[0]}, expected {n}"
        )
    if not torch.isfinite(torch.view_as_real(vector)).all():
        raise DomainError("Vector entries must be finite")

    return vector


def adjoint(M: torch.Tensor):
    return M.conj().transpose(-2, -1)


def hermitian_part(M: torch.Tensor):
    """Returns (M + M^H) / 2."""
    return 0.5 * (M + adjoint(M))


def skew_part(M: torch.Tensor):
    """Returns (M - M^H) / 2i, the Hermitian 'imaginary part' of M."""
    return (M - adjoint(M)) / 2j


def inner(u: torch.Tensor, v: torch.Tensor):
    """Inner product <u, v> = v^H u, linear in the first argument."""
    return torch.vdot(v, u)


def vector_norms(us: torch.Tensor):
    """Euclidean norms along the last dimension.

    Each vector is divided by its largest entry modulus before squaring, so
    norms down to the smallest double survive; zero vectors give 0.
    """
    scale = us.abs().amax(dim=-1, keepdim=True)
    safe = torch.where(scale > 0.0, scale, torch.ones_like(scale))

    return torch.linalg.vector_norm(us / safe, dim=-1) * scale.squeeze(-1)


def norm(u: torch.Tensor):
    return vector_norms(u).item()


def frobenius(M: torch.Tensor):
    return torch.linalg.matrix_norm(M, ord="fro").item()


def normalize(u: torch.Tensor):
    """Returns u / |u|. Raises DomainError for the zero vector."""
    u_norm = norm(u)
    if u_norm == 0.0 or not math.isfinite(u_norm):
        raise DomainError("Cannot normalize a zero (or non-finite) vector")

    return u / u_norm


def basis_vector(n: int, k: int):
    """Returns the k-th standard basis vector of C^n (0-indexed)."""
    assert 0 <= k < n, "Basis index out of range"
    e = torch.zeros(n, dtype=DTYPE)
    e[k] = 1.0

    return e


def identity(n: int):
    return torch.eye(n, dtype=DTYPE)
