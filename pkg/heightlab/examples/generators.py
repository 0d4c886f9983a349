"""Generators for the concrete matrices studied with heightlab."""

import math
import torch

from dataclasses import dataclass

from heightlab.errors import DomainError
from heightlab.linalg import (
    DTYPE,
    REAL_DTYPE,
    adjoint,
    hermitian_eigen,
    hermitian_part,
    identity,
    normalize,
)

RANDOM_KINDS = (
    "normal-accretive",
    "strictly-accretive",
    "sectorial-quarter",
    "unrestricted",
)
INNER_PRODUCTS = ("trapezoidal", "euclidean")


@dataclass(frozen=True)
class ShowexParams:
    """Parameters of the Showalter-type counter-example.

    Args:
        lambda1 (float): Smaller eigenvalue of X, positive.
        lambda2 (float): Larger eigenvalue of X.
        delta (float): Coupling, 0 < delta <= 1 - sqrt(lambda1 / lambda2).
        dim (int): Dimension, at least 2.
    """

    lambda1: float
    lambda2: float
    delta: float
    dim: int = 2

    def __post_init__(self):
        if not self.lambda1 > 0.0:
            raise DomainError(f"lambda1 must be positive, got {self.lambda1}")
        if not self.lambda2 > self.lambda1:
            raise DomainError("lambda2 must exceed lambda1")
        delta_max = 1.0 - math.sqrt(self.lambda1 / self.lambda2)
        # Accept round-off at the upper end of the admissible interval
        if not 0.0 < self.delta <= delta_max + 1e-15:
            raise DomainError(
                f"delta must lie in (0, {delta_max:.6g}], got {self.delta}"
            )
        if self.dim < 2:
            raise DomainError(f"dim must be at least 2, got {self.dim}")

    def to_dict(self):
        return {
            "lambda1": self.lambda1,
            "lambda2": self.lambda2,
            "delta": self.delta,
            "dim": self.dim,
        }


@dataclass(frozen=True)
class AdrParams:
    """Interval (alpha, beta) and number n of interior grid points."""

    alpha: float = 0.0
    beta: float = 1.0
    n: int = 64

    def __post_init__(self):
        if not self.beta > self.alpha:
            raise DomainError("beta must exceed alpha")
        if self.n < 2:
            raise DomainError(f"n must be at least 2, got {self.n}")

    @property
    def spacing(self):
        return (self.beta - self.alpha) / (self.n + 1)

    def nodes(self):
        """Returns the unknown locations x_1, ..., x_{n+1} (x_{n+1} = beta)."""
        k = torch.arange(1, self.n + 2, dtype=REAL_DTYPE)
        return self.alpha + k * self.spacing

    def to_dict(self):
        return {"alpha": self.alpha, "beta": self.beta, "n": self.n}


def showex_general(p: ShowexParams):
    """Builds A = X + iY with Y = delta X + lambda1 U.

    X has eigenvalues lambda1, lambda2 on e_1, e_2 and is the identity on the
    remaining coordinates; U swaps e_1 and e_2 and vanishes elsewhere. Then
    m(A) = min(1, lambda1) (lambda1 in dimension 2), the numerical range lies
    in the closed quarter-plane sector and m(A^2) <= -delta^2 lambda1^2.
    """
    diagonal = torch.ones(p.dim, dtype=REAL_DTYPE)
    diagonal[0] = p.lambda1
    diagonal[1] = p.lambda2
    X = torch.diag(diagonal).to(DTYPE)

    U = torch.zeros(p.dim, p.dim, dtype=DTYPE)
    U[0, 1] = 1.0
    U[1, 0] = 1.0

    Y = p.delta * X + p.lambda1 * U

    return X + 1j * Y


def showex_matrix2(lam: float, delta: float):
    """Returns [[lam, 0], [0, 4 lam]] + i lam [[delta, 1], [1, 4 delta]]."""
    if not lam > 0.0:
        raise DomainError(f"lambda must be positive, got {lam}")
    if not 0.0 < delta <= 0.5:
        raise DomainError(f"delta must lie in (0, 1/2], got {delta}")

    return torch.tensor(
        [
            [lam + 1j * lam * delta, 1j * lam],
            [1j * lam, 4.0 * lam + 4j * lam * delta],
        ],
        dtype=DTYPE,
    )


def _trapezoidal_weights(p: AdrParams):
    """Square roots of the trapezoidal weights; the last unknown sits on the
    Neumann boundary and carries half weight."""
    sqrt_w = torch.ones(p.n + 1, dtype=REAL_DTYPE)
    sqrt_w[-1] = math.sqrt(0.5)

    return sqrt_w


def advection_diffusion(p: AdrParams, inner_product: str = "trapezoidal"):
    """Discretizes A u = -u'' + u' on (alpha, beta) with u(alpha) = 0 and
    u'(beta) = 0.

    Second-order central differences on x_k = alpha + k h, h = (beta -
    alpha)/(n + 1), unknowns u_1, ..., u_{n+1}. The Dirichlet value u_0 = 0 is
    eliminated, and the Neumann condition uses the ghost value u_{n+2} = u_n
    in both stencils.

    Args:
        p (AdrParams): Interval and resolution.
        inner_product (str, optional): "euclidean" returns the raw stencil
            matrix. "trapezoidal" returns W^{1/2} A W^{-1/2}, where W holds
            the trapezoidal weights, so that the Euclidean inner product of
            the result is the discrete L2 inner product. Defaults to
            "trapezoidal".

    Returns:
        torch.Tensor: Real nonsymmetric (n + 1) x (n + 1) matrix.
    """
    if inner_product not in INNER_PRODUCTS:
        raise DomainError(f"Unknown inner product {inner_product}")

    size = p.n + 1
    h = p.spacing
    diffusion = 1.0 / h**2
    advection = 1.0 / (2.0 * h)

    A = torch.zeros(size, size, dtype=REAL_DTYPE)
    for i in range(p.n):
        A[i, i] = 2.0 * diffusion
        if i > 0:
            A[i, i - 1] = -diffusion - advection
        A[i, i + 1] = -diffusion + advection

    # Ghost point: -u'' -> (2 u_{n+1} - 2 u_n) / h^2, centered u' vanishes
    A[p.n, p.n] = 2.0 * diffusion
    A[p.n, p.n - 1] = -2.0 * diffusion

    if inner_product == "trapezoidal":
        sqrt_w = _trapezoidal_weights(p)
        A = sqrt_w[:, None] * A / sqrt_w[None, :]

    return A.to(DTYPE)


def sine_profile(p: AdrParams, inner_product: str = "trapezoidal"):
    """Unit vector sampling sin(pi (x - alpha) / (2 (beta - alpha))), which
    vanishes at alpha and is flat at beta."""
    if inner_product not in INNER_PRODUCTS:
        raise DomainError(f"Unknown inner product {inner_product}")

    x = p.nodes()
    profile = torch.sin(0.5 * math.pi * (x - p.alpha) / (p.beta - p.alpha))
    if inner_product == "trapezoidal":
        profile = profile * _trapezoidal_weights(p)

    return normalize(profile.to(DTYPE))


def contrast_matrix():
    """Returns diag(-1, 3)."""
    return torch.diag(torch.tensor([-1.0, 3.0], dtype=REAL_DTYPE)).to(DTYPE)


def _complex_gaussian(shape, generator: torch.Generator):
    return torch.randn(*shape, dtype=DTYPE, generator=generator)


def _random_unitary(n: int, generator: torch.Generator):
    Q, R = torch.linalg.qr(_complex_gaussian((n, n), generator))
    # Fix the phases so that Q is Haar distributed
    phases = torch.diagonal(R) / torch.diagonal(R).abs()

    return Q * phases[None, :]


def _random_positive_definite(n: int, generator: torch.Generator):
    B = _complex_gaussian((n, n), generator)
    return hermitian_part(adjoint(B) @ B) / n + 0.1 * identity(n)


def _random_hermitian(n: int, generator: torch.Generator):
    G = _complex_gaussian((n, n), generator)
    return hermitian_part(G) / math.sqrt(n)


def _inverse_sqrt(X: torch.Tensor):
    eigen = hermitian_eigen(X)
    scale = eigen.values.rsqrt().to(DTYPE)

    return eigen.vectors @ torch.diag(scale) @ adjoint(eigen.vectors)


def random_family(kind: str, n: int, seed: int):
    """Draws a seeded random matrix from one of RANDOM_KINDS.

    - "normal-accretive": Q D Q^H with Q Haar unitary and Re D in [0.1, 2.1].
    - "strictly-accretive": X + iY, X positive definite (X >= 0.1 I) and Y a
      random Hermitian matrix scaled by a uniform factor in [0, 1).
    - "sectorial-quarter": as above, with Y rescaled so that -X <= Y <= X.
    - "unrestricted": i.i.d. standard complex Gaussian entries.

    The result depends only on (kind, n, seed).
    """
    if kind not in RANDOM_KINDS:
        raise DomainError(f"Unknown random family {kind}")
    if n < 1:
        raise DomainError(f"n must be at least 1, got {n}")

    generator = torch.Generator().manual_seed(seed)

    if kind == "normal-accretive":
        Q = _random_unitary(n, generator)
        real = 0.1 + 2.0 * torch.rand(n, dtype=REAL_DTYPE, generator=generator)
        imag = torch.randn(n, dtype=REAL_DTYPE, generator=generator)
        D = torch.diag(torch.complex(real, imag))
        return Q @ D @ adjoint(Q)
    elif kind == "unrestricted":
        return _complex_gaussian((n, n), generator)

    X = _random_positive_definite(n, generator)
    Y = _random_hermitian(n, generator)
    Y = Y * torch.rand(1, dtype=REAL_DTYPE, generator=generator).item()

    if kind == "sectorial-quarter":
        # -X <= Y <= X iff the spectral radius of X^{-1/2} Y X^{-1/2} <= 1
        S = _inverse_sqrt(X)
        eigen = hermitian_eigen(S @ Y @ S)
        radius = max(abs(eigen.min), abs(eigen.max))
        if radius > 0.9:
            Y = Y * (0.9 / radius)

    return X + 1j * Y
