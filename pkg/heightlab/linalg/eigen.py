"""Eigensolvers and the operator norm.

hermitian_eigen is a cyclic Jacobi method in round-robin (tournament) order:
each step applies n/2 disjoint complex rotations at once, so a sweep costs
n - 1 batched updates instead of n(n - 1)/2 scalar ones. general_eigenvalues
reduces to Hessenberg form with Householder reflectors and then runs a
Wilkinson-shifted QR iteration with deflation.
"""

import cmath
import functools
import logging
import math
import torch

from heightlab.config import load_section
from heightlab.errors import DomainError, NumericalFailure
from heightlab.linalg.core import (
    DTYPE,
    EigenSystem,
    adjoint,
    frobenius,
    hermitian_part,
    identity,
)

logger = logging.getLogger(__name__)

DEFAULT_EIGEN_TOL = 1e-12
DEFAULT_QR_TOL = 2.220446049250313e-16
_LINALG_CONFIG = load_section("linalg")


@functools.lru_cache(maxsize=None)
def _round_robin(n: int):
    """Returns the rounds of a round-robin tournament on n players as pairs of
    index tensors (p, q) with p < q. Every pair of indices meets exactly once
    per sweep."""
    m = n + (n % 2)  # Pad with a dummy player if n is odd
    players = list(range(m))
    rounds = []
    for _ in range(m - 1):
        pairs = [
            tuple(sorted((players[i], players[m - 1 - i])))
            for i in range(m // 2)
        ]
        pairs = [(p, q) for p, q in pairs if q < n]
        if pairs:
            p_idx = torch.tensor([p for p, _ in pairs], dtype=torch.long)
            q_idx = torch.tensor([q for _, q in pairs], dtype=torch.long)
            rounds.append((p_idx, q_idx))

        # Keep the first player fixed and rotate the rest
        players = [players[0], players[-1]] + players[1:-1]

    return rounds


def _off_diagonal_norm(H: torch.Tensor):
    off = H - torch.diag(torch.diagonal(H))
    return frobenius(off)


def _rotation(H: torch.Tensor, p_idx: torch.Tensor, q_idx: torch.Tensor):
    """Builds the unitary J annihilating H[p, q] for every pair (p, q)."""
    app = H[p_idx, p_idx].real
    aqq = H[q_idx, q_idx].real
    apq = H[p_idx, q_idx]
    r = apq.abs()

    active = r > 0.0
    r_safe = torch.where(active, r, torch.ones_like(r))
    phase = torch.where(active, apq / r_safe, torch.ones_like(apq))

    tau = (aqq - app) / (2.0 * r_safe)
    ones = torch.ones_like(tau)
    sign = torch.where(tau >= 0.0, ones, -ones)
    t = sign / (tau.abs() + torch.hypot(ones, tau))
    t = torch.where(active, t, torch.zeros_like(t))
    c = 1.0 / torch.sqrt(1.0 + t * t)
    s = t * c

    n = H.shape[0]
    J = identity(n)
    J[p_idx, p_idx] = c.to(DTYPE)
    J[p_idx, q_idx] = s.to(DTYPE)
    J[q_idx, p_idx] = -s * phase.conj()
    J[q_idx, q_idx] = c * phase.conj()

    return J


def hermitian_eigen(
    H: torch.Tensor,
    tol: float = DEFAULT_EIGEN_TOL,
    max_sweeps: int | None = None,
) -> EigenSystem:
    """Computes the eigen-decomposition of a Hermitian matrix.

    The input is symmetrized internally. Iteration stops once the off-diagonal
    Frobenius mass is at most tol * |H|_F.

    Args:
        H (torch.Tensor): Hermitian matrix, shape (n, n).
        tol (float, optional): Relative convergence tolerance. Defaults to
            1e-12.
        max_sweeps (int, optional): Sweep cap. Defaults to the value in
            config.json (100).

    Returns:
        EigenSystem: Ascending eigenvalues and orthonormal eigenvectors.
    """
    if max_sweeps is None:
        max_sweeps = _LINALG_CONFIG["jacobi_max_sweeps"]

    H = H.to(DTYPE)
    if not torch.isfinite(torch.view_as_real(H)).all():
        raise NumericalFailure("Hermitian eigensolver got non-finite entries")

    n = H.shape[0]
    scale = frobenius(H)

    asymmetry = frobenius(H - adjoint(H))
    if asymmetry > _LINALG_CONFIG["hermitian_check"] * max(scale, 1.0):
        raise DomainError(
            f"Matrix is not Hermitian (|H - H^H| = {asymmetry:.3e})"
        )

    A = hermitian_part(H)
    V = identity(n)

    if n == 1 or scale == 0.0:
        return EigenSystem(values=torch.diagonal(A).real.clone(), vectors=V)

    rounds = _round_robin(n)
    off = _off_diagonal_norm(A)
    sweep = 0
    while off > tol * scale:
        if sweep >= max_sweeps:
            raise NumericalFailure(
                f"Jacobi iteration did not converge after {max_sweeps} sweeps",
                residual=off,
            )
        for p_idx, q_idx in rounds:
            J = _rotation(A, p_idx, q_idx)
            A = adjoint(J) @ A @ J
            V = V @ J

        A = hermitian_part(A)
        off = _off_diagonal_norm(A)
        sweep += 1

    logger.debug(f"Jacobi converged in {sweep} sweeps (off = {off:.3e})")

    values = torch.diagonal(A).real.clone()
    order = torch.argsort(values)

    return EigenSystem(values=values[order], vectors=V[:, order].clone())


def _hessenberg(A: torch.Tensor):
    """Reduces A to upper Hessenberg form by Householder similarity."""
    H = A.clone()
    n = H.shape[0]
    for k in range(n - 2):
        x = H[k + 1 :, k].clone()
        alpha = torch.linalg.vector_norm(x).item()
        if alpha == 0.0:
            continue

        x0 = x[0].item()
        phase = x0 / abs(x0) if x0 != 0 else 1.0
        v = x.clone()
        v[0] = v[0] + phase * alpha
        v = v / torch.linalg.vector_norm(v)

        # H <- P H P with P = I - 2 v v^H
        H[k + 1 :, k:] -= 2.0 * torch.outer(v, v.conj() @ H[k + 1 :, k:])
        H[:, k + 1 :] -= 2.0 * torch.outer(H[:, k + 1 :] @ v, v.conj())
        H[k + 2 :, k] = 0.0

    return H


def _wilkinson_shift(a: complex, b: complex, c: complex, d: complex):
    """Eigenvalue of [[a, b], [c, d]] closest to d."""
    half_tr = 0.5 * (a + d)
    disc = cmath.sqrt(0.25 * (a - d) ** 2 + b * c)
    mu1, mu2 = half_tr + disc, half_tr - disc

    return mu1 if abs(mu1 - d) <= abs(mu2 - d) else mu2


def general_eigenvalues(
    A: torch.Tensor,
    tol: float = DEFAULT_QR_TOL,
    max_iter_per_eigenvalue: int | None = None,
):
    """Computes all eigenvalues (with multiplicity) of a square matrix.

    Args:
        A (torch.Tensor): Square complex matrix.
        tol (float, optional): Relative deflation tolerance for subdiagonal
            entries. Defaults to machine epsilon.
        max_iter_per_eigenvalue (int, optional): Iteration cap per deflated
            eigenvalue. Defaults to the value in config.json (30).

    Returns:
        list[complex]: The n eigenvalues, in order of deflation.
    """
    if max_iter_per_eigenvalue is None:
        max_iter_per_eigenvalue = _LINALG_CONFIG["qr_max_iter_per_eigenvalue"]

    n = A.shape[0]
    H = _hessenberg(A.to(DTYPE))
    scale = max(frobenius(H), 1e-300)

    eigenvalues = []
    hi = n - 1
    its = 0
    while hi >= 0:
        if hi == 0:
            eigenvalues.append(H[0, 0].item())
            break

        # Look for a negligible subdiagonal entry, from the bottom up
        lo = hi
        while lo > 0:
            sub = abs(H[lo, lo - 1].item())
            diag_scale = abs(H[lo, lo].item()) + abs(H[lo - 1, lo - 1].item())
            if sub <= tol * diag_scale or sub <= tol * scale:
                H[lo, lo - 1] = 0.0
                break
            lo -= 1

        if lo == hi:
            eigenvalues.append(H[hi, hi].item())
            hi -= 1
            its = 0
            continue

        its += 1
        if its > max_iter_per_eigenvalue:
            raise NumericalFailure(
                f"QR iteration did not converge for eigenvalue {hi}",
                residual=abs(H[hi, hi - 1].item()),
            )

        if its % 10 == 0:
            # Exceptional shift to break cycles
            mu = H[hi, hi].item() + 1.5 * abs(H[hi, hi - 1].item())
        else:
            mu = _wilkinson_shift(
                H[hi - 1, hi - 1].item(),
                H[hi - 1, hi].item(),
                H[hi, hi - 1].item(),
                H[hi, hi].item(),
            )

        size = hi - lo + 1
        shift = mu * identity(size)
        block = H[lo : hi + 1, lo : hi + 1]
        Q, R = torch.linalg.qr(block - shift)
        H[lo : hi + 1, lo : hi + 1] = R @ Q + shift

    if not all(cmath.isfinite(z) for z in eigenvalues):
        raise NumericalFailure("QR iteration produced non-finite eigenvalues")

    return eigenvalues


def spectral_abscissa(A: torch.Tensor):
    """Returns inf Re sigma(A)."""
    return min(z.real for z in general_eigenvalues(A))


def operator_norm(M: torch.Tensor, tol: float = DEFAULT_EIGEN_TOL):
    """Returns the largest singular value c * sqrt(lambda_max(S^H S)) of
    M = c S, where c is the largest entry modulus of M. The Gram matrix of S
    has entries of size at most n, so it neither overflows nor underflows.

    Raises:
        NumericalFailure: If M has non-finite entries.
    """
    if not torch.isfinite(torch.view_as_real(M)).all():
        raise NumericalFailure("Operator norm of a non-finite matrix")

    c = M.abs().max().item()
    if c == 0.0:
        return 0.0

    S = M / c
    lambda_max = hermitian_eigen(adjoint(S) @ S, tol=tol).max

    return c * math.sqrt(max(lambda_max, 0.0))
