"""The log-convexity criterion and its minimization over the unit sphere.

For a unit vector x write X = (A + A^H)/2 and K = Re(A^2) + A^H A. The criterion

    g(x) = <Kx, x> - 2 <Xx, x>^2

is non-negative for every unit x exactly when h(t) = |e^{-tA} u0| is log-convex
for every u0. Its infimum over the sphere is estimated by seeded sampling
followed by projected-gradient descent with an Armijo backtracking line search,
run on all starts at once.
"""

import logging
import math
import torch

from dataclasses import asdict, dataclass

from heightlab.config import load_section
from heightlab.errors import NumericalFailure
from heightlab.linalg import (
    DTYPE,
    Tolerances,
    adjoint,
    frobenius,
    hermitian_part,
    inner,
    normalize,
)
from heightlab.operators.props import (
    HOLDS,
    VIOLATED,
    PropertyReport,
    cartesian_parts,
)

logger = logging.getLogger(__name__)

_SAMPLE_CHUNK = 8192


@dataclass(frozen=True)
class CriterionWitness:
    """A unit vector x together with g(x) and where x came from
    ("sampled" or "descent")."""

    x: torch.Tensor
    value: float
    origin: str


@dataclass(frozen=True)
class CriterionConfig:
    seed: int
    n_samples: int = 2048
    n_starts: int = 16
    max_iter: int = 500
    grad_tol: float = 1e-10
    contraction: float = 0.5
    sufficient_decrease: float = 1e-4
    optimism: float = 2.0
    max_backtracks: int = 40
    brute_force_samples: int = 10000

    @classmethod
    def from_config(cls, seed: int | None = None):
        section = load_section("criterion")
        if seed is None:
            seed = load_section("run")["seed"]

        return cls(
            seed=seed,
            n_samples=section["n_samples"],
            n_starts=section["n_starts"],
            max_iter=section["max_iter"],
            grad_tol=section["grad_tol"],
            contraction=section["contraction"],
            sufficient_decrease=section["sufficient_decrease"],
            optimism=section["optimism"],
            max_backtracks=section["max_backtracks"],
            brute_force_samples=section["brute_force_samples"],
        )

    def to_dict(self):
        return asdict(self)


def criterion_forms(A: torch.Tensor):
    """Returns the Hermitian pair (K, X) defining the criterion."""
    K = hermitian_part(A @ A) + adjoint(A) @ A
    X = hermitian_part(A)

    return K, X


def _batched_terms(K: torch.Tensor, X: torch.Tensor, xs: torch.Tensor):
    # Rows of xs are vectors; (M x)^T = x^T M^T
    Kx = xs @ K.transpose(0, 1)
    Xx = xs @ X.transpose(0, 1)
    q_K = (xs.conj() * Kx).sum(dim=-1).real
    q_X = (xs.conj() * Xx).sum(dim=-1).real

    return q_K, q_X, Kx, Xx


def _batched_values(K, X, xs):
    q_K, q_X, _, _ = _batched_terms(K, X, xs)
    return q_K - 2.0 * q_X**2


def _batched_values_and_grads(K, X, xs):
    q_K, q_X, Kx, Xx = _batched_terms(K, X, xs)
    values = q_K - 2.0 * q_X**2
    grads = 2.0 * Kx - 8.0 * q_X.unsqueeze(-1) * Xx

    return values, grads


def _normalize_rows(xs: torch.Tensor):
    return xs / torch.linalg.vector_norm(xs, dim=-1, keepdim=True)


def _tangent(grads: torch.Tensor, xs: torch.Tensor):
    """Projects each gradient onto the tangent space of the sphere at x."""
    radial = (xs.conj() * grads).sum(dim=-1).real

    return grads - radial.unsqueeze(-1) * xs


def criterion_polynomial(A: torch.Tensor, x: torch.Tensor):
    """Evaluates <Kx, x> - 2 <Xx, x>^2 at x as given, without normalizing."""
    K, X = criterion_forms(A)
    q_K = inner(K @ x, x).real.item()
    q_X = inner(X @ x, x).real.item()

    return q_K - 2.0 * q_X**2


def criterion_value(A: torch.Tensor, x: torch.Tensor):
    """Evaluates g at x / |x|. Raises DomainError for x = 0."""
    return criterion_polynomial(A, normalize(x))


def criterion_gradient(A: torch.Tensor, x: torch.Tensor):
    """Euclidean gradient 2Kx - 8<Xx, x>Xx of the criterion polynomial at x,
    with respect to the real coordinates of x."""
    K, X = criterion_forms(A)
    q_X = inner(X @ x, x).real

    return 2.0 * (K @ x) - 8.0 * q_X * (X @ x)


def criterion_value_cartesian(A: torch.Tensor, x: torch.Tensor):
    """Evaluates g through the Cartesian parts,

        2 (|Xu|^2 + Im<Xu, Yu> - <Xu, u>^2),  u = x / |x|,

    which agrees with criterion_value up to rounding."""
    u = normalize(x)
    pair = cartesian_parts(A)
    Xu = pair.X @ u
    Yu = pair.Y @ u
    q_X = inner(Xu, u).real.item()

    return 2.0 * (
        torch.linalg.vector_norm(Xu).item() ** 2
        + inner(Xu, Yu).imag.item()
        - q_X**2
    )


def strict_convexity_value(A: torch.Tensor, x: torch.Tensor):
    """Evaluates Re<A^2 u, u> + |Au|^2 - (Re<Au, u>)^2 at u = x / |x|.

    This is h''(0) for h(t) = |e^{-tA} u|. Compared with the criterion the
    squared term lacks the factor 2, so g >= 0 implies this value is
    positive whenever Au != 0 is not an eigen-direction.
    """
    u = normalize(x)
    Au = A @ u

    return (
        inner(A @ Au, u).real.item()
        + torch.linalg.vector_norm(Au).item() ** 2
        - inner(Au, u).real.item() ** 2
    )


def _sample_unit_vectors(n: int, count: int, generator: torch.Generator):
    xs = torch.randn(count, n, dtype=DTYPE, generator=generator)

    return _normalize_rows(xs)


def brute_force_criterion_min(
    A: torch.Tensor, n_samples: int | None = None, seed: int | None = None
) -> CriterionWitness:
    """Samples n_samples seeded unit vectors and returns the smallest g found.

    Deterministic for a fixed seed; used to cross-check the descent.
    """
    if n_samples is None:
        n_samples = load_section("criterion")["brute_force_samples"]
    assert n_samples >= 1, "n_samples must be positive"
    if seed is None:
        seed = load_section("run")["seed"]

    K, X = criterion_forms(A)
    generator = torch.Generator().manual_seed(seed)
    n = A.shape[0]

    best_x, best_value = None, math.inf
    remaining = n_samples
    while remaining > 0:
        count = min(remaining, _SAMPLE_CHUNK)
        xs = _sample_unit_vectors(n, count, generator)
        values = _batched_values(K, X, xs)
        idx = torch.argmin(values).item()
        if values[idx].item() < best_value:
            best_value = values[idx].item()
            best_x = xs[idx].clone()
        remaining -= count

    return CriterionWitness(
        x=best_x, value=criterion_value(A, best_x), origin="sampled"
    )


def _descend(K, X, xs, config: CriterionConfig):
    """Batched projected-gradient descent on the unit sphere.

    Returns the final iterates, their values and the number of iterations.
    """
    n_starts = xs.shape[0]
    values, grads = _batched_values_and_grads(K, X, xs)

    lipschitz = 2.0 * frobenius(K) + 8.0 * frobenius(X) ** 2
    if lipschitz == 0.0:
        return xs, values, 0

    alpha = torch.full((n_starts,), 1.0 / lipschitz, dtype=torch.float64)
    active = torch.ones(n_starts, dtype=torch.bool)

    iteration = 0
    for iteration in range(1, config.max_iter + 1):
        tangent = _tangent(grads, xs)
        grad_norms = torch.linalg.vector_norm(tangent, dim=-1)
        active = active & (grad_norms > config.grad_tol)
        if not active.any():
            break

        step = alpha.clone()
        accepted = ~active
        for _ in range(config.max_backtracks):
            trial = _normalize_rows(xs - step.unsqueeze(-1) * tangent)
            trial_values = _batched_values(K, X, trial)
            armijo = trial_values <= (
                values - config.sufficient_decrease * step * grad_norms**2
            )
            newly = armijo & ~accepted
            xs = torch.where(newly.unsqueeze(-1), trial, xs)
            values = torch.where(newly, trial_values, values)
            accepted = accepted | newly
            if accepted.all():
                break
            step = torch.where(accepted, step, step * config.contraction)

        # Starts with no admissible step are at a numerical stationary point
        active = active & accepted
        alpha = torch.where(active, step * config.optimism, alpha)

        values, grads = _batched_values_and_grads(K, X, xs)
        if not torch.isfinite(values).all():
            raise NumericalFailure(
                "Criterion descent produced non-finite values",
                residual=iteration,
            )

    return xs, values, iteration


def check_logconvex_criterion(
    A: torch.Tensor,
    config: CriterionConfig | None = None,
    tol: Tolerances | None = None,
) -> PropertyReport:
    """Estimates inf g over the unit sphere and decides log-convexity.

    The n_starts best of n_samples seeded samples seed a batched descent; the
    best final iterate is the witness. The result is identical for identical
    (A, config).

    Args:
        A (torch.Tensor): Square matrix.
        config (CriterionConfig, optional): Optimizer settings. Defaults to
            config.json.
        tol (Tolerances, optional): Defaults to config.json.

    Returns:
        PropertyReport: property "log-convexity-criterion"; the witness is the
            minimizer found, present whatever the status.
    """
    config = config or CriterionConfig.from_config()
    tol = tol or Tolerances.from_config()

    n = A.shape[0]
    K, X = criterion_forms(A)
    generator = torch.Generator().manual_seed(config.seed)
    samples = _sample_unit_vectors(n, config.n_samples, generator)
    sample_values = _batched_values(K, X, samples)

    n_starts = min(config.n_starts, config.n_samples)
    order = torch.argsort(sample_values, stable=True)[:n_starts]
    best_sample = sample_values[order[0]].item()

    xs, values, iterations = _descend(K, X, samples[order].clone(), config)
    best = torch.argmin(values).item()
    x = xs[best].clone()
    value = criterion_value(A, x)
    logger.debug(
        f"Criterion descent: best sample {best_sample:.6e}, "
        f"best descent {value:.6e} after {iterations} iterations"
    )

    threshold = tol.threshold(frobenius(A) ** 2)
    status = HOLDS if value >= -threshold else VIOLATED
    method = {
        "name": "multistart-projected-gradient",
        "best_sample": best_sample,
        "iterations": iterations,
        **config.to_dict(),
    }

    return PropertyReport(
        property="log-convexity-criterion",
        status=status,
        extremal_value=value,
        tolerance=threshold,
        method=method,
        witness=x,
    )
