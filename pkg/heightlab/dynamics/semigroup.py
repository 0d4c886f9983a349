"""Trajectories u(t) = e^{-tA} u0, height functions h(t) = |u(t)| with their
analytic derivatives, and the operator-norm envelope E(t) = |e^{-tA}|."""

import logging
import math
import torch

from dataclasses import dataclass

from heightlab.config import load_section
from heightlab.errors import ConsistencyError, DomainError, NumericalFailure
from heightlab.linalg import (
    REAL_DTYPE,
    as_vector,
    inner,
    matrix_exp,
    norm,
    normalize,
    operator_norm,
    spectral_abscissa,
    vector_norms,
)
from heightlab.operators import lower_bound_m

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class GridSpec:
    """Layout of the default time grid: a geometric part clustered near 0
    followed by a linear part up to t_max = t_scale / max(m(A), m_floor)."""

    n_points: int = 200
    t_scale: float = 10.0
    m_floor: float = 0.1
    geometric_fraction: float = 0.5
    first_fraction: float = 1e-5
    geometric_end_fraction: float = 0.05

    @classmethod
    def from_config(cls):
        return cls(**load_section("grid"))

    def t_max_for(self, m: float):
        return self.t_scale / max(m, self.m_floor)


class TimeGrid:
    """Strictly increasing times starting at 0, at least 3 of them."""

    def __init__(self, points):
        points = torch.as_tensor(points, dtype=REAL_DTYPE).flatten()
        if points.numel() < 3:
            raise DomainError("A time grid needs at least 3 points")
        if not torch.isfinite(points).all():
            raise DomainError("Time grid points must be finite")
        if points[0].item() != 0.0:
            raise DomainError("A time grid must start at t = 0")
        if not (points[1:] > points[:-1]).all():
            raise DomainError("Time grid points must be strictly increasing")

        self.points = points

    def __len__(self):
        return self.points.numel()

    def __getitem__(self, idx):
        return self.points[idx].item()

    @property
    def t_max(self):
        return self.points[-1].item()

    def tolist(self):
        return self.points.tolist()

    @classmethod
    def uniform(cls, t_max: float, n_points: int):
        if t_max <= 0.0:
            raise DomainError("t_max must be positive")

        return cls(torch.linspace(0.0, t_max, n_points, dtype=REAL_DTYPE))

    @classmethod
    def hybrid(cls, t_max: float, spec: GridSpec | None = None):
        """Geometric points on [first, end] * t_max, then linear to t_max."""
        spec = spec or GridSpec.from_config()
        if t_max <= 0.0:
            raise DomainError("t_max must be positive")
        if spec.n_points < 3:
            raise DomainError("n_points must be at least 3")

        n_geometric = max(1, int(spec.n_points * spec.geometric_fraction))
        n_geometric = min(n_geometric, spec.n_points - 2)
        t_first = spec.first_fraction * t_max
        t_switch = spec.geometric_end_fraction * t_max

        geometric = torch.logspace(
            math.log10(t_first),
            math.log10(t_switch),
            n_geometric,
            dtype=REAL_DTYPE,
        )
        linear = torch.linspace(
            t_switch, t_max, spec.n_points - n_geometric, dtype=REAL_DTYPE
        )[1:]
        zero = torch.zeros(1, dtype=REAL_DTYPE)

        return cls(torch.cat([zero, geometric, linear]))

    @classmethod
    def default_for(
        cls,
        A: torch.Tensor,
        spec: GridSpec | None = None,
        t_max: float | None = None,
    ):
        """Default hybrid grid on [0, t_scale / max(m(A), m_floor)]."""
        spec = spec or GridSpec.from_config()
        if t_max is None:
            t_max = spec.t_max_for(lower_bound_m(A))

        return cls.hybrid(t_max, spec)


@dataclass(frozen=True)
class Propagators:
    """e^{-t_k A} for every grid time, plus the step propagators
    e^{-(t_k - t_{k-1}) A} used for the independent norm check."""

    grid: TimeGrid
    direct: torch.Tensor
    steps: torch.Tensor


@dataclass(frozen=True)
class HeightSeries:
    """Height function h(t) = |e^{-tA} u0| sampled on a grid.

    Args:
        grid (TimeGrid): Sample times.
        h (torch.Tensor): Heights, positive.
        h_prime (torch.Tensor): h'(t) = -Re<Au, u> / |u|.
        h_second (torch.Tensor): h''(t) = (Re<A^2u, u> + |Au|^2) / |u|
            - (Re<Au, u>)^2 / |u|^3.
        h2_second (torch.Tensor): (h^2)''(t) = 2 Re<A^2u, u> + 2 |Au|^2.
        u_norm_check (torch.Tensor): |u(t)| recomputed by stepping.
        u0 (torch.Tensor): Initial vector.
        snapshots (torch.Tensor, optional): u(t_k) as rows, shape (N, n).
    """

    grid: TimeGrid
    h: torch.Tensor
    h_prime: torch.Tensor
    h_second: torch.Tensor
    h2_second: torch.Tensor
    u_norm_check: torch.Tensor
    u0: torch.Tensor
    snapshots: torch.Tensor | None = None

    def log_h(self):
        return torch.log(self.h)

    def margins(self):
        """Returns h h'' - h'^2 at every grid point."""
        return self.h * self.h_second - self.h_prime**2

    def rows(self):
        """Yields (t, h, hprime, hsecond, logh) per grid point."""
        yield from zip(
            self.grid.tolist(),
            self.h.tolist(),
            self.h_prime.tolist(),
            self.h_second.tolist(),
            self.log_h().tolist(),
        )


@dataclass(frozen=True)
class NormSeries:
    """E(t) = |e^{-tA}| on a grid.

    Args:
        grid (TimeGrid): Sample times.
        E (torch.Tensor): Operator norms.
        E_prime_zero_estimate (float): Extrapolated E'(0); should be -m(A).
        spectral_abscissa (float): inf Re sigma(A).
        peak (float): max E over the grid.
        rate_estimate (float): (1/t) log E(t) at the last grid point.
    """

    grid: TimeGrid
    E: torch.Tensor
    E_prime_zero_estimate: float
    spectral_abscissa: float
    peak: float
    rate_estimate: float


def _check_time(t: float):
    if not math.isfinite(t) or t < 0.0:
        raise DomainError(f"Time must be finite and non-negative, got {t}")


def evolve(A: torch.Tensor, u0: torch.Tensor, t: float):
    """Returns u(t) = e^{-tA} u0.

    Raises:
        DomainError: If t < 0 or u0 = 0.
    """
    _check_time(t)
    u0 = as_vector(u0, A.shape[0])
    if norm(u0) == 0.0:
        raise DomainError("Initial vector must be nonzero")

    return matrix_exp(-t * A) @ u0


def propagators(A: torch.Tensor, grid: TimeGrid) -> Propagators:
    """Computes e^{-tA} for every grid time and every grid step."""
    times = grid.tolist()
    direct = torch.stack([matrix_exp(-t * A) for t in times])
    deltas = [0.0] + [t1 - t0 for t0, t1 in zip(times[:-1], times[1:])]
    steps = torch.stack([matrix_exp(-dt * A) for dt in deltas])

    return Propagators(grid=grid, direct=direct, steps=steps)


def height_series(
    A: torch.Tensor,
    u0: torch.Tensor,
    grid: TimeGrid,
    props: Propagators | None = None,
    keep_snapshots: bool = False,
) -> HeightSeries:
    """Evaluates h, h', h'' and (h^2)'' along u(t) = e^{-tA} u0.

    Derivatives come from the closed forms in u(t), never from differencing h.

    Args:
        A (torch.Tensor): Square matrix.
        u0 (torch.Tensor): Nonzero initial vector.
        grid (TimeGrid): Sample times.
        props (Propagators, optional): Precomputed propagators for (A, grid);
            reused across initial vectors.
        keep_snapshots (bool, optional): Store u(t_k). Defaults to False.

    Returns:
        HeightSeries: The sampled height function.

    Raises:
        DomainError: If u0 = 0 or has the wrong length.
        ConsistencyError: If the propagated vector is exactly zero at some
            grid time, i.e. h(t) left the range of doubles.
    """
    u0 = as_vector(u0, A.shape[0])
    if norm(u0) == 0.0:
        raise DomainError("Initial vector must be nonzero")
    if props is None:
        props = propagators(A, grid)
    assert props.grid is grid or torch.equal(
        props.grid.points, grid.points
    ), "Propagators were computed on a different grid"

    us = props.direct @ u0
    Aus = us @ A.transpose(0, 1)
    A2us = Aus @ A.transpose(0, 1)

    h = vector_norms(us)
    if not (h > 0.0).all():
        k = torch.nonzero(~(h > 0.0))[0].item()
        raise ConsistencyError(
            f"Propagated vector is exactly zero at t = {grid[k]:.6e}; the "
            "height underflowed",
            residual=h[k].item(),
        )

    # Forms of the unit vector w = u/h, so that tiny heights cannot underflow
    ws = us / h.unsqueeze(-1)
    Aws = Aus / h.unsqueeze(-1)
    A2ws = A2us / h.unsqueeze(-1)
    re_Aw = (ws.conj() * Aws).sum(dim=-1).real
    re_A2w = (ws.conj() * A2ws).sum(dim=-1).real
    Aw_sq = vector_norms(Aws) ** 2

    h_prime = -re_Aw * h
    h_second = (re_A2w + Aw_sq - re_Aw**2) * h
    h2_second = 2.0 * (re_A2w + Aw_sq) * h**2

    check = [u0]
    for step in props.steps[1:]:
        check.append(step @ check[-1])
    u_norm_check = vector_norms(torch.stack(check))

    return HeightSeries(
        grid=grid,
        h=h,
        h_prime=h_prime,
        h_second=h_second,
        h2_second=h2_second,
        u_norm_check=u_norm_check,
        u0=u0,
        snapshots=us if keep_snapshots else None,
    )


def richardson_limit(steps: list, values: list):
    """Extrapolates one-sided difference quotients D(delta) to delta -> 0.

    Assumes D(delta) = D + c_1 delta + c_2 delta^2 + ...; the Neville table
    evaluates the interpolating polynomial in delta at delta = 0, so level k
    removes the delta^k term.
    """
    assert len(steps) == len(values) >= 1, "Need one value per step"
    table = list(values)
    for level in range(1, len(steps)):
        table = [
            (steps[i] * table[i + 1] - steps[i + level] * table[i])
            / (steps[i] - steps[i + level])
            for i in range(len(table) - 1)
        ]

    return table[0]


def _default_steps():
    return load_section("derivative_limits")["steps"]


def h_prime_at_zero(
    A: torch.Tensor, u0: torch.Tensor, steps: list | None = None
):
    """Returns h'(0) for the normalized u0, analytically and as a limit.

    Returns:
        tuple[float, float]: (-Re<Au0, u0>, Richardson limit of
            (h(delta) - h(0)) / delta).
    """
    steps = steps or _default_steps()
    u0 = normalize(as_vector(u0, A.shape[0]))
    analytic = -inner(A @ u0, u0).real.item()

    quotients = [(norm(evolve(A, u0, delta)) - 1.0) / delta for delta in steps]

    return analytic, richardson_limit(steps, quotients)


def operator_norm_series(
    A: torch.Tensor,
    grid: TimeGrid,
    steps: list | None = None,
    props: Propagators | None = None,
) -> NormSeries:
    """Computes E(t) = |e^{-tA}| on grid together with E'(0) and the
    spectral abscissa."""
    steps = steps or _default_steps()
    if props is None:
        direct = [matrix_exp(-t * A) for t in grid.tolist()]
    else:
        direct = list(props.direct)

    E = torch.tensor([operator_norm(P) for P in direct], dtype=REAL_DTYPE)
    if abs(E[0].item() - 1.0) > 1e-12:
        logger.warning(f"E(0) = {E[0].item():.15f}, expected 1")

    quotients = [
        (operator_norm(matrix_exp(-delta * A)) - 1.0) / delta for delta in steps
    ]
    E_prime_zero = richardson_limit(steps, quotients)

    E_last = E[-1].item()
    if not E_last > 0.0:
        raise NumericalFailure(
            f"E(t) underflowed to zero at t = {grid.t_max:.6e}",
            residual=E_last,
        )

    return NormSeries(
        grid=grid,
        E=E,
        E_prime_zero_estimate=E_prime_zero,
        spectral_abscissa=spectral_abscissa(A),
        peak=E.max().item(),
        rate_estimate=math.log(E_last) / grid.t_max,
    )
