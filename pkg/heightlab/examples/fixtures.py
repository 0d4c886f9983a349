"""Sampled scalar functions with known convexity behaviour, packaged as
height series so the verdicts of heightlab.dynamics apply to them."""

import math
import torch

from heightlab.config import load_section
from heightlab.dynamics import HeightSeries, TimeGrid
from heightlab.linalg import DTYPE, REAL_DTYPE


def _series(grid: TimeGrid, f, f_prime, f_second):
    t = grid.points
    h = f(t)
    h_prime = f_prime(t)
    h_second = f_second(t)

    return HeightSeries(
        grid=grid,
        h=h,
        h_prime=h_prime,
        h_second=h_second,
        h2_second=2.0 * (h * h_second + h_prime**2),
        u_norm_check=h.clone(),
        u0=torch.tensor([h[0].item()], dtype=DTYPE),
    )


def stretch(f, a: float, b: float):
    """Returns the stretch of f at a < b: f(t) for t <= a, f(a) on [a, b],
    and f(t - (b - a)) for t >= b.

    Works on tensors; f must accept a tensor of times.
    """
    assert a < b, "Stretch needs a < b"

    def stretched(t: torch.Tensor):
        shifted = torch.where(t >= b, t - (b - a), t)
        clamped = torch.where((t > a) & (t < b), torch.full_like(t, a), shifted)
        return f(clamped)

    return stretched


def _stretch_derivative(f_derivative, a: float, b: float):
    """Derivative of the stretch: zero on the open flat piece."""
    inner = stretch(f_derivative, a, b)

    def derivative(t: torch.Tensor):
        flat = (t > a) & (t < b)
        return torch.where(flat, torch.zeros_like(t), inner(t))

    return derivative


def scalar_fixtures(t_max: float | None = None, n_points: int | None = None):
    """Returns the named fixtures.

    - "exp_decay": e^{-t}, log-linear, so log-convexity holds with equality.
    - "stretched": stretch at a = 1, b = 2 of e^{-t} + e^{t-2}, whose
      minimum lies at t = 1; log-convex but constant on [1, 2], so not
      strictly convex.
    - "stretched_exp_decay": stretch of e^{-t} at a = 1, b = 2; the flat
      piece joins two decreasing pieces, so it is not log-convex.
    - "exp_minus_one": e^{s} - 1 for s = t + 0.5 in [0.5, 2], convex but not
      log-convex.
    - "quartic": (t + 0.01)^4, strictly convex with a nearly vanishing
      second derivative at the left end.

    Args:
        t_max (float, optional): Defaults to the fixtures section of
            config.json (4.0).
        n_points (int, optional): Defaults to config.json (400).

    Returns:
        dict[str, HeightSeries]: The sampled fixtures.
    """
    section = load_section("fixtures")
    t_max = t_max or section["t_max"]
    n_points = n_points or section["n_points"]
    grid = TimeGrid.uniform(t_max, n_points)

    a, b = 1.0, 2.0
    shift = math.exp(-2.0)

    def base(t):
        return torch.exp(-t) + shift * torch.exp(t)

    def base_prime(t):
        return -torch.exp(-t) + shift * torch.exp(t)

    def base_second(t):
        return torch.exp(-t) + shift * torch.exp(t)

    def exp_decay(t):
        return torch.exp(-t)

    def exp_decay_prime(t):
        return -torch.exp(-t)

    fixtures = {
        "exp_decay": _series(grid, exp_decay, exp_decay_prime, exp_decay),
        "stretched": _series(
            grid,
            stretch(base, a, b),
            _stretch_derivative(base_prime, a, b),
            _stretch_derivative(base_second, a, b),
        ),
        "stretched_exp_decay": _series(
            grid,
            stretch(exp_decay, a, b),
            _stretch_derivative(exp_decay_prime, a, b),
            _stretch_derivative(exp_decay, a, b),
        ),
        # Shifted so that h(0) > 0
        "quartic": _series(
            grid,
            lambda t: (t + 0.01) ** 4,
            lambda t: 4.0 * (t + 0.01) ** 3,
            lambda t: 12.0 * (t + 0.01) ** 2,
        ),
    }

    short_grid = TimeGrid.uniform(1.5, n_points)
    fixtures["exp_minus_one"] = _series(
        short_grid,
        lambda t: torch.exp(t + 0.5) - 1.0,
        lambda t: torch.exp(t + 0.5),
        lambda t: torch.exp(t + 0.5),
    )

    return fixtures
