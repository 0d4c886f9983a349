"""Convexity and monotonicity verdicts on sampled height functions.

Non-strict kinds (differential-logconvex, discrete-logconvex,
exponential-bound) hold when the worst slack is at least -tol. Strict kinds
(strict-decrease, slope-monotone, squared-convex) hold only when the worst
slack is positive.
"""

import math
import torch

from dataclasses import dataclass

from heightlab.config import load_section
from heightlab.dynamics.semigroup import HeightSeries
from heightlab.linalg import Tolerances
from heightlab.operators import HOLDS, VIOLATED

STRICT_KINDS = ("strict-decrease", "slope-monotone", "squared-convex")


@dataclass(frozen=True)
class ConvexityVerdict:
    """Verdict on one inequality over a sampled height function.

    Args:
        kind (str): The inequality checked.
        status (str): "holds" or "violated".
        margin (float): Worst slack over the checked points.
        tolerance (float): Threshold the margin was compared against.
        witness (float | tuple, optional): The time t, or the triple
            (r, s, t), attaining the margin. Present on violation.
    """

    kind: str
    status: str
    margin: float
    tolerance: float
    witness: float | tuple | None = None

    @property
    def holds(self):
        return self.status == HOLDS

    def to_dict(self):
        return {
            "kind": self.kind,
            "status": self.status,
            "margin": self.margin,
            "tolerance": self.tolerance,
            "witness": (
                list(self.witness)
                if isinstance(self.witness, tuple)
                else self.witness
            ),
        }


def _verdict(kind: str, margin: float, threshold: float, witness):
    if kind in STRICT_KINDS:
        holds = margin > 0.0
    else:
        holds = margin >= -threshold

    return ConvexityVerdict(
        kind=kind,
        status=HOLDS if holds else VIOLATED,
        margin=margin,
        tolerance=threshold,
        witness=None if holds else witness,
    )


def _argmin(values: torch.Tensor):
    idx = torch.argmin(values).item()
    return idx, values[idx].item()


def check_differential_logconvexity(
    series: HeightSeries, tol: Tolerances | None = None
) -> ConvexityVerdict:
    """Checks h h'' - h'^2 >= 0 at every grid point.

    The threshold scales with max(1, max |h h''|, max h'^2).
    """
    tol = tol or Tolerances.from_config()
    margins = series.margins()
    scale = max(
        1.0,
        (series.h * series.h_second).abs().max().item(),
        (series.h_prime**2).max().item(),
    )
    idx, margin = _argmin(margins)

    return _verdict(
        "differential-logconvex",
        margin,
        tol.threshold(scale),
        series.grid[idx],
    )


def _all_triples(n: int):
    return torch.combinations(torch.arange(n), r=3)


def _consecutive_triples(n: int):
    base = torch.arange(n - 2)
    return torch.stack([base, base + 1, base + 2], dim=1)


def _random_triples(n: int, count: int, seed: int):
    """Draws count sorted triples of distinct indices, deterministic in seed."""
    generator = torch.Generator().manual_seed(seed)
    draws = torch.randint(0, n, (2 * count + 16, 3), generator=generator)
    draws, _ = torch.sort(draws, dim=1)
    distinct = (draws[:, 0] < draws[:, 1]) & (draws[:, 1] < draws[:, 2])

    return draws[distinct][:count]


def _triples(n: int, n_random: int, exhaustive_max: int, seed: int):
    if n <= exhaustive_max:
        return _all_triples(n)

    return torch.cat(
        [_consecutive_triples(n), _random_triples(n, n_random, seed)]
    )


def check_discrete_logconvexity(
    series: HeightSeries,
    tol: Tolerances | None = None,
    n_random: int | None = None,
    exhaustive_max: int | None = None,
    seed: int | None = None,
) -> ConvexityVerdict:
    """Checks log h(s) <= interpolation of log h between r and t for grid
    triples r < s < t.

    Every triple is checked for grids of at most exhaustive_max points;
    longer grids use all consecutive triples plus n_random seeded random
    ones. The slack is measured in the log domain against tol.log_atol.
    """
    tol = tol or Tolerances.from_config()
    section = load_section("triples")
    if n_random is None:
        n_random = section["n_random"]
    if exhaustive_max is None:
        exhaustive_max = section["exhaustive_max"]
    if seed is None:
        seed = load_section("run")["seed"]

    times = series.grid.points
    log_h = series.log_h()
    triples = _triples(len(series.grid), n_random, exhaustive_max, seed)

    r, s, t = triples[:, 0], triples[:, 1], triples[:, 2]
    weight = (times[s] - times[r]) / (times[t] - times[r])
    interpolation = (1.0 - weight) * log_h[r] + weight * log_h[t]
    slack = interpolation - log_h[s]

    idx, margin = _argmin(slack)
    witness = tuple(times[triples[idx]].tolist())

    return _verdict("discrete-logconvex", margin, tol.log_atol, witness)


def check_monotonicity(series: HeightSeries, tol: Tolerances | None = None):
    """Checks strict decrease and strict convexity of h.

    Returns:
        tuple[ConvexityVerdict, ConvexityVerdict]: The "strict-decrease"
            verdict (h' < 0 at every grid point and every secant slope
            negative) and the "slope-monotone" verdict (S(r, s) < S(s, t) on
            consecutive triples, S the slope function).
    """
    times = series.grid.points
    dt = times[1:] - times[:-1]
    slopes = (series.h[1:] - series.h[:-1]) / dt

    idx_d, derivative_margin = _argmin(-series.h_prime)
    idx_s, secant_margin = _argmin(-slopes)
    if derivative_margin <= secant_margin:
        decrease_margin, idx = derivative_margin, idx_d
    else:
        decrease_margin, idx = secant_margin, idx_s
    decrease_witness = times[idx].item()
    decrease = _verdict(
        "strict-decrease", decrease_margin, 0.0, decrease_witness
    )

    slope_gaps = slopes[1:] - slopes[:-1]
    idx, slope_margin = _argmin(slope_gaps)
    witness = tuple(times[idx : idx + 3].tolist())
    monotone = _verdict("slope-monotone", slope_margin, 0.0, witness)

    return decrease, monotone


def check_squared_height_convexity(series: HeightSeries) -> ConvexityVerdict:
    """Checks (h^2)'' > 0 at every grid point. A strict kind, so there is no
    tolerance."""
    idx, margin = _argmin(series.h2_second)

    return _verdict("squared-convex", margin, 0.0, series.grid[idx])


def check_exponential_bound(
    series: HeightSeries, m: float, tol: Tolerances | None = None
) -> ConvexityVerdict:
    """Checks h(t) <= e^{-m t} h(0) at every grid point; with m = 0 this is
    the contraction estimate for accretive A."""
    tol = tol or Tolerances.from_config()
    h0 = series.h[0].item()
    bound = torch.exp(-m * series.grid.points) * h0
    idx, margin = _argmin(bound - series.h)

    return _verdict(
        "exponential-bound",
        margin,
        tol.threshold(max(h0, bound.max().item())),
        series.grid[idx],
    )


def reevaluate(series: HeightSeries, verdict: ConvexityVerdict, m: float = 0.0):
    """Recomputes the slack of verdict's inequality at its witness.

    Used to confirm that a violation is reproducible; m is only read for the
    exponential-bound kind.
    """
    assert verdict.witness is not None, "Verdict carries no witness"
    times = series.grid.points

    def at(t):
        return torch.argmin((times - t).abs()).item()

    if verdict.kind == "discrete-logconvex":
        r, s, t = (at(w) for w in verdict.witness)
        log_h = series.log_h()
        weight = (times[s] - times[r]) / (times[t] - times[r])
        value = (1.0 - weight) * log_h[r] + weight * log_h[t] - log_h[s]
        return value.item()
    elif verdict.kind == "slope-monotone":
        r, s, t = (at(w) for w in verdict.witness)
        h = series.h
        left = (h[s] - h[r]) / (times[s] - times[r])
        right = (h[t] - h[s]) / (times[t] - times[s])
        return (right - left).item()

    k = at(verdict.witness)
    if verdict.kind == "differential-logconvex":
        return series.margins()[k].item()
    elif verdict.kind == "strict-decrease":
        candidates = [-series.h_prime[k].item()]
        if k + 1 < len(series.grid):
            slope = (series.h[k + 1] - series.h[k]) / (times[k + 1] - times[k])
            candidates.append(-slope.item())
        return min(candidates)
    elif verdict.kind == "squared-convex":
        return series.h2_second[k].item()
    elif verdict.kind == "exponential-bound":
        bound = math.exp(-m * times[k].item()) * series.h[0].item()
        return bound - series.h[k].item()
    else:
        raise ValueError(f"Unknown verdict kind {verdict.kind}")
