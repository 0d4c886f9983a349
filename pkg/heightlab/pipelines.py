"""Command pipelines behind run.py: input resolution and the check, evolve,
range, norms and export commands. Each command returns a Report; writing it
out is left to the caller."""

import logging
import os
import re
import torch

from dataclasses import asdict, dataclass, field, replace

from heightlab.config import load_section
from heightlab.data.matrices import (
    load_matrix,
    load_vector,
    matrix_hash,
    save_matrix,
)
from heightlab.data.reports import (
    Report,
    save_snapshots,
    write_height_csv,
    write_norms_csv,
    write_range_csv,
)
from heightlab.dynamics import (
    GridSpec,
    TimeGrid,
    check_differential_logconvexity,
    check_discrete_logconvexity,
    check_exponential_bound,
    check_monotonicity,
    check_squared_height_convexity,
    h_prime_at_zero,
    height_series,
    operator_norm_series,
    propagators,
)
from heightlab.errors import DomainError
from heightlab.examples import (
    AdrParams,
    ShowexParams,
    advection_diffusion,
    contrast_matrix,
    random_family,
    showex_general,
    showex_matrix2,
    sine_profile,
)
from heightlab.linalg import (
    DTYPE,
    Tolerances,
    basis_vector,
    hermitian_eigen,
    hermitian_part,
    normalize,
    operator_norm,
    spectral_abscissa,
)
from heightlab.operators import (
    CriterionConfig,
    brute_force_criterion_min,
    check_accretive_square,
    check_accretivity,
    check_cohyponormal,
    check_hyponormal,
    check_logconvex_criterion,
    check_semiangle,
    criterion_value,
    lower_bound_m,
    numerical_range_boundary,
)

logger = logging.getLogger(__name__)

EXAMPLE_NAMES = ("showex2", "showex", "adr", "contrast", "random")


@dataclass
class RunConfig:
    """Effective settings of one command.

    Args:
        command (str): Command name.
        seed (int): Seed for every random draw.
        tolerances (Tolerances): Shared tolerance record.
        t_max (float, optional): End of the time grid; None selects
            t_scale / max(m(A), m_floor).
        grid (GridSpec): Grid layout; n_points must be at least 3.
        n_angles (int): Angles of the numerical range sweep.
        csv_path (str, optional): Series CSV destination.
        snapshots_path (str, optional): Trajectory snapshot destination.
        timestamp (bool): Stamp the report with the creation time.
        criterion (CriterionConfig): Optimizer settings, from config.json.
        triples (dict): n_random and exhaustive_max of the discrete
            log-convexity check, from config.json.
        derivative_steps (list[float]): Richardson steps for h'(0) and E'(0),
            from config.json.
    """

    command: str
    seed: int
    tolerances: Tolerances
    grid: GridSpec
    t_max: float | None = None
    n_angles: int = 64
    csv_path: str | None = None
    snapshots_path: str | None = None
    timestamp: bool = True
    criterion: CriterionConfig = field(init=False)
    triples: dict = field(init=False)
    derivative_steps: list = field(init=False)

    def __post_init__(self):
        if self.t_max is not None and not self.t_max > 0.0:
            raise DomainError(f"t_max must be positive, got {self.t_max}")
        if self.grid.n_points < 3:
            raise DomainError(
                f"n_points must be at least 3, got {self.grid.n_points}"
            )
        if self.n_angles < 4:
            raise DomainError(
                f"n_angles must be at least 4, got {self.n_angles}"
            )
        self.criterion = CriterionConfig.from_config(seed=self.seed)
        self.triples = dict(load_section("triples"))
        self.derivative_steps = list(load_section("derivative_limits")["steps"])

    @classmethod
    def from_config(
        cls,
        command: str,
        seed: int | None = None,
        t_max: float | None = None,
        n_points: int | None = None,
        n_angles: int | None = None,
        csv_path: str | None = None,
        snapshots_path: str | None = None,
        timestamp: bool = True,
    ):
        """Fills every unset value from config.json."""
        grid = GridSpec.from_config()
        if n_points is not None:
            grid = replace(grid, n_points=n_points)

        return cls(
            command=command,
            seed=seed if seed is not None else load_section("run")["seed"],
            tolerances=Tolerances.from_config(),
            grid=grid,
            t_max=t_max,
            n_angles=n_angles or load_section("range")["n_angles"],
            csv_path=csv_path,
            snapshots_path=snapshots_path,
            timestamp=timestamp,
        )

    def to_dict(self):
        return {
            "command": self.command,
            "seed": self.seed,
            "tolerances": self.tolerances.to_dict(),
            "grid": asdict(self.grid),
            "t_max": self.t_max,
            "n_angles": self.n_angles,
            "criterion": self.criterion.to_dict(),
            "triples": self.triples,
            "derivative_limits": {"steps": self.derivative_steps},
            "linalg": load_section("linalg"),
        }


@dataclass(frozen=True)
class ResolvedInput:
    """A matrix together with the descriptor echoed into reports."""

    A: torch.Tensor
    descriptor: dict
    adr: AdrParams | None = None


def resolve_input(
    example: str | None = None,
    matrix_path: str | None = None,
    params: dict | None = None,
) -> ResolvedInput:
    """Builds the input matrix from a named example or a matrix file.

    Args:
        example (str, optional): One of EXAMPLE_NAMES.
        matrix_path (str, optional): Path to a matrix JSON file.
        params (dict, optional): Generator parameters; unset (None) values
            take the generator defaults.

    Returns:
        ResolvedInput: Matrix and descriptor.
    """
    if (example is None) == (matrix_path is None):
        raise DomainError(
            "Exactly one of an example or a matrix file is needed"
        )

    params = {k: v for k, v in (params or {}).items() if v is not None}
    adr = None

    if matrix_path is not None:
        A = load_matrix(matrix_path)
        descriptor = {"source": "file", "path": os.path.basename(matrix_path)}
    elif example == "showex2":
        lam = params.get("lambda", 1.0)
        delta = params.get("delta", 0.5)
        A = showex_matrix2(lam, delta)
        descriptor = {"lambda": lam, "delta": delta}
    elif example == "showex":
        p = ShowexParams(
            lambda1=params.get("lambda1", 1.0),
            lambda2=params.get("lambda2", 4.0),
            delta=params.get("delta", 0.5),
            dim=params.get("dim", 2),
        )
        A = showex_general(p)
        descriptor = p.to_dict()
    elif example == "adr":
        adr = AdrParams(
            alpha=params.get("alpha", 0.0),
            beta=params.get("beta", 1.0),
            n=params.get("n", 64),
        )
        inner_product = params.get("inner_product", "trapezoidal")
        A = advection_diffusion(adr, inner_product=inner_product)
        descriptor = {**adr.to_dict(), "inner_product": inner_product}
    elif example == "contrast":
        A = contrast_matrix()
        descriptor = {}
    elif example == "random":
        kind = params.get("kind", "strictly-accretive")
        n = params.get("n", 4)
        seed = params.get("seed", load_section("run")["seed"])
        A = random_family(kind, n, seed)
        descriptor = {"kind": kind, "n": n, "seed": seed}
    else:
        raise DomainError(f"Unknown example {example}")

    if example is not None:
        descriptor = {
            "source": "example",
            "generator": example,
            "params": descriptor,
        }
    descriptor["n"] = A.shape[0]
    descriptor["matrix_hash"] = matrix_hash(A)

    return ResolvedInput(A=A, descriptor=descriptor, adr=adr)


def resolve_u0(spec: str, resolved: ResolvedInput, config: RunConfig):
    """Builds u0 from a spec: "e<k>" (1-indexed basis vector), "ones",
    "random", "sin" (advection-diffusion inputs only), "witness" (the
    criterion minimizer) or a path to a vector JSON file."""
    A = resolved.A
    n = A.shape[0]

    match = re.fullmatch(r"e(\d+)", spec)
    if match is not None:
        k = int(match.group(1))
        if not 1 <= k <= n:
            raise DomainError(f"Basis vector {spec} out of range for n = {n}")
        return basis_vector(n, k - 1)
    elif spec == "ones":
        return torch.ones(n, dtype=DTYPE)
    elif spec == "random":
        generator = torch.Generator().manual_seed(config.seed)
        return normalize(torch.randn(n, dtype=DTYPE, generator=generator))
    elif spec == "sin":
        if resolved.adr is None:
            raise DomainError("u0 'sin' needs the adr example")
        inner_product = resolved.descriptor["params"]["inner_product"]
        return sine_profile(resolved.adr, inner_product=inner_product)
    elif spec == "witness":
        report = check_logconvex_criterion(
            A, config=config.criterion, tol=config.tolerances
        )
        return report.witness
    elif os.path.isfile(spec):
        return load_vector(spec, n)
    else:
        raise DomainError(f"Unrecognized u0 spec {spec}")


def _new_report(command: str, resolved: ResolvedInput, config: RunConfig):
    report = Report(
        command=command, input=resolved.descriptor, config=config.to_dict()
    )
    if config.timestamp:
        report.stamp()

    return report


def cmd_check(resolved: ResolvedInput, config: RunConfig) -> Report:
    """Runs every algebraic property check on the input matrix."""
    A = resolved.A
    tol = config.tolerances
    report = _new_report("check", resolved, config)

    accretive, positive = check_accretivity(A, tol)
    hyponormal = check_hyponormal(A, tol)
    criterion = check_logconvex_criterion(A, config=config.criterion, tol=tol)
    sampled = brute_force_criterion_min(
        A, n_samples=config.criterion.brute_force_samples, seed=config.seed
    )
    if sampled.value < criterion.extremal_value - criterion.tolerance:
        logger.warning(
            f"Sampling found g = {sampled.value:.6e} below the descent minimum "
            f"{criterion.extremal_value:.6e}"
        )
    report.properties = [
        accretive,
        positive,
        hyponormal,
        check_cohyponormal(A, tol),
        check_accretive_square(A, tol),
        check_semiangle(A, tol),
        criterion,
    ]
    report.summary = {
        "m": accretive.extremal_value,
        "m_square": hermitian_eigen(hermitian_part(A @ A)).min,
        "lambda_min_commutator": hyponormal.extremal_value,
        "criterion_min": criterion.extremal_value,
        "criterion_min_sampled": sampled.value,
        "spectral_abscissa": spectral_abscissa(A),
    }
    logger.info(
        f"check: m = {accretive.extremal_value:.6e}, "
        f"criterion min = {criterion.extremal_value:.6e}"
    )

    return report


def _grid_for(A: torch.Tensor, config: RunConfig):
    return TimeGrid.default_for(A, spec=config.grid, t_max=config.t_max)


def _step_stiffness(A: torch.Tensor, config: RunConfig):
    """Returns max(steps) * |A|. Above 1 the largest Richardson step does not
    resolve the fastest time scale of A and the extrapolated derivative at
    t = 0 is unreliable."""
    stiffness = max(config.derivative_steps) * operator_norm(A)
    if stiffness > 1.0:
        logger.warning(
            f"Derivative steps are coarse for this matrix "
            f"(max step * |A| = {stiffness:.3e}); the limit at t = 0 is "
            "unreliable"
        )

    return stiffness


def cmd_evolve(
    resolved: ResolvedInput, u0_spec: str, config: RunConfig
) -> Report:
    """Evolves u0, renders the dynamics verdicts and writes the height CSV."""
    A = resolved.A
    tol = config.tolerances
    report = _new_report("evolve", resolved, config)
    report.input = {**report.input, "u0": u0_spec}

    u0 = resolve_u0(u0_spec, resolved, config)
    grid = _grid_for(A, config)
    series = height_series(
        A, u0, grid, keep_snapshots=config.snapshots_path is not None
    )
    m = lower_bound_m(A)

    decrease, monotone = check_monotonicity(series, tol)
    report.verdicts = [
        check_differential_logconvexity(series, tol),
        check_discrete_logconvexity(
            series,
            tol,
            n_random=config.triples["n_random"],
            exhaustive_max=config.triples["exhaustive_max"],
            seed=config.seed,
        ),
        decrease,
        monotone,
        check_squared_height_convexity(series),
        check_exponential_bound(series, m, tol),
    ]

    analytic, numeric = h_prime_at_zero(A, u0, steps=config.derivative_steps)
    stiffness = _step_stiffness(A, config)
    report.summary = {
        "m": m,
        "h0": series.h[0].item(),
        "h_prime_zero_analytic": analytic,
        "h_prime_zero_numeric": numeric,
        "derivative_step_stiffness": stiffness,
        "derivative_limit_reliable": stiffness <= 1.0,
        "criterion_at_u0": criterion_value(A, u0),
        "min_margin": series.margins().min().item(),
        "t_max": grid.t_max,
        "n_points": len(grid),
        "max_norm_check_deviation": (series.h - series.u_norm_check)
        .abs()
        .max()
        .item(),
    }

    if config.csv_path is not None:
        write_height_csv(series, config.csv_path)
    if config.snapshots_path is not None:
        save_snapshots(series, config.snapshots_path)

    return report


def cmd_range(resolved: ResolvedInput, config: RunConfig) -> Report:
    """Samples the boundary of the numerical range and writes it as CSV."""
    A = resolved.A
    report = _new_report("range", resolved, config)
    boundary = numerical_range_boundary(A, config.n_angles, config.tolerances)

    report.summary = {
        "m": boundary.m,
        "min_real": boundary.min_real(),
        "semiangle": boundary.semiangle() if boundary.m > 0.0 else None,
        "n_angles": len(boundary.angles),
    }
    if config.csv_path is not None:
        write_range_csv(boundary, config.csv_path)

    return report


def cmd_norms(
    resolved: ResolvedInput, config: RunConfig, u0_spec: str | None = None
) -> Report:
    """Computes E(t) = |e^{-tA}| (and h(t) for u0, if given); writes CSV."""
    A = resolved.A
    report = _new_report("norms", resolved, config)
    grid = _grid_for(A, config)
    props = propagators(A, grid)
    norms = operator_norm_series(
        A, grid, steps=config.derivative_steps, props=props
    )

    series = None
    if u0_spec is not None:
        report.input = {**report.input, "u0": u0_spec}
        u0 = resolve_u0(u0_spec, resolved, config)
        series = height_series(A, u0, grid, props=props)

    m = lower_bound_m(A)
    stiffness = _step_stiffness(A, config)
    report.summary = {
        "m": m,
        "minus_m": -m,
        "E0": norms.E[0].item(),
        "E_prime_zero_estimate": norms.E_prime_zero_estimate,
        "derivative_step_stiffness": stiffness,
        "derivative_limit_reliable": stiffness <= 1.0,
        "spectral_abscissa": norms.spectral_abscissa,
        "peak": norms.peak,
        "rate_estimate": norms.rate_estimate,
        "t_max": grid.t_max,
    }
    if config.csv_path is not None:
        write_norms_csv(norms, config.csv_path, series)

    return report


def cmd_export(resolved: ResolvedInput, save_path: str, config: RunConfig):
    """Writes the input matrix as matrix JSON."""
    report = _new_report("export", resolved, config)
    save_matrix(resolved.A, save_path)
    report.summary = {"path": os.path.basename(save_path)}

    return report
