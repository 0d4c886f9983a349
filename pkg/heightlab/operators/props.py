"""Algebraic properties of a matrix A: Cartesian decomposition, numerical range,
accretivity, hyponormality, accretive square and semiangle.

Every checker returns a PropertyReport. A violated report always carries a
witness vector x at which the defining Hermitian quadratic form evaluates to
the reported extremal value (see evaluate_at).
"""

import cmath
import logging
import math
import torch

from dataclasses import dataclass, field

from heightlab.linalg import (
    Tolerances,
    adjoint,
    frobenius,
    hermitian_eigen,
    hermitian_part,
    inner,
    normalize,
    skew_part,
)

logger = logging.getLogger(__name__)

HOLDS = "holds"
VIOLATED = "violated"

PROPERTY_TAGS = (
    "accretive",
    "positively-accretive",
    "hyponormal",
    "co-hyponormal",
    "accretive-square",
    "semiangle",
    "log-convexity-criterion",
)


@dataclass(frozen=True)
class CartesianPair:
    """Hermitian parts X, Y with A = X + iY."""

    X: torch.Tensor
    Y: torch.Tensor

    def reconstruct(self):
        return self.X + 1j * self.Y


@dataclass(frozen=True)
class PropertyReport:
    """Verdict record for one algebraic property.

    Args:
        property (str): One of PROPERTY_TAGS.
        status (str): "holds" or "violated".
        extremal_value (float): The decisive infimum/minimum.
        tolerance (float): Threshold the verdict was taken against.
        method (dict): Descriptor of how extremal_value was obtained.
        witness (torch.Tensor, optional): Unit vector attaining (or
            approximating) extremal_value.
    """

    property: str
    status: str
    extremal_value: float
    tolerance: float
    method: dict = field(default_factory=dict)
    witness: torch.Tensor | None = None

    @property
    def holds(self):
        return self.status == HOLDS

    @property
    def violated(self):
        return self.status == VIOLATED

    def to_dict(self):
        witness = None
        if self.witness is not None:
            witness = [[z.real, z.imag] for z in self.witness.tolist()]

        return {
            "property": self.property,
            "status": self.status,
            "extremal_value": self.extremal_value,
            "tolerance": self.tolerance,
            "method": self.method,
            "witness": witness,
        }


@dataclass(frozen=True)
class RangeBoundary:
    """Sampled boundary of the numerical range nu(A).

    Args:
        angles (list[float]): Rotation angles theta (radians).
        support_values (list[float]): max Re(e^{i theta} <Ax, x>) per angle.
        boundary_points (list[complex]): <A x_theta, x_theta> per angle.
        m (float): The lower bound m(A) = inf Re nu(A).
    """

    angles: list
    support_values: list
    boundary_points: list
    m: float

    def min_real(self):
        return min(z.real for z in self.boundary_points)

    def semiangle(self):
        """Largest |arg z| over the sampled boundary points."""
        return max(abs(cmath.phase(z)) for z in self.boundary_points)


def cartesian_parts(A: torch.Tensor) -> CartesianPair:
    """Returns X = (A + A^H)/2 and Y = (A - A^H)/2i."""
    return CartesianPair(X=hermitian_part(A), Y=skew_part(A))


def commutator(A: torch.Tensor):
    """Returns the self-commutator [A^H, A] = A^H A - A A^H."""
    return adjoint(A) @ A - A @ adjoint(A)


def lower_bound_m(A: torch.Tensor):
    """Returns m(A) = inf Re nu(A), the smallest eigenvalue of the Hermitian
    part of A."""
    return hermitian_eigen(hermitian_part(A)).min


def evaluate_at(A: torch.Tensor, property: str, x: torch.Tensor):
    """Evaluates the quadratic form defining property at the unit vector x/|x|.

    This is the quantity whose extremum a PropertyReport records, so a witness
    can be re-checked independently of the eigensolver.
    """
    x = normalize(x)
    if property in {"accretive", "positively-accretive"}:
        return inner(A @ x, x).real.item()
    elif property == "hyponormal":
        return inner(commutator(A) @ x, x).real.item()
    elif property == "co-hyponormal":
        return -inner(commutator(A) @ x, x).real.item()
    elif property == "accretive-square":
        return inner(A @ (A @ x), x).real.item()
    elif property == "semiangle":
        pair = cartesian_parts(A)
        lower = inner((pair.X - pair.Y) @ x, x).real.item()
        upper = inner((pair.X + pair.Y) @ x, x).real.item()
        return min(lower, upper)
    elif property == "log-convexity-criterion":
        from heightlab.operators.criterion import criterion_value

        return criterion_value(A, x)
    else:
        raise ValueError(f"Unknown property {property}")


def _report(
    property: str,
    value: float,
    threshold: float,
    witness: torch.Tensor,
    method: dict,
):
    assert property in PROPERTY_TAGS, f"Unknown property {property}"
    status = HOLDS if value >= -threshold else VIOLATED

    return PropertyReport(
        property=property,
        status=status,
        extremal_value=value,
        tolerance=threshold,
        method=method,
        witness=witness if status == VIOLATED else None,
    )


def numerical_range_boundary(
    A: torch.Tensor,
    n_angles: int = 64,
    tol: Tolerances | None = None,
) -> RangeBoundary:
    """Samples the boundary of nu(A) = {<Ax, x> : |x| = 1} by an angle sweep.

    For each theta on a uniform grid the top eigenvector x_theta of the
    Hermitian part of e^{i theta} A supports nu(A); <A x_theta, x_theta> is the
    corresponding boundary point.

    Args:
        A (torch.Tensor): Square matrix.
        n_angles (int, optional): Number of angles, at least 4. Defaults to 64.
        tol (Tolerances, optional): Used for the m(A) cross-check.

    Returns:
        RangeBoundary: Sampled support function and boundary.
    """
    assert n_angles >= 4, "n_angles must be at least 4"
    tol = tol or Tolerances.from_config()

    angles = [2.0 * math.pi * k / n_angles for k in range(n_angles)]
    support_values = []
    boundary_points = []
    for theta in angles:
        rotated = hermitian_part(cmath.exp(1j * theta) * A)
        eigen = hermitian_eigen(rotated)
        x = eigen.vector(-1)
        support_values.append(eigen.max)
        boundary_points.append(inner(A @ x, x).item())

    # theta = pi supports nu(A) from the left; odd sweeps miss it
    if n_angles % 2 == 0:
        m_sweep = -support_values[n_angles // 2]
    else:
        m_sweep = -hermitian_eigen(hermitian_part(-A)).max

    m = lower_bound_m(A)
    if abs(m_sweep - m) > tol.threshold(frobenius(A)):
        logger.warning(
            f"Angle sweep gives m = {m_sweep:.6e}, eigensolver gives "
            f"m = {m:.6e}"
        )

    return RangeBoundary(
        angles=angles,
        support_values=support_values,
        boundary_points=boundary_points,
        m=m,
    )


def check_accretivity(A: torch.Tensor, tol: Tolerances | None = None):
    """Checks both accretivity grades of A.

    For matrices nu(A) is compact, so nu(A) in the open right half-plane is
    equivalent to m(A) > 0; the positive grade is decided by m(A) > tol.

    Returns:
        tuple[PropertyReport, PropertyReport]: The "accretive" (m(A) >= -tol)
            and "positively-accretive" (m(A) > tol) reports.
    """
    tol = tol or Tolerances.from_config()
    threshold = tol.threshold(frobenius(A))
    eigen = hermitian_eigen(hermitian_part(A))
    m = eigen.min
    witness = eigen.vector(0)
    method = {"name": "hermitian-eigen", "form": "X"}

    accretive = _report("accretive", m, threshold, witness, method)
    positive = PropertyReport(
        property="positively-accretive",
        status=HOLDS if m > threshold else VIOLATED,
        extremal_value=m,
        tolerance=threshold,
        method=method,
        witness=None if m > threshold else witness,
    )

    return accretive, positive


def check_hyponormal(A: torch.Tensor, tol: Tolerances | None = None):
    """Checks [A^H, A] >= 0; extremal value is lambda_min([A^H, A])."""
    tol = tol or Tolerances.from_config()
    eigen = hermitian_eigen(commutator(A))

    return _report(
        "hyponormal",
        eigen.min,
        tol.threshold(frobenius(A) ** 2),
        eigen.vector(0),
        {"name": "hermitian-eigen", "form": "[A^H, A]"},
    )


def check_cohyponormal(A: torch.Tensor, tol: Tolerances | None = None):
    """Checks that A^H is hyponormal, i.e. [A^H, A] <= 0; extremal value is
    -lambda_max([A^H, A])."""
    tol = tol or Tolerances.from_config()
    eigen = hermitian_eigen(commutator(A))

    return _report(
        "co-hyponormal",
        -eigen.max,
        tol.threshold(frobenius(A) ** 2),
        eigen.vector(-1),
        {"name": "hermitian-eigen", "form": "-[A^H, A]"},
    )


def check_accretive_square(A: torch.Tensor, tol: Tolerances | None = None):
    """Checks m(A^2) >= 0, i.e. nu(A^2) in the closed right half-plane."""
    tol = tol or Tolerances.from_config()
    eigen = hermitian_eigen(hermitian_part(A @ A))

    return _report(
        "accretive-square",
        eigen.min,
        tol.threshold(frobenius(A) ** 2),
        eigen.vector(0),
        {"name": "hermitian-eigen", "form": "Re A^2"},
    )


def check_semiangle(A: torch.Tensor, tol: Tolerances | None = None):
    """Checks that nu(A) lies in the closed sector |arg z| <= pi/4, i.e.
    -X <= Y <= X."""
    tol = tol or Tolerances.from_config()
    pair = cartesian_parts(A)
    lower = hermitian_eigen(pair.X - pair.Y)
    upper = hermitian_eigen(pair.X + pair.Y)
    if lower.min <= upper.min:
        value, witness, form = lower.min, lower.vector(0), "X - Y"
    else:
        value, witness, form = upper.min, upper.vector(0), "X + Y"

    return _report(
        "semiangle",
        value,
        tol.threshold(frobenius(A)),
        witness,
        {
            "name": "hermitian-eigen",
            "form": form,
            "lambda_min_x_minus_y": lower.min,
            "lambda_min_x_plus_y": upper.min,
        },
    )
