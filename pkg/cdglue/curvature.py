"""
Curvature of weighted manifolds.

Bakry-Emery N-Ricci tensor, sampled Ricci lower bounds, boundary geometry
(inward normal, second fundamental form, weighted mean curvature) and the
concavity criteria for the weight.
"""
import logging
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np

from cdglue.chart import (
    MetricChart,
    MetricJet,
    MetricSource,
    TensorValue,
    check_positive_definite,
    connection,
    curvature_from_jet,
    hessian_from_jet,
    max_generalized_eig,
    min_generalized_eig,
)
from cdglue.config import get_settings
from cdglue.errors import DegenerateMetricError, WeightError
from cdglue.expression import ScalarField
from cdglue.jet import Jet
from cdglue.sweep import SweepResult, axis_samples, interior_grid, parallel_map, reduce_maximum, reduce_minimum

logger = logging.getLogger(__name__)

WEIGHT_FLOOR = 1e-12
FACE_ROLES = ("glue", "free", "zero-set")


@dataclass(frozen=True)
class Face:
    """A boundary face ``x[axis] = domain[axis][0 or 1]`` (axis is 0-based)."""
    axis: int
    side: str  # 'min' or 'max'
    role: str  # 'glue', 'free' or 'zero-set'

    def __post_init__(self):
        if self.side not in ("min", "max"):
            raise ValueError(f"Face side must be 'min' or 'max', got {self.side!r}")
        if self.role not in FACE_ROLES:
            raise ValueError(f"Face role must be one of {FACE_ROLES}, got {self.role!r}")

    def coordinate(self, domain) -> float:
        return domain[self.axis][0 if self.side == "min" else 1]


@dataclass(frozen=True)
class WeightedManifold:
    """A metric chart with weight Phi, synthetic dimension N and tagged faces."""
    chart: MetricChart
    weight: ScalarField
    N: float
    faces: Tuple[Face, ...] = ()

    def __post_init__(self):
        n = self.chart.dim
        object.__setattr__(self, "faces", tuple(self.faces))
        if self.weight.arity != n:
            raise WeightError(f"Weight arity {self.weight.arity} does not match chart dimension {n}")
        if self.N < n:
            raise WeightError(f"N = {self.N} is smaller than the dimension {n}")
        glue = [f for f in self.faces if f.role == "glue"]
        if len(glue) > 1:
            raise WeightError(f"At most one glue face allowed, got {len(glue)}")
        if glue:
            face = glue[0]
            if face.axis != n - 1 or face.side != "min" or self.chart.domain[n - 1][0] != 0.0:
                raise WeightError("The glue face must be x^n = 0 with the chart a collar x^n in [0, depth]")
        self._validate_weight()

    def _validate_weight(self, resolution: int = 9) -> None:
        axes = [axis_samples(lo, hi, resolution, margin=False) for lo, hi in self.chart.domain]
        points = np.stack([m.ravel() for m in np.meshgrid(*axes, indexing="ij")], axis=1)
        values = self.weight.values(points)
        if np.any(values < -WEIGHT_FLOOR):
            bad = points[int(np.argmin(values))]
            raise WeightError(f"Weight is negative at {tuple(bad)}")
        glue = self.glue_face
        if glue is not None:
            on_face = points[np.isclose(points[:, glue.axis], glue.coordinate(self.chart.domain))]
            if np.any(self.weight.values(on_face) <= WEIGHT_FLOOR):
                raise WeightError("Weight must be positive on the glue face")

    @property
    def dim(self) -> int:
        return self.chart.dim

    @property
    def glue_face(self) -> Optional[Face]:
        return next((f for f in self.faces if f.role == "glue"), None)

    @property
    def zero_set_faces(self) -> List[Face]:
        return [f for f in self.faces if f.role == "zero-set"]

    @property
    def depth(self) -> float:
        return self.chart.domain[-1][1]


# --- Bakry-Emery tensor -----------------------------------------------------

@dataclass(frozen=True)
class BakryEmeryValue:
    """
    Value of the N-Ricci tensor at a point.

    ``minus_infinity`` marks N < n.  For N = n the tensor is Ric - Hess log Phi
    and ``degenerate_covector`` (d log Phi) lists the directions where the
    tensor is -infinity.
    """
    tensor: Optional[TensorValue]
    metric: np.ndarray
    minus_infinity: bool = False
    degenerate_covector: Optional[np.ndarray] = None

    def lower_bound(self, tolerance: float = 1e-10) -> float:
        """Smallest eigenvalue against g (-inf where the tensor is -inf)."""
        if self.minus_infinity:
            return -np.inf
        if self.degenerate_covector is not None:
            ginv = np.linalg.inv(self.metric)
            if float(self.degenerate_covector @ ginv @ self.degenerate_covector) > tolerance ** 2:
                return -np.inf
        return min_generalized_eig(self.tensor, self.metric)


def bakry_emery_from_jets(mj: MetricJet, weight: Jet, N: float) -> BakryEmeryValue:
    """Bakry-Emery N-Ricci tensor from a metric jet and a weight jet (order 2)."""
    n = mj.dim
    point = mj.point
    if N < n:
        return BakryEmeryValue(None, mj.g, minus_infinity=True)
    phi = float(weight.value[0])
    if phi <= 0:
        raise WeightError(f"Weight must be positive for the N-Ricci tensor, got {phi:.3g} at {point}")
    _, ricci, _ = curvature_from_jet(mj)
    conn = connection(mj)
    if N == n:
        hess_log = hessian_from_jet(conn, weight.log())
        return BakryEmeryValue(TensorValue("bilinear", ricci - hess_log, point), mj.g,
                               degenerate_covector=weight.first[0] / phi)
    f = weight.power(1.0 / (N - n))
    tensor = ricci - (N - n) * hessian_from_jet(conn, f) / float(f.value[0])
    return BakryEmeryValue(TensorValue("bilinear", 0.5 * (tensor + tensor.T), point), mj.g)


def bakry_emery(wm: WeightedManifold, point: Sequence[float]) -> BakryEmeryValue:
    """Ric - (N-n) Hess(Phi^(1/(N-n))) / Phi^(1/(N-n)) at ``point``."""
    return bakry_emery_from_jets(wm.chart.metric_jet(point, 2), wm.weight.jet(point, 2), wm.N)


def _bound_at(metric: MetricSource, weight, N: float, point: Sequence[float]) -> Optional[float]:
    weight_jet = weight.jet(point, 2)
    if float(weight_jet.value[0]) < WEIGHT_FLOOR:
        return None
    return bakry_emery_from_jets(metric.metric_jet(point, 2), weight_jet, N).lower_bound()


def ricci_bound_sweep(wm: WeightedManifold, resolution: Optional[int] = None) -> SweepResult:
    """Minimum over the interior grid of lambda_min(Ric^{Phi,N}) against g."""
    points = interior_grid(wm.chart.domain, resolution)
    values = parallel_map(lambda p: _bound_at(wm.chart, wm.weight, wm.N, p), list(points))
    result = reduce_minimum(points, values)
    if result.skipped:
        logger.warning("Skipped %d grid points where the weight vanishes", len(result.skipped))
    if result.index is None:
        raise WeightError("No grid point with positive weight; the sweep is empty")
    return result


def positivity_check(wm: WeightedManifold, resolution: Optional[int] = None) -> List[Tuple[float, ...]]:
    """Interior grid points where the weight vanishes (excluded by the theory)."""
    points = interior_grid(wm.chart.domain, resolution)
    values = wm.weight.values(points)
    return [tuple(float(x) for x in p) for p in points[values < WEIGHT_FLOOR]]


# --- boundary geometry --------------------------------------------------------

@dataclass(frozen=True)
class BoundaryGeometry:
    point: Tuple[float, ...]
    normal: np.ndarray          # inward unit normal (vector components)
    tangent_axes: Tuple[int, ...]
    induced: np.ndarray         # g restricted to the face
    sff: np.ndarray             # Pi(e_a, e_b) = g(nu, nabla_{e_a} e_b)
    trace: float
    weighted_mean_curvature: float  # tr Pi - g(nu, grad log Phi)
    normal_log_derivative: float    # g(nu, grad log Phi)

    @property
    def sff_min_eigenvalue(self) -> float:
        return min_generalized_eig(self.sff, self.induced) if self.sff.size else np.inf


def _resolve_face(wm: WeightedManifold, face: Union[Face, int]) -> Face:
    if isinstance(face, int):
        return wm.faces[face]
    if face not in wm.faces:
        raise ValueError(f"{face} is not a declared face of this manifold")
    return face


def boundary_geometry_from_jets(mj: MetricJet, weight: Jet, face: Face) -> BoundaryGeometry:
    n = mj.dim
    k = face.axis
    sign = 1.0 if face.side == "min" else -1.0
    conn = connection(mj)
    ginv = conn.ginv
    normal = sign * ginv[k] / np.sqrt(ginv[k, k])
    tangent = tuple(a for a in range(n) if a != k)
    induced = mj.g[np.ix_(tangent, tangent)]
    if tangent:
        try:
            check_positive_definite(induced, mj.point)
        except DegenerateMetricError as e:
            raise DegenerateMetricError(f"Induced metric on face degenerate: {e}")
    sff = sign * conn.gamma[k][np.ix_(tangent, tangent)] / np.sqrt(ginv[k, k])
    sff = 0.5 * (sff + sff.T)
    trace = float(np.trace(np.linalg.solve(induced, sff))) if tangent else 0.0
    phi = float(weight.value[0])
    log_derivative = float(normal @ weight.first[0] / phi) if phi > 0 else np.nan
    return BoundaryGeometry(tuple(mj.point), normal, tangent, induced, sff, trace,
                            trace - log_derivative, log_derivative)


def boundary_geometry(wm: WeightedManifold, face: Union[Face, int], face_point: Sequence[float]) -> BoundaryGeometry:
    """
    Inward normal, second fundamental form and weighted mean curvature.

    The convention is Pi(X, Y) = g(nu, nabla_X Y) with nu the inward unit
    normal, so the unit circle bounding the flat disk has Pi = +g.
    """
    face = _resolve_face(wm, face)
    point = list(face_point)
    point[face.axis] = face.coordinate(wm.chart.domain)
    return boundary_geometry_from_jets(wm.chart.metric_jet(point, 1), wm.weight.jet(point, 1), face)


# --- concavity criteria -------------------------------------------------------

@dataclass
class ConcavityReport:
    """Max eigenvalue of Hess f + theta f g over the interior grid."""
    max_eigenvalue: float
    point: Optional[Tuple[float, ...]]
    theta: float
    passed: bool
    skipped: int = 0

    def to_dict(self) -> dict:
        return {
            'max_eigenvalue': self.max_eigenvalue,
            'point': list(self.point) if self.point else None,
            'theta': self.theta,
            'passed': self.passed,
            'skipped': self.skipped,
        }


def warping_jet(weight: Jet, N: float, n: int) -> Jet:
    """f = Phi^(1/(N-n)) as a jet."""
    return weight.power(1.0 / (N - n))


def concavity_sweep(wm: WeightedManifold, theta: float, resolution: Optional[int] = None,
                    warping: Optional[ScalarField] = None) -> SweepResult:
    """Max over the interior grid of lambda_max(Hess f + theta f g)."""
    n = wm.dim
    points = interior_grid(wm.chart.domain, resolution)

    def evaluate(point):
        if warping is not None:
            f = warping.jet(point, 2)
        else:
            weight = wm.weight.jet(point, 2)
            if float(weight.value[0]) < WEIGHT_FLOOR:
                return None
            f = warping_jet(weight, wm.N, n)
        mj = wm.chart.metric_jet(point, 1)
        form = hessian_from_jet(connection(mj), f) + theta * float(f.value[0]) * mj.g
        return max_generalized_eig(form, mj.g)

    return reduce_maximum(points, parallel_map(evaluate, list(points)))


def weight_concavity_check(wm: WeightedManifold, kappa_bar: float, eta: float,
                           resolution: Optional[int] = None) -> ConcavityReport:
    """Checks Hess f + theta f g <= 0 with theta = min(-kappa_bar, eta)."""
    if wm.N == wm.dim:
        raise WeightError("Weight concavity is undefined for N = n")
    theta = min(-kappa_bar, eta)
    result = concavity_sweep(wm, theta, resolution)
    passed = result.value <= get_settings().tolerance
    return ConcavityReport(result.value, result.point, theta, passed, len(result.skipped))


@dataclass
class AlbiReport:
    bound_violation: float      # max of k f^2 - L
    gradient_violation: float   # max of |grad f|^2 + k f^2 - L^exponent
    bound_point: Optional[Tuple[float, ...]]
    gradient_point: Optional[Tuple[float, ...]]
    exponent: int
    passed: bool

    def to_dict(self) -> dict:
        return {
            'bound_violation': self.bound_violation,
            'gradient_violation': self.gradient_violation,
            'bound_point': list(self.bound_point) if self.bound_point else None,
            'gradient_point': list(self.gradient_point) if self.gradient_point else None,
            'exponent': self.exponent,
            'passed': self.passed,
        }


def albi_check(wm: WeightedManifold, k: float, L: float, resolution: Optional[int] = None,
               exponent: Optional[int] = None) -> AlbiReport:
    """Checks L >= k f^2 and |grad f|^2 + k f^2 <= L (or L^2, see ``exponent``)."""
    if wm.N == wm.dim:
        raise WeightError("The warping criterion is undefined for N = n")
    settings = get_settings()
    exponent = exponent or settings.albi_exponent
    n = wm.dim
    points = interior_grid(wm.chart.domain, resolution)

    def evaluate(point):
        weight = wm.weight.jet(point, 1)
        if float(weight.value[0]) < WEIGHT_FLOOR:
            return None
        f = warping_jet(weight, wm.N, n)
        mj = wm.chart.metric_jet(point, 0)
        grad_sq = float(f.first[0] @ np.linalg.solve(mj.g, f.first[0]))
        fsq = float(f.value[0]) ** 2
        return k * fsq - L, grad_sq + k * fsq - L ** exponent

    values = parallel_map(evaluate, list(points))
    bound = reduce_maximum(points, [None if v is None else v[0] for v in values])
    gradient = reduce_maximum(points, [None if v is None else v[1] for v in values])
    tolerance = settings.tolerance
    return AlbiReport(bound.value, gradient.value, bound.point, gradient.point, exponent,
                      bound.value <= tolerance and gradient.value <= tolerance)
