"""
Warped products M x_f rS^m over a weighted base and their collapse onto
the weighted manifold (M, f^m vol).

Fiber quantities enter through closed formulas (Ric_F = (m-1)/r^2 on the
round fiber).  For a one-dimensional fiber the product can also be charted
explicitly, which is how the formulas are cross-checked.
"""
import logging
import math
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np

from cdglue.chart import (
    MetricChart,
    connection,
    curvature_from_jet,
    hessian_from_jet,
    upper_indices,
)
from cdglue.config import get_settings
from cdglue.curvature import (
    WEIGHT_FLOOR,
    Face,
    WeightedManifold,
    bakry_emery_from_jets,
    boundary_geometry,
    concavity_sweep,
    warping_jet,
)
from cdglue.errors import EvaluationDomainError, WeightError
from cdglue.expression import ScalarField, constant_field, power_field, product_field
from cdglue.gluing import CollarGluedSpace, interface_geometry
from cdglue.jet import Jet
from cdglue.sweep import face_grid, interior_grid, parallel_map, reduce_maximum, richardson

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class WarpedProductSpec:
    """
    Base weighted manifold, round fiber of radius ``radius`` and dimension
    ceil(N) - n.  ``warping`` overrides f = Phi^(1/(N-n)); it is needed where
    Phi vanishes and the power has no jet.
    """
    base: WeightedManifold
    radius: float = 1.0
    warping: Optional[ScalarField] = None

    def __post_init__(self):
        if self.radius <= 0:
            raise ValueError(f"Fiber radius must be positive, got {self.radius}")
        if self.warping is None and self.base.N <= self.base.dim:
            raise WeightError(f"A warped product needs N > n, got N={self.base.N}, n={self.base.dim}")
        if self.fiber_dim < 1:
            raise WeightError(f"Fiber dimension must be at least 1, got {self.fiber_dim}")

    @property
    def fiber_dim(self) -> int:
        return math.ceil(self.base.N - 1e-12) - self.base.dim

    def warping_field(self) -> ScalarField:
        if self.warping is not None:
            return self.warping
        return power_field(self.base.weight, 1.0 / (self.base.N - self.base.dim))

    def f_jet(self, point: Sequence[float], order: int = 2) -> Jet:
        if self.warping is not None:
            return self.warping.jet(point, order)
        weight = self.base.weight.jet(point, order)
        if float(weight.value[0]) < WEIGHT_FLOOR:
            raise WeightError(f"Warping function vanishes at {tuple(point)}")
        return warping_jet(weight, self.base.N, self.base.dim)


def _positive_f(spec: WarpedProductSpec, point: Sequence[float], order: int) -> Tuple[Jet, float]:
    f = spec.f_jet(point, order)
    value = float(f.value[0])
    if value < WEIGHT_FLOOR:
        raise WeightError(f"Warping function vanishes at {tuple(point)}")
    return f, value


def warped_ricci(spec: WarpedProductSpec, point: Sequence[float], xi: Sequence[float],
                 v: Sequence[float] = ()) -> float:
    """
    Ric(xi + v, xi + v) on M x_f rS^m.

    Args:
        spec: Warped product
        point: Base point p with f(p) > 0
        xi: Base vector (coordinate components)
        v: Fiber vector in an orthonormal frame of the unit sphere

    Returns:
        Ric_M(xi,xi) - m Hess f(xi,xi)/f + (m-1)|v|^2
        - (Lap f/f + (m-1)|grad f|^2/f^2) f^2 r^2 |v|^2
    """
    m = spec.fiber_dim
    f, fv = _positive_f(spec, point, 2)
    mj = spec.base.chart.metric_jet(point, 2)
    conn = connection(mj)
    _, ricci, _ = curvature_from_jet(mj)
    hess = hessian_from_jet(conn, f)
    laplacian = float(np.einsum("ij,ij->", conn.ginv, hess))
    grad_sq = float(f.first[0] @ conn.ginv @ f.first[0])
    xi = np.asarray(xi, dtype=float)
    v_sq = float(np.sum(np.asarray(v, dtype=float) ** 2))
    horizontal = float(xi @ ricci @ xi) - m * float(xi @ hess @ xi) / fv
    lifted = fv ** 2 * spec.radius ** 2 * v_sq
    vertical = (m - 1) * v_sq - (laplacian / fv + (m - 1) * grad_sq / fv ** 2) * lifted
    return horizontal + vertical


def warped_boundary_sff(spec: WarpedProductSpec, face: Face, point: Sequence[float],
                        xi: Sequence[float], chi: Sequence[float],
                        v: Sequence[float] = (), w: Sequence[float] = ()) -> float:
    """Pi(xi, chi) - g(nu, grad log f) f^2 r^2 (v . w) at a boundary point."""
    geometry = boundary_geometry(spec.base, face, point)
    f, fv = _positive_f(spec, geometry.point, 1)
    normal_log_f = float(geometry.normal @ f.first[0]) / fv
    base_part = float(np.asarray(xi, dtype=float) @ geometry.sff @ np.asarray(chi, dtype=float))
    fiber = float(np.dot(np.asarray(v, dtype=float), np.asarray(w, dtype=float))) if len(v) else 0.0
    return base_part - normal_log_f * fv ** 2 * spec.radius ** 2 * fiber


@dataclass
class FiberRadius:
    L_tilde: float
    radius: float
    theta: float
    max_f: float
    constrained: bool  # False when any radius works (m = 1 or L_tilde <= 0)

    def to_dict(self) -> dict:
        return {
            'L_tilde': self.L_tilde,
            'radius': self.radius,
            'theta': self.theta,
            'max_f': self.max_f,
            'constrained': self.constrained,
        }


def _max_f(base: WeightedManifold, resolution: Optional[int]) -> float:
    points = interior_grid(base.chart.domain, resolution)
    values = base.weight.values(points)
    values = np.clip(values, 0.0, None) ** (1.0 / (base.N - base.dim))
    return float(np.max(values))


def fiber_radius(base: WeightedManifold, kappa_bar: float, eta: float, L: float,
                 resolution: Optional[int] = None) -> FiberRadius:
    """
    Lower bound L_tilde for the fiber Ricci curvature and the matching radius.

    (m-1) L_tilde = (m-1) L - (N-1) theta max f + (N-1) eta with
    theta = min(-kappa_bar, eta); r = 1/sqrt(L_tilde).
    """
    N, n = base.N, base.dim
    m = math.ceil(N - 1e-12) - n
    theta = min(-kappa_bar, eta)
    max_f = _max_f(base, resolution)
    if m <= 1:
        logger.info("[WARP] one-dimensional fiber: Ricci of the fiber vanishes, radius unconstrained")
        return FiberRadius(float("nan"), 1.0, theta, max_f, False)
    L_tilde = ((m - 1) * L - (N - 1) * theta * max_f + (N - 1) * eta) / (m - 1)
    if L_tilde <= 0:
        return FiberRadius(L_tilde, 1.0, theta, max_f, False)
    return FiberRadius(L_tilde, 1.0 / math.sqrt(L_tilde), theta, max_f, True)


@dataclass
class CollapseReport:
    max_deviation: float
    point: Optional[Tuple[float, ...]]
    fiber_dim: int
    passed: bool

    def to_dict(self) -> dict:
        return {
            'max_deviation': self.max_deviation,
            'point': list(self.point) if self.point else None,
            'fiber_dim': self.fiber_dim,
            'passed': self.passed,
        }


def collapse_identity_check(spec: WarpedProductSpec, resolution: Optional[int] = None,
                            tolerance: float = 1e-8) -> CollapseReport:
    """
    Horizontal warped Ricci against the N-Ricci tensor of (M, f^m vol) with
    N = n + m, over the interior grid and the coordinate directions plus
    their pairwise sums.
    """
    base = spec.base
    n, m = base.dim, spec.fiber_dim
    points = interior_grid(base.chart.domain, resolution)
    directions = [np.eye(n)[i] for i in range(n)]
    directions += [np.eye(n)[i] + np.eye(n)[j] for i in range(n) for j in range(i + 1, n)]

    def evaluate(point):
        try:
            f = spec.f_jet(point, 2)
        except (WeightError, EvaluationDomainError):
            return None
        if float(f.value[0]) < WEIGHT_FLOOR:
            return None
        mj = base.chart.metric_jet(point, 2)
        tensor = bakry_emery_from_jets(mj, f.power(m), n + m).tensor.components
        return max(abs(warped_ricci(spec, point, xi) - float(xi @ tensor @ xi)) for xi in directions)

    result = reduce_maximum(points, parallel_map(evaluate, list(points)))
    if result.skipped:
        logger.warning("[WARP] %d grid points skipped where f vanishes", len(result.skipped))
    return CollapseReport(result.value, result.point, m, result.value <= tolerance)


def _inward_limit(func, face: Face, point: np.ndarray, width: float) -> float:
    sign = 1.0 if face.side == "min" else -1.0
    values = []
    for step in get_settings().richardson_steps:
        shifted = point.copy()
        shifted[face.axis] += sign * step * width
        values.append(func(shifted))
    return richardson(values, orders=(1, 2))


@dataclass
class KettererReport:
    concavity_max: float
    concavity_point: Optional[Tuple[float, ...]]
    gradient_excess: float
    gradient_point: Optional[Tuple[float, ...]]
    passed: bool

    def to_dict(self) -> dict:
        return {
            'concavity_max': self.concavity_max,
            'concavity_point': list(self.concavity_point) if self.concavity_point else None,
            'gradient_excess': self.gradient_excess,
            'gradient_point': list(self.gradient_point) if self.gradient_point else None,
            'passed': self.passed,
        }


def ketterer_hypothesis_check(spec: WarpedProductSpec, kappa: float, K_F: float,
                              resolution: Optional[int] = None) -> KettererReport:
    """
    Hess f + kappa f g <= 0 on the interior grid and |grad f| <= sqrt(K_F)
    on the zero-set faces.  Where f has no jet on the face, |grad f| is the
    Richardson-extrapolated inward limit.
    """
    base = spec.base
    tolerance = get_settings().tolerance
    concavity = concavity_sweep(base, kappa, resolution, warping=spec.warping)

    def gradient_norm(point) -> float:
        f = spec.f_jet(point, 1)
        g = base.chart.metric_jet(point, 0).g
        return float(np.sqrt(f.first[0] @ np.linalg.solve(g, f.first[0])))

    excess, worst = -np.inf, None
    bound = math.sqrt(max(K_F, 0.0))
    for face in base.zero_set_faces:
        lo, hi = base.chart.domain[face.axis]
        for point in face_grid(base.chart.domain, face.axis, face.coordinate(base.chart.domain), resolution):
            try:
                norm = gradient_norm(point)
            except (WeightError, EvaluationDomainError):
                norm = _inward_limit(gradient_norm, face, point, hi - lo)
            if norm - bound > excess:
                excess, worst = norm - bound, tuple(float(x) for x in point)
    passed = concavity.value <= tolerance and excess <= tolerance
    return KettererReport(concavity.value, concavity.point, float(excess), worst, passed)


def warped_product_chart(spec: WarpedProductSpec) -> MetricChart:
    """
    The product metric g_M + f^2 r^2 dphi^2 over base x [0, 2 pi], for a
    one-dimensional fiber.
    """
    if spec.fiber_dim != 1:
        raise ValueError(f"Only one-dimensional fibers are charted, got m={spec.fiber_dim}")
    base = spec.base
    n = base.dim
    lifted = {}
    for component, (i, j) in zip(base.chart.components, upper_indices(n)):
        lifted[(i, j)] = ScalarField(component.expression, n + 1)
    f_squared = power_field(spec.warping_field(), 2.0, n + 1)
    lifted[(n, n)] = product_field(constant_field(spec.radius ** 2, n + 1), f_squared, n + 1)
    components = tuple(lifted.get((i, j), constant_field(0.0, n + 1)) for i, j in upper_indices(n + 1))
    return MetricChart(n + 1, base.chart.domain + ((0.0, 2.0 * math.pi),), components)


@dataclass
class InterfaceMarginRow:
    y: Tuple[float, ...]
    warped_trace: float
    weighted_margin: float

    @property
    def deviation(self) -> float:
        return abs(self.warped_trace - self.weighted_margin)


def warped_interface_margin(gs: CollarGluedSpace, resolution: Optional[int] = None) -> List[InterfaceMarginRow]:
    """
    Trace of the warped interface forms Pi~0 + Pi~1 (base block plus m unit
    fiber directions, measured in the warped metric) next to the weighted
    margin tr(Pi0 + Pi1) - sum g(nu_i, grad log Phi_i).  They agree when N
    is an integer.
    """
    specs = [WarpedProductSpec(gs.side0), WarpedProductSpec(gs.side1)]
    m = specs[0].fiber_dim
    rows = []
    for y in gs.y_grid(resolution):
        geometries = interface_geometry(gs, y)
        fiber = 0.0
        for spec, geometry in zip(specs, geometries):
            f, fv = _positive_f(spec, geometry.point, 1)
            fiber -= m * float(geometry.normal @ f.first[0]) / fv
        trace = sum(g.trace for g in geometries)
        margin = trace - sum(g.normal_log_derivative for g in geometries)
        rows.append(InterfaceMarginRow(tuple(float(v) for v in y), trace + fiber, margin))
    return rows
