"""
Collar gluing of two weighted manifolds along their glue faces.

Both sides are given in Fermi coordinates (y, x^n) with x^n the distance
to the interface Y.  The glued coordinate is t = +x^n on side 0 and
t = -x^n on side 1, so points of the glued collar are (y, t).
"""
import logging
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np

from cdglue.chart import MetricJet, check_positive_definite, min_generalized_eig
from cdglue.config import get_settings
from cdglue.curvature import BoundaryGeometry, WeightedManifold, boundary_geometry
from cdglue.errors import (
    CollarNormalizationError,
    DomainError,
    InterfaceMismatchError,
    WeightError,
    WeightMismatchError,
)
from cdglue.jet import Jet
from cdglue.sweep import axis_samples, parallel_map

logger = logging.getLogger(__name__)

INTERFACE_TOLERANCE = 1e-9


def reflection_signs(n: int) -> np.ndarray:
    signs = np.ones(n)
    signs[-1] = -1.0
    return signs


def reflect_metric_arrays(g, dg=None, ddg=None):
    """Express side-1 metric data (batched) in the glued coordinate t = -x^n."""
    s = reflection_signs(g.shape[-1])
    sij = s[:, None] * s[None, :]
    g = g * sij
    if dg is not None:
        dg = dg * s[:, None, None] * sij
    if ddg is not None:
        ddg = ddg * (s[:, None] * s[None, :])[:, :, None, None] * sij
    return g, dg, ddg


def reflect_jet(jet: Jet) -> Jet:
    s = reflection_signs(jet.dim)
    first = jet.first * s if jet.first is not None else None
    second = jet.second * (s[:, None] * s[None, :]) if jet.second is not None else None
    third = jet.third * (s[:, None, None] * s[None, :, None] * s[None, None, :]) if jet.third is not None else None
    return Jet(jet.value, first, second, third)


def side_coordinates(points: np.ndarray) -> np.ndarray:
    """Glued (y, t) -> side coordinates (y, |t|)."""
    local = np.array(points, dtype=float, copy=True)
    local[..., -1] = np.abs(local[..., -1])
    return local


@dataclass(frozen=True)
class CollarGluedSpace:
    """Two collars glued along x^n = 0; evaluates the C^0 glued metric and weight."""
    side0: WeightedManifold
    side1: WeightedManifold

    @property
    def dim(self) -> int:
        return self.side0.dim

    @property
    def N(self) -> float:
        return self.side0.N

    @property
    def y_domain(self) -> Tuple[Tuple[float, float], ...]:
        return self.side0.chart.domain[:-1]

    @property
    def domain(self) -> Tuple[Tuple[float, float], ...]:
        """Glued coordinate box: Y x [-depth1, depth0]."""
        return self.y_domain + ((-self.side1.depth, self.side0.depth),)

    def contains(self, point: Sequence[float], slack: float = 1e-12) -> bool:
        return all(lo - slack <= x <= hi + slack for x, (lo, hi) in zip(point, self.domain))

    def side_of(self, t: float) -> int:
        return 0 if t >= 0 else 1

    def side(self, index: int) -> WeightedManifold:
        return self.side0 if index == 0 else self.side1

    # --- evaluation in glued coordinates -------------------------------------

    def metric_jet(self, point: Sequence[float], order: int = 2) -> MetricJet:
        """Piecewise metric jet; at t = 0 the side-0 (one-sided) values are returned."""
        if not self.contains(point):
            raise DomainError(point, self.domain)
        index = self.side_of(point[-1])
        local = side_coordinates(np.asarray(point, dtype=float))
        g, dg, ddg = self.side(index).chart.metric_jets([local], order)
        if index == 1:
            g, dg, ddg = reflect_metric_arrays(g, dg, ddg)
        check_positive_definite(g[0], point)
        return MetricJet(g[0], dg[0] if dg is not None else None, ddg[0] if ddg is not None else None,
                         tuple(float(x) for x in point))

    def metric_values(self, points) -> np.ndarray:
        points = np.atleast_2d(np.asarray(points, dtype=float))
        out = np.zeros((points.shape[0], self.dim, self.dim))
        local = side_coordinates(points)
        upper = points[:, -1] >= 0
        if np.any(upper):
            out[upper] = self.side0.chart.metric_values(local[upper])
        if np.any(~upper):
            g1 = self.side1.chart.metric_values(local[~upper])
            out[~upper] = reflect_metric_arrays(g1)[0]
        return out

    def weight_values(self, points) -> np.ndarray:
        points = np.atleast_2d(np.asarray(points, dtype=float))
        out = np.zeros(points.shape[0])
        local = side_coordinates(points)
        upper = points[:, -1] >= 0
        if np.any(upper):
            out[upper] = self.side0.weight.values(local[upper])
        if np.any(~upper):
            out[~upper] = self.side1.weight.values(local[~upper])
        return out

    def weight_jet(self, point: Sequence[float], order: int = 2) -> Jet:
        index = self.side_of(point[-1])
        local = side_coordinates(np.asarray(point, dtype=float))
        jet = self.side(index).weight.jet(local, order)
        return reflect_jet(jet) if index == 1 else jet

    def jet(self, point: Sequence[float], order: int = 2) -> Jet:
        """The glued weight as a scalar source."""
        return self.weight_jet(point, order)

    def weight_is_c1(self, y_points: np.ndarray, tolerance: float = INTERFACE_TOLERANCE) -> bool:
        """One-sided normal derivatives of Phi agree at the sampled interface points."""
        for y in y_points:
            point = np.append(y, 0.0)
            d0 = self.side0.weight.jet(point, 1).first[0, -1]
            d1 = self.side1.weight.jet(point, 1).first[0, -1]
            if abs(d0 + d1) > tolerance:
                return False
        return True

    def y_grid(self, resolution: Optional[int] = None) -> np.ndarray:
        resolution = resolution or get_settings().grid_resolution
        axes = [axis_samples(lo, hi, resolution) for lo, hi in self.y_domain]
        return np.stack([m.ravel() for m in np.meshgrid(*axes, indexing="ij")], axis=1)


# --- assembly -----------------------------------------------------------------

def _collar_grid(wm: WeightedManifold, resolution: int) -> np.ndarray:
    axes = [axis_samples(lo, hi, resolution, margin=False) for lo, hi in wm.chart.domain]
    return np.stack([m.ravel() for m in np.meshgrid(*axes, indexing="ij")], axis=1)


def _check_collar(wm: WeightedManifold, label: str, resolution: int) -> None:
    n = wm.dim
    g = wm.chart.metric_values(_collar_grid(wm, resolution))
    nn_error = np.max(np.abs(g[:, -1, -1] - 1.0))
    na_error = np.max(np.abs(g[:, -1, :-1]), initial=0.0)
    if nn_error > INTERFACE_TOLERANCE or na_error > INTERFACE_TOLERANCE:
        raise CollarNormalizationError(
            f"{label} is not in collar coordinates: |g_nn - 1| = {nn_error:.3g}, |g_na| = {na_error:.3g}")


def assemble(side0: WeightedManifold, side1: WeightedManifold, resolution: int = 9) -> CollarGluedSpace:
    """
    Glue two collars along x^n = 0.

    Args:
        side0: Side carrying t > 0
        side1: Side carrying t < 0
        resolution: Samples per axis of the validation grid

    Returns:
        The glued space; raises if the interface data disagree
    """
    for label, wm in (("side 0", side0), ("side 1", side1)):
        if wm.glue_face is None:
            raise WeightError(f"{label} has no glue face")
        if wm.dim < 2:
            raise WeightError(f"{label}: collar gluing needs dimension at least 2 (use glue_1d for intervals)")
    if side0.dim != side1.dim:
        raise InterfaceMismatchError(f"Dimensions differ: {side0.dim} vs {side1.dim}")
    if side0.N != side1.N:
        raise WeightError(f"Synthetic dimensions differ: {side0.N} vs {side1.N}")
    if not np.allclose(side0.chart.domain[:-1], side1.chart.domain[:-1], atol=INTERFACE_TOLERANCE, rtol=0):
        raise InterfaceMismatchError(
            f"Interface coordinate boxes differ: {side0.chart.domain[:-1]} vs {side1.chart.domain[:-1]}")

    for label, wm in (("side 0", side0), ("side 1", side1)):
        _check_collar(wm, label, resolution)

    axes = [axis_samples(lo, hi, resolution, margin=False) for lo, hi in side0.chart.domain[:-1]]
    y = np.stack([m.ravel() for m in np.meshgrid(*axes, indexing="ij")], axis=1)
    on_face = np.hstack([y, np.zeros((y.shape[0], 1))])
    g0 = side0.chart.metric_values(on_face)[:, :-1, :-1]
    g1 = side1.chart.metric_values(on_face)[:, :-1, :-1]
    mismatch = float(np.max(np.abs(g0 - g1)))
    if mismatch > INTERFACE_TOLERANCE:
        raise InterfaceMismatchError(f"Induced metrics on the interface differ by {mismatch:.3g}")
    phi0, phi1 = side0.weight.values(on_face), side1.weight.values(on_face)
    weight_gap = float(np.max(np.abs(phi0 - phi1)))
    if weight_gap > INTERFACE_TOLERANCE:
        raise WeightMismatchError(f"Weights on the interface differ by {weight_gap:.3g}")
    if np.any(phi0 <= 0):
        raise WeightError("Weight must be positive on the interface")

    logger.info("Assembled glued collar: dim=%d, domain=%s", side0.dim, side0.chart.domain[:-1])
    return CollarGluedSpace(side0, side1)


# --- compatibility ------------------------------------------------------------

@dataclass
class CompatibilityRow:
    y: Tuple[float, ...]
    sff_min_eigenvalue: float      # lambda_min(Pi0 + Pi1) against g_Y
    weighted_margin: float         # tr Pi - <nu0, grad log Phi0> - <nu1, grad log Phi1>
    mean_curvature_sum: float      # H^Phi0 + H^Phi1


@dataclass
class CompatibilityReport:
    rows: List[CompatibilityRow]
    min_sff_eigenvalue: float
    min_weighted_margin: float
    min_mean_curvature_sum: float
    tolerance: float

    @property
    def sff_passed(self) -> bool:
        return self.min_sff_eigenvalue >= -self.tolerance

    @property
    def margin_passed(self) -> bool:
        return self.min_weighted_margin >= -self.tolerance

    @property
    def mean_curvature_passed(self) -> bool:
        return self.min_mean_curvature_sum >= -self.tolerance

    @property
    def passed(self) -> bool:
        return self.sff_passed and self.margin_passed

    def to_dict(self) -> dict:
        return {
            'min_sff_eigenvalue': self.min_sff_eigenvalue,
            'min_weighted_margin': self.min_weighted_margin,
            'min_mean_curvature_sum': self.min_mean_curvature_sum,
            'sff_passed': self.sff_passed,
            'margin_passed': self.margin_passed,
            'mean_curvature_passed': self.mean_curvature_passed,
            'passed': self.passed,
        }


def interface_geometry(gs: CollarGluedSpace, y: Sequence[float]) -> Tuple[BoundaryGeometry, BoundaryGeometry]:
    """Boundary geometry of both sides at the interface point y."""
    point = list(y) + [0.0]
    return (boundary_geometry(gs.side0, gs.side0.glue_face, point),
            boundary_geometry(gs.side1, gs.side1.glue_face, point))


def compatibility_row(gs: CollarGluedSpace, y: Sequence[float]) -> CompatibilityRow:
    b0, b1 = interface_geometry(gs, y)
    total = b0.sff + b1.sff
    return CompatibilityRow(
        tuple(float(v) for v in y),
        min_generalized_eig(total, b0.induced),
        b0.trace + b1.trace - b0.normal_log_derivative - b1.normal_log_derivative,
        b0.weighted_mean_curvature + b1.weighted_mean_curvature,
    )


def compatibility_report(gs: CollarGluedSpace, resolution: Optional[int] = None,
                         y_points: Optional[np.ndarray] = None) -> CompatibilityReport:
    """Interface conditions Pi0 + Pi1 >= 0 and the weighted mean-curvature margin over a Y grid."""
    y_points = gs.y_grid(resolution) if y_points is None else np.atleast_2d(y_points)
    rows = parallel_map(lambda y: compatibility_row(gs, y), list(y_points))
    report = CompatibilityReport(
        rows,
        min(r.sff_min_eigenvalue for r in rows),
        min(r.weighted_margin for r in rows),
        min(r.mean_curvature_sum for r in rows),
        get_settings().tolerance,
    )
    logger.info("Compatibility: min eig(Pi)=%.6g, min margin=%.6g", report.min_sff_eigenvalue,
                report.min_weighted_margin)
    return report
