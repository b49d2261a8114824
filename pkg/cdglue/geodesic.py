"""
Geodesic integration on charts, glued collars and smoothed metrics.

On a glued collar the step that crosses t = 0 is shortened to land on the
interface; integration then continues with the other side's Christoffel
symbols and the velocity components carried over unchanged.
"""
import logging
from dataclasses import dataclass, field
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np
from scipy.optimize import brentq

from cdglue.chart import MetricJet, connection
from cdglue.errors import ChartExitError, DomainError, StepSizeError
from cdglue.gluing import CollarGluedSpace, reflect_metric_arrays

logger = logging.getLogger(__name__)

DRIFT_TOLERANCE = 1e-6

State = Tuple[np.ndarray, np.ndarray]


@dataclass
class GeodesicPath:
    """Samples of a geodesic by parameter, with per-side arc lengths."""
    times: np.ndarray
    points: np.ndarray
    velocities: np.ndarray
    truncated: bool = False
    crossings: List[float] = field(default_factory=list)
    segments: List[Tuple[int, float]] = field(default_factory=list)  # (side, arc length)
    max_drift: float = 0.0

    @property
    def endpoint(self) -> np.ndarray:
        return self.points[-1]

    @property
    def length(self) -> float:
        return float(sum(arc for _, arc in self.segments))

    def to_dict(self) -> dict:
        return {
            'endpoint': self.endpoint.tolist(),
            'length': self.length,
            'samples': len(self.times),
            'truncated': self.truncated,
            'crossings': list(self.crossings),
            'segments': [list(s) for s in self.segments],
            'max_drift': self.max_drift,
        }


def _side_metric(gs: CollarGluedSpace, x: np.ndarray, side: int, order: int) -> MetricJet:
    # analytic continuation of one side's chart, so stages overshooting t = 0 stay smooth
    local = np.array(x, dtype=float)
    if side == 1:
        local[-1] = -local[-1]
    g, dg, ddg = gs.side(side).chart.metric_jets([local], order)
    if side == 1:
        g, dg, ddg = reflect_metric_arrays(g, dg, ddg)
    return MetricJet(g[0], dg[0] if dg is not None else None, None, tuple(x))


def _metric_at(metric, x: np.ndarray, side: Optional[int], order: int) -> MetricJet:
    if side is None:
        return metric.metric_jet(x, order)
    return _side_metric(metric, x, side, order)


def _rk4(accel: Callable[[np.ndarray, np.ndarray], np.ndarray], x: np.ndarray, v: np.ndarray, h: float) -> State:
    k1x, k1v = v, accel(x, v)
    k2x, k2v = v + 0.5 * h * k1v, accel(x + 0.5 * h * k1x, v + 0.5 * h * k1v)
    k3x, k3v = v + 0.5 * h * k2v, accel(x + 0.5 * h * k2x, v + 0.5 * h * k2v)
    k4x, k4v = v + h * k3v, accel(x + h * k3x, v + h * k3v)
    return (x + h * (k1x + 2 * k2x + 2 * k3x + k4x) / 6.0,
            v + h * (k1v + 2 * k2v + 2 * k3v + k4v) / 6.0)


def geodesic_integrate(metric, start: Sequence[float], velocity: Sequence[float], length: float,
                       step: float = 1e-3, tolerance: float = DRIFT_TOLERANCE,
                       strict: bool = False) -> GeodesicPath:
    """
    Integrate the geodesic equation with classical RK4.

    Args:
        metric: MetricChart, CollarGluedSpace or SmoothedMetric
        start: Initial point (glued coordinates for a glued collar)
        velocity: Initial velocity components
        length: Parameter length to integrate
        step: RK4 step
        tolerance: Allowed speed drift per unit length within each side
        strict: Raise ChartExitError instead of truncating at the chart edge

    Returns:
        GeodesicPath sampled at every step and at each interface crossing
    """
    if step <= 0 or length < 0:
        raise ValueError(f"Need step > 0 and length >= 0, got step={step}, length={length}")
    glued = isinstance(metric, CollarGluedSpace)
    x = np.asarray(start, dtype=float).copy()
    v = np.asarray(velocity, dtype=float).copy()
    if not metric.contains(x):
        raise DomainError(x, metric.domain)
    side: Optional[int] = None
    if glued:
        side = 0 if (x[-1] > 0 or (x[-1] == 0 and v[-1] >= 0)) else 1

    def accel(xs, vs):
        conn = connection(_metric_at(metric, xs, side, 1))
        return -np.einsum("kij,i,j->k", conn.gamma, vs, vs)

    def speed(xs, vs) -> float:
        g = _metric_at(metric, xs, side, 0).g
        return float(np.sqrt(vs @ g @ vs))

    times, points, velocities = [0.0], [x.copy()], [v.copy()]
    path = GeodesicPath(np.array([]), np.array([]), np.array([]))
    s, segment_start = 0.0, 0.0
    segment_speed = speed(x, v)

    def close_segment(at: float):
        path.segments.append((side if side is not None else 0, segment_speed * (at - segment_start)))

    while s < length - 1e-14:
        h = min(step, length - s)
        try:
            x1, v1 = _rk4(accel, x, v, h)
        except DomainError:
            x1 = None
        crossed = glued and x1 is not None and (x1[-1] < 0 if side == 0 else x1[-1] > 0)
        if crossed and x[-1] != 0.0:
            fraction = brentq(lambda tau: _rk4(accel, x, v, tau * h)[0][-1], 0.0, 1.0, xtol=1e-15)
            h = fraction * h
            x1, v1 = _rk4(accel, x, v, h)
            x1[-1] = 0.0
        elif glued and x1 is not None and x1[-1] == 0.0 and x[-1] != 0.0:
            # landed exactly on the interface: switch sides if moving through it
            crossed = v1[-1] < 0 if side == 0 else v1[-1] > 0
        else:
            crossed = False
        if x1 is None or not metric.contains(x1):
            if strict:
                raise ChartExitError(f"Geodesic left the chart after parameter {s:.6g}")
            logger.warning("[GEODESIC] left the chart at parameter %.6g; path truncated", s)
            path.truncated = True
            break
        s += h
        drift = abs(speed(x1, v1) - segment_speed) / max(segment_speed, 1e-300)
        path.max_drift = max(path.max_drift, drift)
        if drift > tolerance * max(s - segment_start, 1.0):
            raise StepSizeError(f"Speed drift {drift:.3g} at parameter {s:.6g}; reduce the step {step}")
        x, v = x1, v1
        times.append(s)
        points.append(x.copy())
        velocities.append(v.copy())
        if crossed:
            close_segment(s)
            path.crossings.append(s)
            side = 1 - side
            segment_start, segment_speed = s, speed(x, v)
            logger.debug("[GEODESIC] crossed the interface at parameter %.6g into side %d", s, side)
    close_segment(s)
    path.times = np.array(times)
    path.points = np.array(points)
    path.velocities = np.array(velocities)
    return path
