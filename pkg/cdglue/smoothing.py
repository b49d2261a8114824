"""
Smoothing of a glued collar metric.

Side 0 is deformed by G = I + 2 F(t) L - 2 C Fc(t) P, where L is the
interface shape operator (Pi0 + Pi1 raised with g_Y) parallel-transported
along the normal lines and P projects onto the tangential block.  The
deformed piecewise metric is then mollified in the glued coordinates.
Derivatives of the mollified metric come from derivatives of the kernel,
so the piecewise data is never differentiated across t = 0.
"""
import logging
import threading
from dataclasses import dataclass, field, replace
from typing import List, Optional, Sequence, Tuple

import numpy as np
from scipy.integrate import solve_ivp
from scipy.interpolate import RegularGridInterpolator

from cdglue.chart import MetricJet, check_positive_definite
from cdglue.config import get_settings
from cdglue.curvature import WEIGHT_FLOOR, bakry_emery_from_jets
from cdglue.errors import (
    CdGlueError,
    DeformationError,
    MollificationError,
    ProfileError,
    QuadratureError,
    WeightError,
)
from cdglue.gluing import CollarGluedSpace, compatibility_report
from cdglue.jet import Jet
from cdglue.sweep import axis_samples, parallel_map, reduce_minimum, richardson

logger = logging.getLogger(__name__)

QUADRATURE_LIMIT = 1e-4
# one-sided steps for the interface slope, as fractions of delta^4; F is linear below them
JUMP_STEPS = (0.02, 0.01, 0.005)


# --- profiles -----------------------------------------------------------------

def _psi(x: np.ndarray) -> np.ndarray:
    positive = x > 0
    safe = np.where(positive, x, 1.0)
    return np.where(positive, np.exp(-1.0 / safe), 0.0)


def _psi_prime(x: np.ndarray) -> np.ndarray:
    positive = x > 0
    safe = np.where(positive, x, 1.0)
    return np.where(positive, np.exp(-1.0 / safe) / safe ** 2, 0.0)


def smoothstep(s) -> Tuple[np.ndarray, np.ndarray]:
    """
    C-infinity step eta with eta = 1 on (-inf, 0], 0 on [1, inf).

    Returns:
        (eta(s), eta'(s))
    """
    s = np.asarray(s, dtype=float)
    a, b = _psi(1.0 - s), _psi(s)
    a_s, b_s = -_psi_prime(1.0 - s), _psi_prime(s)
    total = a + b
    return a / total, (a_s * b - a * b_s) / total ** 2


_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(48)


def smoothstep_integral(x) -> np.ndarray:
    """int_0^x eta(u) du for x >= 0 (equals 1/2 for x >= 1)."""
    x = np.asarray(x, dtype=float)
    clipped = np.clip(x, 0.0, 1.0)
    u = clipped[..., None] * (_GL_NODES + 1.0) / 2.0
    partial = (smoothstep(u)[0] * _GL_WEIGHTS).sum(axis=-1) * clipped / 2.0
    return np.where(x >= 1.0, 0.5, partial)


@dataclass(frozen=True)
class SmoothingProfile:
    """
    Deformation data for one delta.

    F(t) = sign * A(t) * eta(2t/delta - 1) with A(t) = int_0^t eta(u/delta^4) du,
    Fc(t) = delta^p (t/delta)^2 eta(t/delta) with p = ``fc_power``.  ``sign = 0``
    switches F off and ``C = 0`` switches Fc off.  ``width`` is the
    mollification radius h, delta^5 unless the settings give a factor of delta^4.

    p = 2 gives Fc(t) = t^2 eta(t/delta), whose second derivative stays of
    order one as delta shrinks; the sweep then keeps a fixed curvature loss.
    """
    delta: float
    C: float = 1.0
    sign: int = 1
    width: Optional[float] = None
    fc_power: Optional[float] = None

    def __post_init__(self):
        if self.delta <= 0:
            raise ProfileError(f"delta must be positive, got {self.delta}")
        if self.C < 0:
            raise ProfileError(f"C must be nonnegative, got {self.C}")
        if self.sign not in (-1, 0, 1):
            raise ProfileError(f"Profile sign must be -1, 0 or 1, got {self.sign}")
        settings = get_settings()
        if self.width is None:
            factor = settings.mollifier_width_factor
            object.__setattr__(self, "width", self.delta ** 5 if factor is None else factor * self.delta ** 4)
        if self.fc_power is None:
            object.__setattr__(self, "fc_power", settings.profile_fc_power)
        if self.fc_power < 2:
            raise ProfileError(f"Fc power must be at least 2, got {self.fc_power}")
        if self.width <= 0:
            raise ProfileError(f"Mollification width must be positive, got {self.width}")

    def F(self, t) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        d = self.delta
        A = d ** 4 * smoothstep_integral(np.maximum(t, 0.0) / d ** 4)
        cut = smoothstep(2.0 * t / d - 1.0)[0]
        return np.where(t > 0, self.sign * A * cut, 0.0)

    def F_prime(self, t) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        d = self.delta
        A = d ** 4 * smoothstep_integral(np.maximum(t, 0.0) / d ** 4)
        cut, cut_prime = smoothstep(2.0 * t / d - 1.0)
        inner = smoothstep(t / d ** 4)[0]
        return np.where(t >= 0, self.sign * (inner * cut + A * (2.0 / d) * cut_prime), 0.0)

    def Fc(self, t) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        d = self.delta
        return np.where(t > 0, d ** (self.fc_power - 2) * t ** 2 * smoothstep(t / d)[0], 0.0)

    def Fc_prime(self, t) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        d = self.delta
        eta, eta_prime = smoothstep(t / d)
        return np.where(t > 0, d ** (self.fc_power - 2) * (2 * t * eta + t ** 2 * eta_prime / d), 0.0)


# --- transport of the shape operator ------------------------------------------

def interface_operator(gs: CollarGluedSpace, ys: np.ndarray) -> np.ndarray:
    """L(0) = g_Y^{-1}(Pi0 + Pi1) at each y, using Pi = -1/2 d_n g_ab on collars."""
    points = np.hstack([ys, np.zeros((ys.shape[0], 1))])
    g0, dg0, _ = gs.side0.chart.metric_jets(points, 1)
    _, dg1, _ = gs.side1.chart.metric_jets(points, 1)
    m = gs.dim - 1
    total = -0.5 * (dg0[:, -1, :m, :m] + dg1[:, -1, :m, :m])
    return np.linalg.solve(g0[:, :m, :m], total)


class ShapeTransport:
    """L(y, t) for a batch of y, solved once over t in [0, delta]."""

    def __init__(self, gs: CollarGluedSpace, ys: np.ndarray, delta: float):
        self.ys = ys
        self.m = gs.dim - 1
        self.batch = ys.shape[0]
        initial = interface_operator(gs, ys)
        self.initial = initial
        # a 1x1 operator commutes with S, so L stays at its interface value
        self.constant = self.m == 1 or bool(np.all(initial == 0.0))
        self.solution = None
        if self.constant:
            return
        chart = gs.side0.chart
        m, batch = self.m, self.batch

        def rhs(t, state):
            L = state.reshape(batch, m, m)
            points = np.hstack([ys, np.full((batch, 1), t)])
            g, dg, _ = chart.metric_jets(points, 1)
            S = 0.5 * np.linalg.solve(g[:, :m, :m], dg[:, -1, :m, :m])
            return (L @ S - S @ L).ravel()

        self.solution = solve_ivp(rhs, (0.0, delta), initial.ravel(), method="DOP853",
                                  rtol=1e-11, atol=1e-13, dense_output=True)
        if not self.solution.success:
            raise DeformationError(f"Shape-operator transport failed: {self.solution.message}")

    def operator(self, t: np.ndarray) -> np.ndarray:
        """L at times ``t`` for every y: shape (len(t), batch, m, m)."""
        t = np.atleast_1d(np.asarray(t, dtype=float))
        if self.constant:
            return np.broadcast_to(self.initial, (t.size,) + self.initial.shape).copy()
        states = self.solution.sol(t)  # (batch*m*m, len(t))
        return states.T.reshape(t.size, self.batch, self.m, self.m)


class TransportTable:
    """
    L on a tensor grid over Y x [0, delta], read back with cubic interpolation.

    The Y box is padded by twice the mollification width so that every
    kernel sample of a point inside the collar falls on the grid.
    """

    def __init__(self, gs: CollarGluedSpace, profile: SmoothingProfile, resolution: Optional[int] = None):
        resolution = resolution or get_settings().transport_resolution
        pad = 2.0 * profile.width
        axes = [np.linspace(lo - pad, hi + pad, resolution) for lo, hi in gs.y_domain]
        ts = np.linspace(0.0, profile.delta, 4 * resolution)
        ys = np.stack([a.ravel() for a in np.meshgrid(*axes, indexing="ij")], axis=1)
        m = gs.dim - 1
        shape = tuple(len(a) for a in axes)
        states = ShapeTransport(gs, ys, profile.delta).operator(ts)  # (T, B, m, m)
        values = np.moveaxis(states.reshape((len(ts),) + shape + (m, m)), 0, len(shape))
        self.interpolator = RegularGridInterpolator(tuple(axes) + (ts,), values, method="cubic",
                                                    bounds_error=False, fill_value=None)
        logger.debug("[TRANSPORT] table of %d y-nodes x %d t-nodes for delta=%.4g", len(ys), len(ts), profile.delta)

    def __call__(self, points: np.ndarray) -> np.ndarray:
        """L at glued points (y, t), shape (B, m, m)."""
        return self.interpolator(points)


class DeformedMetric:
    """The piecewise metric g_(delta): side 0 deformed, side 1 untouched."""

    def __init__(self, gs: CollarGluedSpace, profile: SmoothingProfile):
        self.gs = gs
        self.profile = profile
        self.dim = gs.dim
        self._transport: Optional[TransportTable] = None
        self._lock = threading.Lock()

    def transport_table(self) -> TransportTable:
        with self._lock:
            if self._transport is None:
                self._transport = TransportTable(self.gs, self.profile)
            return self._transport

    def shape_operator(self, points: np.ndarray) -> np.ndarray:
        """Transported L at glued points with 0 <= t <= delta, shape (B, m, m)."""
        points = np.atleast_2d(np.asarray(points, dtype=float))
        if self.dim == 2:
            # a 1x1 operator keeps its interface value
            return interface_operator(self.gs, points[:, :-1])
        return self.transport_table()(points)

    def _tangential_change(self, sub: np.ndarray, gy: np.ndarray) -> np.ndarray:
        F = self.profile.F(sub[:, -1])[:, None, None]
        Fc = self.profile.Fc(sub[:, -1])[:, None, None]
        lowered = gy @ self.shape_operator(sub)
        lowered = 0.5 * (lowered + lowered.transpose(0, 2, 1))
        return 2.0 * F * lowered - 2.0 * self.profile.C * Fc * gy

    def _active(self, points: np.ndarray) -> np.ndarray:
        t = points[:, -1]
        return (t > 0) & (t < self.profile.delta)

    def perturbation(self, points) -> np.ndarray:
        """g_(delta) - g on the tangential block, shape (B, m, m); zero outside 0 < t < delta."""
        points = np.atleast_2d(np.asarray(points, dtype=float))
        m = self.dim - 1
        change = np.zeros((len(points), m, m))
        active = self._active(points)
        if np.any(active):
            sub = points[active]
            change[active] = self._tangential_change(sub, self.gs.metric_values(sub)[:, :m, :m])
        return change

    def values(self, points) -> np.ndarray:
        points = np.atleast_2d(np.asarray(points, dtype=float))
        g = self.gs.metric_values(points)
        active = self._active(points)
        if not np.any(active):
            return g
        m = self.dim - 1
        sub = points[active]
        gy = g[active][:, :m, :m]
        deformed = gy + self._tangential_change(sub, gy)
        smallest = np.linalg.eigvalsh(deformed)[:, 0]
        if np.any(smallest <= 0):
            bad = sub[int(np.argmin(smallest))]
            raise DeformationError(f"Deformed metric not positive definite at {tuple(bad)}; delta too large")
        block = g[active]
        block[:, :m, :m] = deformed
        g[active] = block
        return g

    def _deformation_slope(self, ys: np.ndarray) -> np.ndarray:
        """d_t of the perturbation at t = 0+, from one-sided differences extrapolated in the step."""
        estimates = []
        for fraction in JUMP_STEPS:
            h = fraction * self.profile.delta ** 4
            near = self.perturbation(np.hstack([ys, np.full((len(ys), 1), h)]))
            far = self.perturbation(np.hstack([ys, np.full((len(ys), 1), 2.0 * h)]))
            estimates.append((4.0 * near - far) / (2.0 * h))
        return richardson(estimates, orders=(2, 3))

    def interface_jump(self, ys: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        """
        Jump of d_t g_ab across t = 0 on the tangential block, before and after
        the deformation: (B,) sup-norms each.
        """
        points = np.hstack([ys, np.zeros((ys.shape[0], 1))])
        m = self.dim - 1
        _, dg0, _ = self.gs.side0.chart.metric_jets(points, 1)
        _, dg1, _ = self.gs.side1.chart.metric_jets(points, 1)
        upper = dg0[:, -1, :m, :m]
        lower = -dg1[:, -1, :m, :m]  # d_t on side 1 in the glued coordinate
        before = np.abs(upper - lower).reshape(len(ys), -1).max(axis=1)
        after = np.abs(upper + self._deformation_slope(ys) - lower).reshape(len(ys), -1).max(axis=1)
        return before, after


def deform(gs: CollarGluedSpace, profile: SmoothingProfile) -> DeformedMetric:
    """g_(delta) = g0(., G_delta .) on side 0 with the transported shape operator."""
    return DeformedMetric(gs, profile)


# --- mollification --------------------------------------------------------------

class Mollifier:
    """
    Quadrature weights for convolution with rho(z) ~ exp(-1/(1-|z|^2)) and
    its first and second derivatives on the unit ball.

    The derivative weights are corrected so that they are exact on
    polynomials of degree two; the rule is then exact for the mollification
    of affine data and for second derivatives of quadratics.
    """

    def __init__(self, dim: int, nodes: Optional[int] = None):
        nodes = nodes or get_settings().mollifier_nodes
        self.dim = dim
        self.nodes, base = self._rule(dim, nodes)
        self.quadrature_error = abs(self._mass(dim, nodes) - self._mass(dim, nodes + 16)) / self._mass(dim, nodes + 16)
        if self.quadrature_error > QUADRATURE_LIMIT:
            raise QuadratureError(f"Mollifier quadrature error estimate {self.quadrature_error:.3g}")
        z = self.nodes
        q = 1.0 - np.sum(z ** 2, axis=1)
        weight = base * np.exp(-1.0 / q)
        weight = weight / weight.sum()
        self.w0 = weight
        a = -2.0 * z / q[:, None] ** 2
        # first derivative weights, normalised so sum w1_k z_k = -1
        w1 = (weight[:, None] * a).T
        w1 = w1 / -np.sum(w1 * z.T, axis=1)[:, None]
        self.w1 = w1
        w2 = np.zeros((dim, dim, len(weight)))
        for k in range(dim):
            for l in range(dim):
                raw = a[:, k] * a[:, l] - 8.0 * z[:, k] * z[:, l] / q ** 3
                if k == l:
                    raw = raw - 2.0 / q ** 2
                w2[k, l] = weight * raw
        self.w2 = self._correct_second(w2, weight, z)

    @staticmethod
    def _rule(dim: int, nodes: int) -> Tuple[np.ndarray, np.ndarray]:
        x, w = np.polynomial.legendre.leggauss(nodes)
        mesh = np.meshgrid(*([x] * dim), indexing="ij")
        z = np.stack([m.ravel() for m in mesh], axis=1)
        weights = np.prod(np.stack(np.meshgrid(*([w] * dim), indexing="ij")).reshape(dim, -1), axis=0)
        inside = np.sum(z ** 2, axis=1) < 1.0
        return z[inside], weights[inside]

    @classmethod
    def _mass(cls, dim: int, nodes: int) -> float:
        z, w = cls._rule(dim, nodes)
        return float(np.sum(w * np.exp(-1.0 / (1.0 - np.sum(z ** 2, axis=1)))))

    @staticmethod
    def _correct_second(w2: np.ndarray, weight: np.ndarray, z: np.ndarray) -> np.ndarray:
        dim = z.shape[1]
        for k in range(dim):
            for l in range(dim):
                if k != l:
                    w2[k, l] = w2[k, l] / np.sum(w2[k, l] * z[:, k] * z[:, l])
        # diagonal: match moments against 1 and z_j^2 exactly
        basis = np.hstack([np.ones((len(weight), 1)), z ** 2])  # (Q, dim+1)
        gram = basis.T @ (weight[:, None] * basis)
        for k in range(dim):
            target = np.zeros(dim + 1)
            target[1 + k] = 2.0
            residual = target - basis.T @ w2[k, k]
            alpha = np.linalg.solve(gram, residual)
            w2[k, k] = w2[k, k] + weight * (basis @ alpha)
        return w2

    def convolve(self, func, center: np.ndarray, h: float, order: int = 2):
        """
        Mollify ``func`` (batched values at points, any trailing shape) at ``center``.

        Returns:
            (value, first, second) with first/second None above ``order``
        """
        points = center[None, :] - h * self.nodes
        values = func(points)
        base = func(center[None, :])[0]
        delta_values = values - base
        value = np.tensordot(self.w0, values, axes=(0, 0))
        first = second = None
        if order >= 1:
            first = np.tensordot(self.w1, delta_values, axes=(1, 0)) / h
        if order >= 2:
            second = np.tensordot(self.w2, delta_values, axes=(2, 0)) / h ** 2
        return value, first, second


def _band(point: Sequence[float], profile: SmoothingProfile) -> bool:
    return abs(point[-1]) <= profile.delta + profile.width


class SmoothedMetric:
    """Mollified metric g^delta; equals the glued metric outside |t| <= delta + h."""

    def __init__(self, deformed: DeformedMetric, mollifier: Mollifier):
        self.deformed = deformed
        self.gs = deformed.gs
        self.profile = deformed.profile
        self.mollifier = mollifier
        self.dim = deformed.dim

    @property
    def width(self) -> float:
        return self.profile.width

    @property
    def domain(self):
        return self.gs.domain

    def contains(self, point: Sequence[float], slack: float = 1e-12) -> bool:
        return self.gs.contains(point, slack)

    def metric_jet(self, point: Sequence[float], order: int = 2) -> MetricJet:
        point = np.asarray(point, dtype=float)
        if not _band(point, self.profile):
            return self.gs.metric_jet(point, order)
        value, first, second = self.mollifier.convolve(self.deformed.values, point, self.width, order)
        value = 0.5 * (value + value.T)
        check_positive_definite(value, point)
        if first is not None:
            first = 0.5 * (first + first.transpose(0, 2, 1))
        if second is not None:
            second = 0.5 * (second + second.transpose(1, 0, 2, 3))
            second = 0.5 * (second + second.transpose(0, 1, 3, 2))
        return MetricJet(value, first, second, tuple(float(x) for x in point))

    def metric_values(self, points) -> np.ndarray:
        points = np.atleast_2d(np.asarray(points, dtype=float))
        return np.stack([self.metric_jet(p, 0).g for p in points])


class SmoothedWeight:
    """Glued weight, mollified across t = 0 with the metric's kernel."""

    def __init__(self, gs: CollarGluedSpace, profile: SmoothingProfile, mollifier: Mollifier):
        self.gs = gs
        self.profile = profile
        self.mollifier = mollifier

    def jet(self, point: Sequence[float], order: int = 2) -> Jet:
        point = np.asarray(point, dtype=float)
        if abs(point[-1]) > self.profile.width:
            return self.gs.weight_jet(point, order)
        value, first, second = self.mollifier.convolve(self.gs.weight_values, point, self.profile.width, order)
        second = 0.5 * (second + second.T) if second is not None else None
        return Jet(np.array([value]), None if first is None else first[None],
                   None if second is None else second[None])


def mollify(deformed: DeformedMetric, h: Optional[float] = None, nodes: Optional[int] = None) -> SmoothedMetric:
    """
    Mollify g_(delta) with width h (defaults to the profile's width).

    Raises MollificationError unless h < delta^4 / 2.
    """
    profile = deformed.profile
    if h is not None and h != profile.width:
        profile = replace(profile, width=h)
        deformed = DeformedMetric(deformed.gs, profile)
    if profile.width >= profile.delta ** 4 / 2:
        raise MollificationError(
            f"Mollification width {profile.width:.3g} must be below delta^4/2 = {profile.delta ** 4 / 2:.3g}")
    return SmoothedMetric(deformed, Mollifier(deformed.dim, nodes))


# --- sweep ----------------------------------------------------------------------

@dataclass
class SweepGrid:
    """Sample points for a smoothing sweep: collar grid plus a refined band around t = 0."""
    y_resolution: int = 5
    t_resolution: Optional[int] = None
    band_resolution: int = 33
    band_factor: float = 1.5

    def points(self, gs: CollarGluedSpace, profile: SmoothingProfile) -> np.ndarray:
        lo, hi = gs.domain[-1]
        resolution = self.t_resolution or get_settings().grid_resolution
        d, h = profile.delta, profile.width
        band = np.linspace(-self.band_factor * d, self.band_factor * d, self.band_resolution)
        near = np.array([0.0, h / 2, 2 * h, d ** 4 / 2, d ** 4, d / 2])
        ts = np.concatenate([axis_samples(lo, hi, resolution), band, near, -near])
        step = (hi - lo) / (resolution + 1)
        ts = np.unique(ts[(ts > lo + step / 2) & (ts < hi - step / 2)])
        ys = gs.y_grid(self.y_resolution)
        return np.array([np.append(y, t) for y in ys for t in ts])


@dataclass
class SweepRow:
    delta: float
    sup_metric_distance: float
    min_bakry_emery_eig: float
    epsilon: float
    argmin: Optional[Tuple[float, ...]] = None
    error: Optional[str] = None

    def to_dict(self) -> dict:
        return {
            'delta': self.delta,
            'sup_metric_distance': self.sup_metric_distance,
            'min_bakry_emery_eig': self.min_bakry_emery_eig,
            'epsilon': self.epsilon,
            'argmin': list(self.argmin) if self.argmin else None,
            'error': self.error,
        }


@dataclass
class SmoothingSweep:
    K: float
    N: float
    rows: List[SweepRow] = field(default_factory=list)

    @property
    def epsilons(self) -> List[float]:
        return [r.epsilon for r in self.rows]

    @property
    def distance_nonincreasing(self) -> bool:
        d = [r.sup_metric_distance for r in self.rows]
        return all(b <= a + 1e-12 for a, b in zip(d, d[1:]))

    @property
    def epsilon_decreasing(self) -> bool:
        e = self.epsilons
        return all(b <= a + 1e-9 for a, b in zip(e, e[1:]))


def _sweep_row(gs: CollarGluedSpace, N: float, K: float, profile: SmoothingProfile,
               grid: SweepGrid, weight_c1: bool) -> SweepRow:
    smoothed = mollify(deform(gs, profile))
    weight = gs if weight_c1 else SmoothedWeight(gs, profile, smoothed.mollifier)
    points = grid.points(gs, profile)

    def evaluate(point):
        mj = smoothed.metric_jet(point, 2)
        distance = float(np.max(np.abs(mj.g - gs.metric_values([point])[0])))
        weight_jet = weight.jet(point, 2)
        if float(weight_jet.value[0]) < WEIGHT_FLOOR:
            return distance, None
        return distance, bakry_emery_from_jets(mj, weight_jet, N).lower_bound()

    results = parallel_map(evaluate, list(points))
    distance = max(r[0] for r in results)
    result = reduce_minimum(points, [r[1] for r in results])
    if result.evaluated == 0:
        raise WeightError(f"No sample point with positive weight at delta={profile.delta:.4g}")
    logger.info("[SWEEP] delta=%.4g: sup|g^d - g|=%.3g, min eig=%.6g at %s", profile.delta, distance,
                result.value, result.point)
    return SweepRow(profile.delta, distance, result.value, float(K - result.value), result.point)


def smoothing_sweep(gs: CollarGluedSpace, N: float, K: float, deltas: Sequence[float],
                    grid: Optional[SweepGrid] = None, C: Optional[float] = None,
                    sign: Optional[int] = None, check_compatibility: bool = True) -> SmoothingSweep:
    """
    One row per delta: sup distance to g, min N-Ricci eigenvalue and
    epsilon(delta) = K - min.

    Args:
        gs: Glued collar satisfying the interface conditions
        N: Synthetic dimension for the N-Ricci tensor
        K: Target lower bound
        deltas: Strictly decreasing deformation scales
        grid: Sample points (default SweepGrid())
        C: Profile constant (default from settings)
        sign: Profile sign (default from settings)
    """
    settings = get_settings()
    deltas = [float(d) for d in deltas]
    if not deltas or any(b >= a for a, b in zip(deltas, deltas[1:])):
        raise ProfileError(f"delta list must be nonempty and strictly decreasing, got {deltas}")
    if check_compatibility:
        report = compatibility_report(gs, resolution=5)
        if not report.passed:
            raise ProfileError("Interface conditions fail; the smoothing construction does not apply")
    grid = grid or SweepGrid()
    C = settings.profile_constant if C is None else C
    sign = settings.profile_sign if sign is None else sign
    weight_c1 = gs.weight_is_c1(gs.y_grid(3))
    sweep = SmoothingSweep(K, N)
    for delta in deltas:
        profile = SmoothingProfile(delta, C, sign)
        try:
            sweep.rows.append(_sweep_row(gs, N, K, profile, grid, weight_c1))
        except CdGlueError as e:
            logger.warning("[SWEEP] delta=%.4g failed: %s", delta, e)
            sweep.rows.append(SweepRow(delta, np.nan, np.nan, np.nan, error=str(e)))
    return sweep


# --- C1 matching -----------------------------------------------------------------

@dataclass
class C1Report:
    jump_before: float
    jump_after: float
    worst_y: Tuple[float, ...]
    passed: bool

    def to_dict(self) -> dict:
        return {
            'jump_before': self.jump_before,
            'jump_after': self.jump_after,
            'worst_y': list(self.worst_y),
            'passed': self.passed,
        }


def c1_matching_check(deformed: DeformedMetric, resolution: Optional[int] = None) -> C1Report:
    """Sup over the Y grid of the jump of d_t (g_delta)_ab across t = 0."""
    ys = deformed.gs.y_grid(resolution)
    before, after = deformed.interface_jump(ys)
    worst = int(np.argmax(after))
    return C1Report(float(before.max()), float(after.max()), tuple(float(v) for v in ys[worst]),
                    float(after.max()) <= get_settings().tolerance)
