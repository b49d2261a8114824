"""
Needle densities of a glued collar.

Along the normal line through y the density is h(t) = det J(t) Phi(y, t),
where J is the matrix Jacobi field of the interface in a parallel
orthonormal frame.  The tilted variant pushes Y along exp(t V) with V a
unit field leaning on the normal and reads h off the variational equation.
"""
import logging
import math
from dataclasses import dataclass
from typing import Optional, Sequence, Tuple

import numpy as np
from scipy.integrate import solve_ivp

from cdglue.chart import MetricJet, connection, curvature_from_jet
from cdglue.curvature import WeightedManifold
from cdglue.errors import FocalPointError, NumericalError
from cdglue.gluing import CollarGluedSpace, interface_geometry
from cdglue.needle import NeedleDensity, one_sided_derivative

logger = logging.getLogger(__name__)

LOGDERIV_TOLERANCE = 1e-5
TILTED_TOLERANCE = 1e-3
DETERMINANT_FLOOR = 1e-9

_SOLVER = dict(method="DOP853", rtol=1e-11, atol=1e-13, dense_output=True)


def _side_jet(side: WeightedManifold, point: np.ndarray, order: int) -> MetricJet:
    g, dg, ddg = side.chart.metric_jets([point], order)
    return MetricJet(g[0], dg[0] if dg is not None else None,
                     ddg[0] if ddg is not None else None, tuple(point))


def _orthonormal_tangent_frame(g: np.ndarray) -> np.ndarray:
    """Columns orthonormal for g restricted to the first n-1 axes, padded with a zero normal row."""
    m = g.shape[0] - 1
    C = np.linalg.cholesky(g[:m, :m])
    frame = np.linalg.inv(C).T
    return np.vstack([frame, np.zeros((1, m))])


def _jacobi_density(side: WeightedManifold, y: np.ndarray, length: float):
    """Solve frame transport and the Jacobi equation along s -> (y, s); returns h(s) evaluator."""
    n = side.dim
    m = n - 1
    start = np.append(y, 0.0)
    mj = _side_jet(side, start, 1)
    E0 = _orthonormal_tangent_frame(mj.g)
    conn = connection(mj)
    # Pi(E_i, E_j) = Gamma^n_ab E_i^a E_j^b for the inward normal d/ds
    S = E0[:m].T @ conn.gamma[-1][:m, :m] @ E0[:m]
    state0 = np.concatenate([E0.ravel(), np.eye(m).ravel(), -S.ravel()])
    tangent = np.zeros(n)
    tangent[-1] = 1.0

    def rhs(s, state):
        E = state[:n * m].reshape(n, m)
        J = state[n * m:n * m + m * m].reshape(m, m)
        Jp = state[n * m + m * m:].reshape(m, m)
        jet = _side_jet(side, np.append(y, s), 2)
        gamma = connection(jet).gamma
        riemann, _, _ = curvature_from_jet(jet)
        dE = -np.einsum("kij,i,ja->ka", gamma, tangent, E)
        R = np.einsum("rsmn,ri,s,mj,n->ij", riemann, E, tangent, E, tangent)
        return np.concatenate([dE.ravel(), Jp.ravel(), (-R @ J).ravel()])

    def focal(s, state):
        return np.linalg.det(state[n * m:n * m + m * m].reshape(m, m)) - DETERMINANT_FLOOR

    focal.terminal = True
    focal.direction = -1
    solution = solve_ivp(rhs, (0.0, length), state0, events=focal, **_SOLVER)
    if solution.status == 1:
        location = float(solution.t_events[0][0])
        raise FocalPointError(f"Jacobi determinant vanishes along the normal line at y={tuple(y)}", location)
    if not solution.success:
        raise NumericalError(f"Jacobi integration failed at y={tuple(y)}: {solution.message}")

    def density(s) -> np.ndarray:
        s = np.atleast_1d(np.asarray(s, dtype=float))
        states = solution.sol(s)
        J = states[n * m:n * m + m * m].T.reshape(-1, m, m)
        points = np.hstack([np.tile(y, (s.size, 1)), s.reshape(-1, 1)])
        return np.linalg.det(J) * side.weight.values(points)

    return density


def disintegrate_signed_distance(gs: CollarGluedSpace, y: Sequence[float],
                                 t_range: Optional[Tuple[float, float]] = None) -> NeedleDensity:
    """
    Needle density along the glued normal line through y.

    Args:
        gs: Glued collar
        y: Interface point
        t_range: (a, b) with a < 0 < b in the glued coordinate (default: the whole collar)

    Returns:
        NeedleDensity with h(t) = h0(t) for t >= 0 and h1(-t) for t <= 0
    """
    y = np.asarray(y, dtype=float)
    a, b = t_range if t_range is not None else (-gs.side1.depth, gs.side0.depth)
    if not (-gs.side1.depth <= a < 0 < b <= gs.side0.depth):
        raise ValueError(f"t range ({a}, {b}) must contain 0 and stay inside the collar")
    h0 = _jacobi_density(gs.side0, y, b)
    h1 = _jacobi_density(gs.side1, y, -a)
    logger.debug("[NEEDLE] disintegrated at y=%s over (%.4g, %.4g)", tuple(y), a, b)
    return NeedleDensity(a, b, left=lambda t: h1(-np.asarray(t, dtype=float)), right=h0,
                         provenance="disintegration")


@dataclass
class LogDerivReport:
    d_plus_log: float
    d_minus_log: float
    mean_curvature0: float
    mean_curvature1: float
    deviation: float
    passed: bool

    def to_dict(self) -> dict:
        return {
            'd_plus_log': self.d_plus_log,
            'd_minus_log': self.d_minus_log,
            'mean_curvature0': self.mean_curvature0,
            'mean_curvature1': self.mean_curvature1,
            'deviation': self.deviation,
            'passed': self.passed,
        }


def logderiv_vs_meancurv(gs: CollarGluedSpace, y: Sequence[float],
                         needle: Optional[NeedleDensity] = None) -> LogDerivReport:
    """d+ log h(0) against -H^Phi0(y) and d- log h(0) against +H^Phi1(y)."""
    needle = needle or disintegrate_signed_distance(gs, y)
    h = needle.value_at_zero
    b0, b1 = interface_geometry(gs, y)
    d_plus_log, d_minus_log = needle.d_plus / h, needle.d_minus / h
    H0, H1 = b0.weighted_mean_curvature, b1.weighted_mean_curvature
    deviation = max(abs(d_plus_log + H0), abs(d_minus_log - H1))
    return LogDerivReport(d_plus_log, d_minus_log, H0, H1, deviation, deviation <= LOGDERIV_TOLERANCE)


# --- tilted needles --------------------------------------------------------------

def _tilted_density(side: WeightedManifold, y: np.ndarray, velocity: np.ndarray,
                    slope: np.ndarray, length: float):
    """
    h(t) = det[J_1..J_m, x'] sqrt(det g(x)) / sqrt(det g_Y(y)) Phi(x) along
    x(t) = exp_y(t velocity), with J_a(0) = e_a and J_a'(0) = slope[:, a].
    """
    n = side.dim
    m = n - 1
    J0 = np.vstack([np.eye(m), np.zeros((1, m))])
    state0 = np.concatenate([np.append(y, 0.0), velocity, J0.ravel(), slope.ravel()])

    def rhs(t, state):
        x, v = state[:n], state[n:2 * n]
        J = state[2 * n:2 * n + n * m].reshape(n, m)
        Jp = state[2 * n + n * m:].reshape(n, m)
        conn = connection(_side_jet(side, x, 2))
        G, dG = conn.gamma, conn.dgamma
        acc = -np.einsum("kij,i,j->k", G, v, v)
        Jpp = (-np.einsum("lkij,la,i,j->ka", dG, J, v, v)
               - 2.0 * np.einsum("kij,i,ja->ka", G, v, Jp))
        return np.concatenate([v, acc, Jp.ravel(), Jpp.ravel()])

    solution = solve_ivp(rhs, (0.0, length), state0, **_SOLVER)
    if not solution.success:
        raise NumericalError(f"Tilted needle integration failed at y={tuple(y)}: {solution.message}")
    g_y = _side_jet(side, np.append(y, 0.0), 0).g[:m, :m]
    base_volume = math.sqrt(np.linalg.det(g_y))

    def density(t) -> np.ndarray:
        t = np.atleast_1d(np.asarray(t, dtype=float))
        states = solution.sol(t).T
        x = states[:, :n]
        v = states[:, n:2 * n]
        J = states[:, 2 * n:2 * n + n * m].reshape(-1, n, m)
        columns = np.concatenate([J, v[:, :, None]], axis=2)
        volume = np.sqrt(np.linalg.det(side.chart.metric_values(x))) / base_volume
        return np.linalg.det(columns) * volume * side.weight.values(x)

    return density


@dataclass
class TiltedNeedleReport:
    b: float
    a_hat: float
    numeric: float   # d-h(0) - d+h(0)
    formula: float
    deviation: float
    passed: bool

    def to_dict(self) -> dict:
        return {
            'b': self.b,
            'a_hat': self.a_hat,
            'numeric': self.numeric,
            'formula': self.formula,
            'deviation': self.deviation,
            'passed': self.passed,
        }


def tilted_needle_check(gs: CollarGluedSpace, y: Sequence[float], v: Sequence[float], b: float,
                        length: Optional[float] = None) -> TiltedNeedleReport:
    """
    Kink of the tilted needle density at the interface against

        [b^2 tr(Pi0 + Pi1) + a^2 (Pi0 + Pi1)(e1, e1) - b^2 sum g(grad log Phi_i, nu_i)] Phi

    with V = a e1 + b nu0 on side 0, a = sqrt(1 - b^2) and e1 = v/|v|.
    """
    if not 0 <= b <= 1:
        raise ValueError(f"Normal component b must lie in [0, 1], got {b}")
    y = np.asarray(y, dtype=float)
    n = gs.dim
    m = n - 1
    a_hat = math.sqrt(max(0.0, 1.0 - b * b))
    length = length or 0.1 * min(gs.side0.depth, gs.side1.depth)
    g0, g1 = interface_geometry(gs, y)
    direction = np.asarray(v, dtype=float)
    norm = math.sqrt(float(direction @ g0.induced @ direction))
    if norm == 0:
        raise ValueError("Tangent direction v must be nonzero")
    e1 = direction / norm

    slopes = []
    for sign, side in ((1.0, gs.side0), (-1.0, gs.side1)):
        gamma = connection(_side_jet(side, np.append(y, 0.0), 1)).gamma
        velocity = np.append(sign * a_hat * e1, b)
        slope = np.zeros((n, m))
        slope[:m] = -sign * a_hat * np.einsum("cab,b->ca", gamma[:m, :m, :m], e1)
        density = _tilted_density(side, y, velocity, slope, length)
        slopes.append(one_sided_derivative(density, 0.0, 1, length))
    numeric = -slopes[1] - slopes[0]

    total = g0.sff + g1.sff
    phi = float(gs.side0.weight.value(np.append(y, 0.0)))
    trace = float(np.trace(np.linalg.solve(g0.induced, total)))
    weight_term = g0.normal_log_derivative + g1.normal_log_derivative
    formula = (b * b * trace + a_hat ** 2 * float(e1 @ total @ e1) - b * b * weight_term) * phi
    deviation = abs(numeric - formula) / max(abs(formula), 1.0)
    logger.info("[NEEDLE] tilted kink at y=%s, b=%.3g: numeric=%.8g, formula=%.8g", tuple(y), b, numeric, formula)
    return TiltedNeedleReport(b, a_hat, numeric, formula, deviation, deviation <= TILTED_TOLERANCE)
