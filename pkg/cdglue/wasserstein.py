"""
Optimal transport on an interval.

In one dimension the optimal coupling of two absolutely continuous measures
is the monotone rearrangement, so displacement interpolation is explicit in
terms of quantile functions.  The CD(K,N) entropy inequality is checked
along that interpolation.
"""
import logging
from dataclasses import dataclass, field
from typing import Callable, List, Optional, Sequence, Union

import numpy as np
from scipy.optimize import brentq, linear_sum_assignment

from cdglue.errors import SupportError, WeightError
from cdglue.expression import ScalarField
from cdglue.needle import MmInterval, tau

logger = logging.getLogger(__name__)

PANELS = 256
PANEL_NODES = 8
QUANTILE_XTOL = 1e-10
ENTROPY_TOLERANCE = 1e-6
SUPPORT_FLOOR = 1e-12

DensityLike = Union[ScalarField, Callable[[np.ndarray], np.ndarray]]


def _as_callable(density: DensityLike) -> Callable[[np.ndarray], np.ndarray]:
    if isinstance(density, ScalarField):
        return lambda x: density.values(np.asarray(x, dtype=float).reshape(-1, 1))
    return lambda x: np.asarray(density(np.asarray(x, dtype=float)), dtype=float).ravel()


class QuantileFunction:
    """Normalized density p on [a, b] with its CDF and quantile function."""

    def __init__(self, density: Callable[[np.ndarray], np.ndarray], a: float, b: float, panels: int = PANELS):
        self.raw = density
        self.a, self.b = a, b
        self.edges = np.linspace(a, b, panels + 1)
        self.nodes, self.weights = np.polynomial.legendre.leggauss(PANEL_NODES)
        masses = np.array([self._integral(lo, hi) for lo, hi in zip(self.edges, self.edges[1:])])
        if np.any(self.raw(self._panel_points(a, b)) < -SUPPORT_FLOOR):
            raise WeightError("Density takes negative values")
        self.mass = float(masses.sum())
        if not np.isfinite(self.mass) or self.mass <= 0:
            raise WeightError(f"Density is not normalizable (mass {self.mass:.3g})")
        self.cumulative = np.concatenate([[0.0], np.cumsum(masses)]) / self.mass

    def _panel_points(self, lo: float, hi: float) -> np.ndarray:
        return lo + (hi - lo) * (self.nodes + 1.0) / 2.0

    def _integral(self, lo: float, hi: float) -> float:
        if hi <= lo:
            return 0.0
        return float(np.sum(self.weights * self.raw(self._panel_points(lo, hi))) * (hi - lo) / 2.0)

    def density(self, x) -> np.ndarray:
        return self.raw(x) / self.mass

    def cdf(self, x: float) -> float:
        panel = int(np.clip(np.searchsorted(self.edges, x, side="right") - 1, 0, len(self.edges) - 2))
        return self.cumulative[panel] + self._integral(self.edges[panel], x) / self.mass

    def __call__(self, s) -> np.ndarray:
        s = np.atleast_1d(np.asarray(s, dtype=float))
        out = np.empty_like(s)
        for k, level in enumerate(s):
            panel = int(np.clip(np.searchsorted(self.cumulative, level, side="left") - 1, 0, len(self.edges) - 2))
            lo, hi = self.edges[panel], self.edges[panel + 1]
            if self.cumulative[panel + 1] - self.cumulative[panel] <= 0:
                out[k] = lo
                continue
            out[k] = brentq(lambda x: self.cdf(x) - level, lo, hi, xtol=QUANTILE_XTOL)
        return out


def _quantile_nodes(panels: int = PANELS):
    x, w = np.polynomial.legendre.leggauss(4)
    edges = np.linspace(0.0, 1.0, panels + 1)
    width = 1.0 / panels
    s = (edges[:-1, None] + width * (x[None, :] + 1.0) / 2.0).ravel()
    weights = np.tile(w * width / 2.0, panels)
    return s, weights


def _check_support(p: Callable[[np.ndarray], np.ndarray], a: float, b: float, label: str) -> None:
    ends = p(np.array([a, b]))
    if np.any(ends > SUPPORT_FLOOR):
        raise SupportError(f"{label} must vanish at the interval ends, got {ends[0]:.3g} and {ends[1]:.3g}")


@dataclass
class EntropyRow:
    t: float
    entropy: float
    bound: float

    @property
    def violation(self) -> float:
        return self.entropy - self.bound


@dataclass
class WassersteinReport:
    rows: List[EntropyRow] = field(default_factory=list)
    w2: float = 0.0

    @property
    def max_violation(self) -> float:
        return max(r.violation for r in self.rows) if self.rows else -np.inf

    @property
    def passed(self) -> bool:
        return self.max_violation <= ENTROPY_TOLERANCE

    def to_dict(self) -> dict:
        return {
            'w2': self.w2,
            'max_violation': self.max_violation,
            'passed': self.passed,
            'rows': [{'t': r.t, 'entropy': r.entropy, 'bound': r.bound} for r in self.rows],
        }


def wasserstein_1d_cd_check(mm: MmInterval, mu0: DensityLike, mu1: DensityLike,
                            times: Optional[Sequence[float]] = None) -> WassersteinReport:
    """
    Entropy inequality of CD(K,N) along the displacement interpolation of
    mu0 and mu1 (densities with respect to Phi dt, normalized here).

    S_N(mu_t) <= -int [tau^(1-t)(d) rho0^(-1/N) + tau^(t)(d) rho1^(-1/N)] dpi
    """
    times = np.linspace(0.0, 1.0, 11)[1:-1] if times is None else np.asarray(times, dtype=float)
    phi = mm.values
    rho0, rho1 = _as_callable(mu0), _as_callable(mu1)
    p0 = lambda x: rho0(x) * phi(x)
    p1 = lambda x: rho1(x) * phi(x)
    _check_support(p0, mm.a, mm.b, "mu0")
    _check_support(p1, mm.a, mm.b, "mu1")
    q0, q1 = QuantileFunction(p0, mm.a, mm.b), QuantileFunction(p1, mm.a, mm.b)
    s, weights = _quantile_nodes()
    x0, x1 = q0(s), q1(s)
    d0, d1 = q0.density(x0), q1.density(x1)
    if np.any(d0 <= 0) or np.any(d1 <= 0):
        raise WeightError("Transported density vanishes inside the support")
    distance = np.abs(x1 - x0)
    N, K = mm.N, mm.K
    # densities with respect to m at the coupled points
    r0, r1 = d0 / phi(x0), d1 / phi(x1)
    report = WassersteinReport(w2=float(np.sqrt(np.sum(weights * distance ** 2))))
    for t in times:
        xt = (1.0 - t) * x0 + t * x1
        pt = 1.0 / ((1.0 - t) / d0 + t / d1)
        rt = pt / phi(xt)
        entropy = -float(np.sum(weights * rt ** (-1.0 / N)))
        with np.errstate(invalid="ignore"):
            integrand = tau(K, N, 1.0 - t, distance) * r0 ** (-1.0 / N) + tau(K, N, t, distance) * r1 ** (-1.0 / N)
        bound = -float(np.sum(weights * integrand))
        report.rows.append(EntropyRow(float(t), entropy, bound))
    logger.info("[TRANSPORT] W2=%.6g, max entropy violation=%.3g", report.w2, report.max_violation)
    return report


def wasserstein2(density0: DensityLike, density1: DensityLike, a: float, b: float) -> float:
    """W2 between two Lebesgue densities on [a, b] from the quantile coupling."""
    q0 = QuantileFunction(_as_callable(density0), a, b)
    q1 = QuantileFunction(_as_callable(density1), a, b)
    s, weights = _quantile_nodes()
    return float(np.sqrt(np.sum(weights * (q1(s) - q0(s)) ** 2)))


def quantile_points(density: DensityLike, a: float, b: float, count: int) -> np.ndarray:
    """``count`` equal-mass atoms at the midpoint quantile levels."""
    q = QuantileFunction(_as_callable(density), a, b)
    return q((np.arange(count) + 0.5) / count)


def discrete_w2(x: Sequence[float], y: Sequence[float]) -> float:
    """W2 between two uniform empirical measures of equal size by optimal assignment."""
    x, y = np.asarray(x, dtype=float), np.asarray(y, dtype=float)
    if x.shape != y.shape:
        raise ValueError(f"Point sets must have equal size, got {x.shape} and {y.shape}")
    cost = (x[:, None] - y[None, :]) ** 2
    rows, cols = linear_sum_assignment(cost)
    return float(np.sqrt(cost[rows, cols].mean()))
