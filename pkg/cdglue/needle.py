"""
One-dimensional metric measure spaces: distortion coefficients,
(K,N)-concavity of densities, gluing of intervals and needle densities with
a kink at the interface.
"""
import logging
import math
from dataclasses import dataclass
from typing import Callable, Optional, Tuple

import numpy as np
from scipy.stats import qmc

from cdglue.config import get_settings
from cdglue.curvature import WEIGHT_FLOOR
from cdglue.errors import WeightError, WeightMismatchError
from cdglue.expression import ScalarField, affine_pullback
from cdglue.sweep import SweepResult, axis_samples, reduce_maximum, richardson

logger = logging.getLogger(__name__)

KINK_TOLERANCE = 1e-9
# one-sided derivatives of ODE-derived needles carry the solver error over the stencil step
NUMERIC_KINK_TOLERANCE = 1e-6
CONTINUITY_TOLERANCE = 1e-8

Density = Callable[[np.ndarray], np.ndarray]


# --- distortion coefficients ---------------------------------------------------

def _sin_kappa(kappa: float, x: np.ndarray) -> np.ndarray:
    if kappa > 0:
        root = math.sqrt(kappa)
        return np.sin(root * x) / root
    if kappa < 0:
        root = math.sqrt(-kappa)
        return np.sinh(root * x) / root
    return x


def _pi_kappa(kappa: float) -> float:
    return math.pi / math.sqrt(kappa) if kappa > 0 else math.inf


def _distortion(kappa: float, t, theta):
    t = np.asarray(t, dtype=float)
    theta = np.asarray(theta, dtype=float)
    t, theta = np.broadcast_arrays(t, theta)
    out = np.array(t, dtype=float, copy=True)
    limit = _pi_kappa(kappa)
    beyond = theta >= limit
    regular = (theta > 0) & ~beyond
    with np.errstate(all="ignore"):
        out[regular] = _sin_kappa(kappa, t[regular] * theta[regular]) / _sin_kappa(kappa, theta[regular])
    out[beyond] = np.inf
    return out


def _scalar_or_array(values: np.ndarray, *inputs):
    if all(np.ndim(x) == 0 for x in inputs):
        return float(values)
    return values


def sigma(K: float, N: float, t, theta):
    """
    Distortion coefficient sin_{K/N}(t theta) / sin_{K/N}(theta).

    Equal to t at theta = 0 and infinite once theta reaches pi/sqrt(K/N).
    """
    if N <= 0:
        raise ValueError(f"sigma needs N > 0, got {N}")
    return _scalar_or_array(_distortion(K / N, t, theta), t, theta)


def tau(K: float, N: float, t, theta):
    """Modified distortion coefficient t^(1/N) sigma_{K,N-1}^(t)(theta)^(1-1/N)."""
    if N < 1:
        raise ValueError(f"tau needs N >= 1, got {N}")
    t_arr = np.asarray(t, dtype=float)
    theta_arr = np.asarray(theta, dtype=float)
    t_arr, theta_arr = np.broadcast_arrays(t_arr, theta_arr)
    if N == 1:
        out = np.array(t_arr, dtype=float, copy=True)
        if K > 0:
            out[theta_arr > 0] = np.inf
        return _scalar_or_array(out, t, theta)
    distortion = _distortion(K / (N - 1), t_arr, theta_arr)
    with np.errstate(all="ignore"):
        out = t_arr ** (1.0 / N) * distortion ** (1.0 - 1.0 / N)
    return _scalar_or_array(out, t, theta)


# --- densities ----------------------------------------------------------------

@dataclass(frozen=True)
class MmInterval:
    """[a, b] with the measure Phi dt, together with the target K and N."""
    a: float
    b: float
    density: ScalarField
    K: float
    N: float

    def __post_init__(self):
        if not self.a < self.b:
            raise ValueError(f"Empty interval [{self.a}, {self.b}]")
        if self.N <= 1:
            raise ValueError(f"N must exceed 1, got {self.N}")
        if self.density.arity != 1:
            raise ValueError(f"Density must be a function of x1 only, got arity {self.density.arity}")
        samples = self.values(np.linspace(self.a, self.b, 257))
        if np.any(samples < -WEIGHT_FLOOR):
            raise WeightError(f"Density is negative on [{self.a}, {self.b}]")
        if not np.any(samples > WEIGHT_FLOOR):
            raise WeightError(f"Density has no mass on [{self.a}, {self.b}]")

    @property
    def length(self) -> float:
        return self.b - self.a

    def values(self, t) -> np.ndarray:
        return self.density.values(np.asarray(t, dtype=float).reshape(-1, 1))


@dataclass(frozen=True)
class PiecewiseDensity:
    """Densities on consecutive intervals; a shared end point belongs to the left piece."""
    breaks: Tuple[float, ...]
    pieces: Tuple[ScalarField, ...]

    def __post_init__(self):
        if len(self.breaks) != len(self.pieces) + 1:
            raise ValueError("Need one more break point than pieces")
        if any(b <= a for a, b in zip(self.breaks, self.breaks[1:])):
            raise ValueError(f"Break points must increase, got {self.breaks}")

    @property
    def interval(self) -> Tuple[float, float]:
        return self.breaks[0], self.breaks[-1]

    def values(self, t) -> np.ndarray:
        t = np.asarray(t, dtype=float).ravel()
        index = np.clip(np.searchsorted(self.breaks, t, side="left") - 1, 0, len(self.pieces) - 1)
        out = np.empty_like(t)
        for k, piece in enumerate(self.pieces):
            mask = index == k
            if np.any(mask):
                out[mask] = piece.values(t[mask].reshape(-1, 1))
        return out


def mirror_density(density: ScalarField, at: float) -> ScalarField:
    """t -> density(2 at - t), the reflection used for doublings."""
    return affine_pullback(density, -1.0, 2.0 * at)


# --- (K,N)-concavity ----------------------------------------------------------

@dataclass
class ConcavityScan:
    max_violation: float
    witness: Optional[Tuple[float, float, float]]  # (x0, x1, t)
    samples: int
    passed: bool

    def to_dict(self) -> dict:
        return {
            'max_violation': self.max_violation,
            'witness': list(self.witness) if self.witness else None,
            'samples': self.samples,
            'passed': self.passed,
        }


def _power_root(values: np.ndarray, N: float) -> np.ndarray:
    if np.any(values < -WEIGHT_FLOOR):
        raise WeightError("Density takes negative values")
    return np.clip(values, 0.0, None) ** (1.0 / (N - 1.0))


def concavity_scan(density: Density, a: float, b: float, K: float, N: float,
                   samples: Optional[int] = None, seed: Optional[int] = None,
                   tolerance: float = KINK_TOLERANCE) -> ConcavityScan:
    """
    Max over scrambled-Sobol triples (x0, x1, t) of
    sigma^(1-t) u(x0) + sigma^(t) u(x1) - u(x_t), with u = density^(1/(N-1))
    and distortion parameter K/(N-1).
    """
    samples = samples or 4096
    seed = get_settings().seed if seed is None else seed
    sampler = qmc.Sobol(d=3, scramble=True, seed=seed)
    unit = sampler.random_base2(int(math.ceil(math.log2(samples))))
    x0 = a + (b - a) * unit[:, 0]
    x1 = a + (b - a) * unit[:, 1]
    t = unit[:, 2]
    xt = (1.0 - t) * x0 + t * x1
    theta = np.abs(x1 - x0)
    u0, u1, ut = (_power_root(density(x), N) for x in (x0, x1, xt))
    s0 = sigma(K, N - 1.0, 1.0 - t, theta)
    s1 = sigma(K, N - 1.0, t, theta)
    with np.errstate(invalid="ignore"):
        rhs = np.where(u0 > 0, s0 * u0, 0.0) + np.where(u1 > 0, s1 * u1, 0.0)
    violation = rhs - ut
    worst = int(np.argmax(violation))
    value = float(violation[worst])
    witness = (float(x0[worst]), float(x1[worst]), float(t[worst]))
    return ConcavityScan(value, witness, len(t), value <= tolerance)


def kn_concavity_check(mm: MmInterval, samples: Optional[int] = None,
                       seed: Optional[int] = None) -> ConcavityScan:
    """(K,N)-concavity of the density of ``mm`` on sampled geodesic triples."""
    scan = concavity_scan(mm.values, mm.a, mm.b, mm.K, mm.N, samples, seed)
    if not scan.passed:
        logger.info("[NEEDLE] concavity violated by %.3g at %s", scan.max_violation, scan.witness)
    return scan


def one_d_bakry_emery_margin(mm: MmInterval, resolution: Optional[int] = None) -> SweepResult:
    """Max over a grid of u'' + K/(N-1) u with u = Phi^(1/(N-1)); concavity means <= 0."""
    resolution = resolution or get_settings().grid_resolution
    points = axis_samples(mm.a, mm.b, resolution).reshape(-1, 1)
    kappa = mm.K / (mm.N - 1.0)

    def evaluate(point):
        jet = mm.density.jet(point, 2)
        if float(jet.value[0]) < WEIGHT_FLOOR:
            return None
        u = jet.power(1.0 / (mm.N - 1.0))
        return float(u.second[0, 0, 0] + kappa * u.value[0])

    return reduce_maximum(points, [evaluate(p) for p in points])


# --- gluing of intervals --------------------------------------------------------

def _root_derivative(density: ScalarField, at: float, N: float) -> float:
    jet = density.jet([at], 1).power(1.0 / (N - 1.0))
    return float(jet.first[0, 0])


@dataclass
class Glue1DReport:
    left: ConcavityScan
    right: ConcavityScan
    glued: ConcavityScan
    d_minus: float
    d_plus: float
    kink_passed: bool

    @property
    def passed(self) -> bool:
        return self.left.passed and self.right.passed and self.kink_passed

    def to_dict(self) -> dict:
        return {
            'left': self.left.to_dict(),
            'right': self.right.to_dict(),
            'glued': self.glued.to_dict(),
            'd_minus': self.d_minus,
            'd_plus': self.d_plus,
            'kink_passed': self.kink_passed,
            'passed': self.passed,
        }


def glue_1d(phi0: ScalarField, phi1: ScalarField, a: float, b: float, c: float, K: float, N: float,
            samples: Optional[int] = None, seed: Optional[int] = None) -> Glue1DReport:
    """
    Glue Phi0 on [a, b] to Phi1 on [b, c].

    Each side must be (K,N)-concave and u = Phi^(1/(N-1)) must kink
    downward at b: d-u(b) >= d+u(b).
    """
    left, right = MmInterval(a, b, phi0, K, N), MmInterval(b, c, phi1, K, N)
    v0, v1 = phi0.value([b]), phi1.value([b])
    if abs(v0 - v1) > KINK_TOLERANCE or v0 <= 0:
        raise WeightMismatchError(f"Densities must agree and be positive at {b}: {v0:.12g} vs {v1:.12g}")
    d_minus = _root_derivative(phi0, b, N)
    d_plus = _root_derivative(phi1, b, N)
    glued = PiecewiseDensity((a, b, c), (phi0, phi1))
    report = Glue1DReport(
        kn_concavity_check(left, samples, seed),
        kn_concavity_check(right, samples, seed),
        concavity_scan(glued.values, a, c, K, N, samples, seed),
        d_minus, d_plus, d_minus >= d_plus - KINK_TOLERANCE,
    )
    logger.info("[NEEDLE] glued at %.6g: d-u=%.6g, d+u=%.6g, pass=%s", b, d_minus, d_plus, report.passed)
    return report


# --- needle densities ----------------------------------------------------------

def one_sided_derivative(func: Density, at: float, direction: int, length: float) -> float:
    """
    d+/d- of ``func`` at ``at`` from three-point one-sided differences,
    Richardson-extrapolated over the configured steps (fractions of ``length``).
    """
    estimates = []
    for fraction in get_settings().richardson_steps:
        h = fraction * length
        x = np.array([at, at + direction * h, at + 2 * direction * h])
        f = np.asarray(func(x), dtype=float)
        estimates.append(direction * (-3.0 * f[0] + 4.0 * f[1] - f[2]) / (2.0 * h))
    return richardson(estimates, orders=(2, 3))


@dataclass
class NeedleDensity:
    """
    h on (a, b) with a < 0 < b, smooth on each side of 0.  ``left`` is used
    for t <= 0 and ``right`` for t >= 0.
    """
    a: float
    b: float
    left: Density
    right: Density
    provenance: str = "user"  # analytic | disintegration | user
    d_minus: Optional[float] = None
    d_plus: Optional[float] = None

    def __post_init__(self):
        if not self.a < 0 < self.b:
            raise ValueError(f"Needle interval must contain 0, got ({self.a}, {self.b})")
        h_left = float(np.asarray(self.left(np.array([0.0])))[0])
        h_right = float(np.asarray(self.right(np.array([0.0])))[0])
        if abs(h_left - h_right) > CONTINUITY_TOLERANCE * max(1.0, abs(h_right)):
            raise WeightMismatchError(f"Needle density is discontinuous at 0: {h_left:.12g} vs {h_right:.12g}")
        if self.d_minus is None:
            self.d_minus = one_sided_derivative(self.left, 0.0, -1, -self.a)
        if self.d_plus is None:
            self.d_plus = one_sided_derivative(self.right, 0.0, 1, self.b)

    @classmethod
    def from_fields(cls, left: ScalarField, right: ScalarField, a: float, b: float) -> "NeedleDensity":
        """Analytic needle from two fields of x1; one-sided derivatives are exact."""
        return cls(a, b,
                   lambda t: left.values(np.asarray(t, dtype=float).reshape(-1, 1)),
                   lambda t: right.values(np.asarray(t, dtype=float).reshape(-1, 1)),
                   provenance="analytic",
                   d_minus=float(left.jet([0.0], 1).first[0, 0]),
                   d_plus=float(right.jet([0.0], 1).first[0, 0]))

    @property
    def value_at_zero(self) -> float:
        return float(np.asarray(self.right(np.array([0.0])))[0])

    def values(self, t) -> np.ndarray:
        t = np.asarray(t, dtype=float).ravel()
        out = np.empty_like(t)
        negative = t < 0
        if np.any(negative):
            out[negative] = self.left(t[negative])
        if np.any(~negative):
            out[~negative] = self.right(t[~negative])
        return out


@dataclass
class NeedleJumpReport:
    left: ConcavityScan
    right: ConcavityScan
    d_minus: float   # d-(h^(1/(N-1)))(0)
    d_plus: float    # d+(h^(1/(N-1)))(0)
    jump_passed: bool

    @property
    def passed(self) -> bool:
        return self.left.passed and self.right.passed and self.jump_passed

    def to_dict(self) -> dict:
        return {
            'left': self.left.to_dict(),
            'right': self.right.to_dict(),
            'd_minus': self.d_minus,
            'd_plus': self.d_plus,
            'jump_passed': self.jump_passed,
            'passed': self.passed,
        }


def needle_jump_check(nd: NeedleDensity, K: float, N: float, samples: Optional[int] = None,
                      seed: Optional[int] = None) -> NeedleJumpReport:
    """Per-side (K,N)-concavity of h^(1/(N-1)) and d-(h^(1/(N-1)))(0) >= d+(h^(1/(N-1)))(0)."""
    h0 = nd.value_at_zero
    if h0 <= 0:
        raise WeightError(f"Needle density must be positive at 0, got {h0:.3g}")
    # chain rule for u = h^(1/(N-1)) at t = 0
    factor = h0 ** (1.0 / (N - 1.0) - 1.0) / (N - 1.0)
    d_minus, d_plus = factor * nd.d_minus, factor * nd.d_plus
    tolerance = KINK_TOLERANCE if nd.provenance == "analytic" else NUMERIC_KINK_TOLERANCE
    report = NeedleJumpReport(
        concavity_scan(nd.left, nd.a, 0.0, K, N, samples, seed, tolerance),
        concavity_scan(nd.right, 0.0, nd.b, K, N, samples, seed, tolerance),
        d_minus, d_plus, d_minus >= d_plus - tolerance,
    )
    logger.info("[NEEDLE] jump at 0: d-=%.6g, d+=%.6g, pass=%s", d_minus, d_plus, report.passed)
    return report
