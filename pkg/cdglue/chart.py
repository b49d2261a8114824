"""
Metric charts and the tensor calculus built on them.

Everything here works from a :class:`MetricJet` (metric components with
their first and second partial derivatives at a point), so the same
routines serve exact charts, glued metrics and mollified metrics alike.
"""
import logging
from dataclasses import dataclass, field
from typing import List, Optional, Protocol, Sequence, Tuple, Union

import numpy as np
import scipy.linalg

from cdglue.errors import DegenerateMetricError, DomainError
from cdglue.expression import ScalarField, parse_field
from cdglue.jet import Jet, evaluate_jets

logger = logging.getLogger(__name__)

MAX_DIM = 4
CONDITION_LIMIT = 1e12
EIGEN_FLOOR = 1e-10

Box = Tuple[Tuple[float, float], ...]


@dataclass(frozen=True)
class TensorValue:
    """A tensor at a point: ``kind`` names the index structure."""
    kind: str  # scalar | covector | vector | bilinear | operator | christoffel | curvature
    components: np.ndarray
    point: Tuple[float, ...]

    def __post_init__(self):
        components = np.array(self.components, dtype=float)
        components.setflags(write=False)
        object.__setattr__(self, "components", components)
        object.__setattr__(self, "point", tuple(float(x) for x in self.point))


@dataclass(frozen=True)
class MetricJet:
    """g_ij, d_k g_ij (index order k,i,j) and d_k d_l g_ij (k,l,i,j) at a point."""
    g: np.ndarray
    dg: Optional[np.ndarray]
    ddg: Optional[np.ndarray]
    point: Tuple[float, ...]

    @property
    def dim(self) -> int:
        return self.g.shape[0]


class MetricSource(Protocol):
    """Anything that can hand out metric jets: charts, glued and smoothed metrics."""
    dim: int

    def metric_jet(self, point: Sequence[float], order: int = 2) -> MetricJet: ...


class ScalarSource(Protocol):
    """Anything that can hand out jets of a scalar (fields, mollified weights)."""

    def jet(self, point: Sequence[float], order: int = 2) -> Jet: ...


def upper_indices(n: int) -> List[Tuple[int, int]]:
    """Storage order of metric components: (1,1), (1,2), ..., (n,n)."""
    return [(i, j) for i in range(n) for j in range(i, n)]


def check_positive_definite(g: np.ndarray, point: Sequence[float]) -> None:
    eigenvalues = np.linalg.eigvalsh(g)
    if eigenvalues[0] <= EIGEN_FLOOR:
        raise DegenerateMetricError(
            f"Metric not positive definite at {tuple(point)} (smallest eigenvalue {eigenvalues[0]:.3g})")
    if eigenvalues[-1] / eigenvalues[0] > CONDITION_LIMIT:
        raise DegenerateMetricError(
            f"Metric condition number {eigenvalues[-1] / eigenvalues[0]:.3g} too large at {tuple(point)}")


@dataclass(frozen=True)
class MetricChart:
    """A coordinate box carrying metric components g_ij as expressions."""
    dim: int
    domain: Box
    components: Tuple[ScalarField, ...]

    def __post_init__(self):
        if not 1 <= self.dim <= MAX_DIM:
            raise ValueError(f"Chart dimension must be between 1 and {MAX_DIM}, got {self.dim}")
        if len(self.domain) != self.dim:
            raise ValueError(f"Domain has {len(self.domain)} intervals for a {self.dim}-dimensional chart")
        for lo, hi in self.domain:
            if not lo < hi:
                raise ValueError(f"Empty coordinate interval [{lo}, {hi}]")
        expected = self.dim * (self.dim + 1) // 2
        if len(self.components) != expected:
            raise ValueError(f"Expected {expected} metric components, got {len(self.components)}")
        object.__setattr__(self, "domain", tuple((float(lo), float(hi)) for lo, hi in self.domain))

    @classmethod
    def from_strings(cls, dim: int, domain: Sequence[Sequence[float]], components: Sequence[str]) -> "MetricChart":
        """Build a chart from upper-triangular component expressions."""
        fields = tuple(parse_field(text, dim) for text in components)
        return cls(dim, tuple(tuple(b) for b in domain), fields)

    @classmethod
    def diagonal(cls, domain: Sequence[Sequence[float]], entries: Sequence[str]) -> "MetricChart":
        dim = len(entries)
        texts = [entries[i] if i == j else "0" for i, j in upper_indices(dim)]
        return cls.from_strings(dim, domain, texts)

    def contains(self, point: Sequence[float], slack: float = 1e-12) -> bool:
        return all(lo - slack <= x <= hi + slack for x, (lo, hi) in zip(point, self.domain))

    def metric_jets(self, points, order: int = 2) -> Tuple[np.ndarray, ...]:
        """
        Batched metric jets.

        Returns:
            (g, dg, ddg) with shapes (B,n,n), (B,n,n,n), (B,n,n,n,n); the
            derivative arrays are None above ``order``
        """
        points = np.atleast_2d(np.asarray(points, dtype=float))
        batch, n = points.shape[0], self.dim
        g = np.zeros((batch, n, n))
        dg = np.zeros((batch, n, n, n)) if order >= 1 else None
        ddg = np.zeros((batch, n, n, n, n)) if order >= 2 else None
        for component, (i, j) in zip(self.components, upper_indices(n)):
            if component.is_constant:
                g[:, i, j] = g[:, j, i] = component.value(points[0])
                continue
            jet = evaluate_jets(component, points, order)
            g[:, i, j] = g[:, j, i] = jet.value
            if order >= 1:
                dg[:, :, i, j] = dg[:, :, j, i] = jet.first
            if order >= 2:
                ddg[:, :, :, i, j] = ddg[:, :, :, j, i] = jet.second
        return g, dg, ddg

    def metric_values(self, points) -> np.ndarray:
        points = np.atleast_2d(np.asarray(points, dtype=float))
        n = self.dim
        g = np.zeros((points.shape[0], n, n))
        for component, (i, j) in zip(self.components, upper_indices(n)):
            g[:, i, j] = g[:, j, i] = component.values(points)
        return g

    def metric_jet(self, point: Sequence[float], order: int = 2) -> MetricJet:
        if not self.contains(point):
            raise DomainError(point, self.domain)
        g, dg, ddg = self.metric_jets([point], order)
        check_positive_definite(g[0], point)
        return MetricJet(g[0], dg[0] if dg is not None else None,
                         ddg[0] if ddg is not None else None, tuple(point))


# --- connection and curvature ---------------------------------------------------

@dataclass(frozen=True)
class Connection:
    ginv: np.ndarray
    gamma: np.ndarray  # [k, i, j] = Gamma^k_ij
    dgamma: Optional[np.ndarray]  # [l, k, i, j] = d_l Gamma^k_ij


def connection(mj: MetricJet) -> Connection:
    """Christoffel symbols (and their first derivatives when available)."""
    check_positive_definite(mj.g, mj.point)
    ginv = np.linalg.inv(mj.g)
    ginv = 0.5 * (ginv + ginv.T)
    dg = mj.dg
    # A_ijm = d_i g_jm + d_j g_im - d_m g_ij
    A = dg + dg.transpose(1, 0, 2) - dg.transpose(1, 2, 0)
    gamma = 0.5 * np.einsum("km,ijm->kij", ginv, A)
    gamma = 0.5 * (gamma + gamma.transpose(0, 2, 1))
    dgamma = None
    if mj.ddg is not None:
        ddg = mj.ddg
        dA = ddg + ddg.transpose(0, 2, 1, 3) - ddg.transpose(0, 2, 3, 1)
        dginv = -np.einsum("ka,lab,bm->lkm", ginv, dg, ginv)
        dgamma = 0.5 * (np.einsum("lkm,ijm->lkij", dginv, A) + np.einsum("km,lijm->lkij", ginv, dA))
        dgamma = 0.5 * (dgamma + dgamma.transpose(0, 1, 3, 2))
    return Connection(ginv, gamma, dgamma)


def christoffel(metric: MetricSource, point: Sequence[float]) -> TensorValue:
    """Gamma^k_ij at ``point`` (component index order k, i, j)."""
    conn = connection(metric.metric_jet(point, order=1))
    return TensorValue("christoffel", conn.gamma, point)


@dataclass(frozen=True)
class CurvatureValue:
    riemann: TensorValue  # R_{rho sigma mu nu} = g(R(d_mu, d_nu) d_sigma, d_rho)
    ricci: TensorValue
    scalar: float


def curvature_from_jet(mj: MetricJet) -> Tuple[np.ndarray, np.ndarray, float]:
    conn = connection(mj)
    G, dG = conn.gamma, conn.dgamma
    up = (np.einsum("mrns->rsmn", dG) - np.einsum("nrms->rsmn", dG)
          + np.einsum("rml,lns->rsmn", G, G) - np.einsum("rnl,lms->rsmn", G, G))
    riemann = np.einsum("ra,asmn->rsmn", mj.g, up)
    ricci = np.einsum("rsrn->sn", up)
    ricci = 0.5 * (ricci + ricci.T)
    scalar = float(np.einsum("sn,sn->", conn.ginv, ricci))
    return riemann, ricci, scalar


def curvature(metric: MetricSource, point: Sequence[float]) -> CurvatureValue:
    """Riemann (0,4), Ricci and scalar curvature at ``point``."""
    riemann, ricci, scalar = curvature_from_jet(metric.metric_jet(point, order=2))
    return CurvatureValue(
        TensorValue("curvature", riemann, point),
        TensorValue("bilinear", ricci, point),
        scalar,
    )


@dataclass(frozen=True)
class HessianGrad:
    grad: TensorValue  # raised index
    hess: TensorValue
    laplacian: float
    gradnormsq: float


def hessian_from_jet(conn: Connection, jet: Jet) -> np.ndarray:
    hess = jet.second[0] - np.einsum("kij,k->ij", conn.gamma, jet.first[0])
    return 0.5 * (hess + hess.T)


def hessian_grad(metric: MetricSource, field: Union[ScalarField, ScalarSource],
                 point: Sequence[float]) -> HessianGrad:
    """Covariant Hessian, gradient, Laplacian and |grad|^2 of a scalar."""
    conn = connection(metric.metric_jet(point, order=1))
    jet = field.jet(point, 2)
    hess = hessian_from_jet(conn, jet)
    grad = conn.ginv @ jet.first[0]
    return HessianGrad(
        TensorValue("vector", grad, point),
        TensorValue("bilinear", hess, point),
        float(np.einsum("ij,ij->", conn.ginv, hess)),
        float(jet.first[0] @ grad),
    )


def _as_matrix(value) -> np.ndarray:
    if isinstance(value, TensorValue):
        return np.asarray(value.components)
    return np.asarray(value, dtype=float)


def _checked_pair(form, g) -> Tuple[np.ndarray, np.ndarray]:
    A, B = _as_matrix(form), _as_matrix(g)
    for name, M in (("form", A), ("metric", B)):
        if np.max(np.abs(M - M.T), initial=0.0) > 1e-10 * max(1.0, np.max(np.abs(M), initial=0.0)):
            raise ValueError(f"{name} is not symmetric")
    return 0.5 * (A + A.T), 0.5 * (B + B.T)


def generalized_eigenvalues(form, g) -> np.ndarray:
    """All lambda with form(v,v) = lambda g(v,v), ascending."""
    A, B = _checked_pair(form, g)
    if A.size == 0:
        return np.zeros(0)
    try:
        return scipy.linalg.eigh(A, B, eigvals_only=True)
    except np.linalg.LinAlgError as e:
        raise DegenerateMetricError(f"Generalized eigensolve failed: {e}")


def min_generalized_eig(form, g) -> float:
    return float(generalized_eigenvalues(form, g)[0])


def max_generalized_eig(form, g) -> float:
    return float(generalized_eigenvalues(form, g)[-1])
